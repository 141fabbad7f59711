#pragma once

#include <atomic>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "persuade/core.hpp"
#include "persuade/errors.hpp"
#include "persuade/instance.hpp"
#include "persuade/learners.hpp"
#include "persuade/sim.hpp"

// Experiment orchestration: JSON config ingestion, learner registry, a
// deterministic fan-out over (learner x seed) episodes, and CSV logging with
// a fixed schema. Output bytes are independent of the worker count.

namespace persuade::exp {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;
inline constexpr char kResultsHeader[] = "learner,seed,t,instant_regret,cumulative_regret";
inline constexpr char kSummaryHeader[] =
    "learner,T,mean_cum_regret,std_cum_regret,theorem_bound";

struct LearnerSpec {
    std::string name;
    json params = json::object();
};

struct ExperimentConfig {
    json instance_spec;
    std::vector<LearnerSpec> learners;
    std::size_t horizon = 0;
    json seeds_spec;                   // as written in the file
    std::vector<std::uint64_t> seeds;  // resolved
    TieRule tie = TieRule::recommended_then_sender;
    bool state_observing = false;
    bool exact_ball_check = false;
    int eps_exponent = 5;

    static ExperimentConfig parse(const json& j);
    json to_json() const;
};

namespace detail {

inline std::vector<std::uint64_t> resolve_seeds(const json& spec,
                                                std::optional<std::uint64_t> base_override) {
    std::vector<std::uint64_t> out;
    if (spec.is_array()) {
        for (const auto& s : spec) {
            if (!s.is_number_unsigned() && !s.is_number_integer())
                throw ConfigError("seeds: list entries must be integers");
            out.push_back(s.get<std::uint64_t>());
        }
    } else if (spec.is_object()) {
        if (!spec.contains("count"))
            throw ConfigError("seeds: object form needs a count field");
        std::size_t count = spec.at("count").get<std::size_t>();
        std::uint64_t base = spec.value("base", std::uint64_t{1});
        if (base_override) base = *base_override;
        for (std::size_t i = 0; i < count; ++i) out.push_back(base + i);
    } else {
        throw ConfigError("seeds: expected a list or {count, base}");
    }
    if (out.empty()) throw ConfigError("seeds: at least one seed required");
    return out;
}

}  // namespace detail

inline ExperimentConfig ExperimentConfig::parse(const json& j) {
    if (!j.is_object()) throw ConfigError("config: top level must be an object");
    if (j.value("schema_version", 0) != kSchemaVersion)
        throw ConfigError("config: schema_version must be 1");
    ExperimentConfig cfg;
    if (!j.contains("instance")) throw ConfigError("config: missing field 'instance'");
    cfg.instance_spec = j.at("instance");
    if (!j.contains("learners") || !j.at("learners").is_array() || j.at("learners").empty())
        throw ConfigError("config: 'learners' must be a nonempty list");
    for (const auto& l : j.at("learners")) {
        LearnerSpec spec;
        if (l.is_string()) {
            spec.name = l.get<std::string>();
        } else if (l.is_object() && l.contains("name")) {
            spec.name = l.at("name").get<std::string>();
            spec.params = l.value("params", json::object());
        } else {
            throw ConfigError("config: each learner needs a 'name'");
        }
        cfg.learners.push_back(std::move(spec));
    }
    if (!j.contains("T")) throw ConfigError("config: missing field 'T'");
    cfg.horizon = j.at("T").get<std::size_t>();
    if (cfg.horizon < 1) throw ConfigError("config: T must be >= 1");
    if (!j.contains("seeds")) throw ConfigError("config: missing field 'seeds'");
    cfg.seeds_spec = j.at("seeds");
    const char* env_seed = std::getenv("PERSUADE_SEED");
    std::optional<std::uint64_t> seed_override;
    if (env_seed != nullptr && *env_seed != '\0')
        seed_override = std::strtoull(env_seed, nullptr, 10);
    cfg.seeds = detail::resolve_seeds(cfg.seeds_spec, seed_override);
    cfg.tie = tie_rule_from_string(
        j.value("tie_rule", std::string("recommended_then_sender")));
    json flags = j.value("flags", json::object());
    cfg.state_observing = flags.value("state_observing", false);
    cfg.exact_ball_check = flags.value("exact_ball_check", false);
    cfg.eps_exponent = flags.value("eps_exponent", 5);
    return cfg;
}

inline json ExperimentConfig::to_json() const {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["instance"] = instance_spec;
    json ls = json::array();
    for (const auto& l : learners) {
        json e;
        e["name"] = l.name;
        e["params"] = l.params;
        ls.push_back(e);
    }
    j["learners"] = ls;
    j["T"] = horizon;
    j["seeds"] = seeds_spec;
    j["tie_rule"] = to_string(tie);
    j["flags"] = {{"state_observing", state_observing},
                  {"exact_ball_check", exact_ball_check},
                  {"eps_exponent", eps_exponent}};
    return j;
}

// Builds an instance from either a generator reference or an inline
// definition (utility rows are [action][state]).
inline Instance build_instance(const json& spec) {
    if (!spec.is_object()) throw ConfigError("instance: expected an object");
    if (spec.contains("generator")) {
        std::string name = spec.at("generator").get<std::string>();
        json p = spec.value("params", json::object());
        if (name == "example_basic") return make_example_basic();
        if (name == "random") {
            RandomInstanceSpec rs;
            rs.n_states = p.value("states", std::size_t{2});
            rs.n_actions = p.value("actions", std::size_t{2});
            rs.binary = p.value("binary", false);
            rs.min_prior = p.value("min_prior", rs.min_prior);
            rs.min_margin = p.value("min_margin", rs.min_margin);
            return make_random_instance(rs, p.value("seed", std::uint64_t{1}));
        }
        if (name == "hard_general")
            return make_hard_instance_general(p.value("kappa", 0.05),
                                              p.value("prior_index", std::size_t{0}));
        if (name == "hard_binary")
            return make_hard_instance_binary(p.value("horizon", std::size_t{1000}),
                                             p.value("valuation", 0.5));
        throw ConfigError("instance: unknown generator '" + name + "'");
    }
    const json& inl = spec.contains("inline") ? spec.at("inline") : spec;
    Instance inst;
    try {
        inst.state_count = inl.at("states").get<std::size_t>();
        inst.action_count = inl.at("actions").get<std::size_t>();
        inst.prior = Belief(inl.at("prior").get<std::vector<double>>());
        inst.p0 = inl.at("p0").get<double>();
        auto read_matrix = [&](const char* key) {
            Matrix m(inst.action_count, inst.state_count);
            const json& rows = inl.at(key);
            if (!rows.is_array() || rows.size() != inst.action_count)
                throw ConfigError(std::string("instance: ") + key +
                                  " must have one row per action");
            for (std::size_t a = 0; a < inst.action_count; ++a) {
                if (rows[a].size() != inst.state_count)
                    throw ConfigError(std::string("instance: ") + key +
                                      " rows must have one entry per state");
                for (std::size_t w = 0; w < inst.state_count; ++w)
                    m(a, w) = rows[a][w].get<double>();
            }
            return m;
        };
        inst.u = read_matrix("u");
        inst.v = read_matrix("v");
        if (inl.contains("state_names"))
            inst.state_names = inl.at("state_names").get<std::vector<std::string>>();
        if (inl.contains("action_names"))
            inst.action_names = inl.at("action_names").get<std::vector<std::string>>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("instance: ") + e.what());
    }
    validate_instance(inst);
    return inst;
}

inline std::unique_ptr<Learner> make_learner(const LearnerSpec& spec, const Instance& inst,
                                             const ExperimentConfig& cfg) {
    const json& p = spec.params;
    if (spec.name == "oracle") return std::make_unique<OracleLearner>(inst);
    if (spec.name == "never_inform")
        return std::make_unique<NeverInformLearner>(inst.state_count, inst.action_count);
    if (spec.name == "alg3") {
        LearnRobustifyOptions opts;
        opts.eps_exponent = p.value("eps_exponent", cfg.eps_exponent);
        opts.exact_ball_check = cfg.exact_ball_check;
        return std::make_unique<LearnThenRobustifyLearner>(inst.u, inst.v, inst.p0,
                                                           cfg.horizon, opts);
    }
    if (spec.name == "alg5")
        return std::make_unique<StrengthSearchLearner>(inst.u, inst.v, cfg.horizon);
    if (spec.name == "baseline_empirical") {
        BaselineOptions opts;
        opts.recompute_every = p.value("recompute_every", std::size_t{1});
        opts.exact_ball_check = cfg.exact_ball_check;
        return std::make_unique<BaselineEmpiricalLearner>(inst.u, inst.v, inst.p0,
                                                          cfg.horizon, opts);
    }
    if (spec.name == "alg1" || spec.name == "alg2") {
        Margins m = compute_margins(inst.u, inst.v, inst.p0);
        auto pair = std::make_pair(p.value("first", std::size_t{0}),
                                   p.value("second", std::size_t{1}));
        double accuracy = p.value("accuracy", 0.05);
        if (spec.name == "alg1")
            return std::make_unique<RatioSearchLearner>(inst.v, inst.p0, pair, accuracy,
                                                        m.G);
        return std::make_unique<AnyPairRatioLearner>(inst.v, inst.p0, pair, accuracy, m);
    }
    throw ConfigError("unknown learner '" + spec.name + "'");
}

struct EpisodeResult {
    std::string learner;
    std::uint64_t seed = 0;
    std::vector<double> instant, cumulative;
};

struct ExperimentOutput {
    std::vector<EpisodeResult> episodes;  // learner-major, then seed order
    struct SummaryRow {
        std::string learner;
        std::size_t horizon;
        double mean = 0.0, stddev = 0.0;
        std::optional<double> bound;
    };
    std::vector<SummaryRow> summary;
};

// Closed-form ceiling for the summary, where one applies.
inline std::optional<double> summary_bound(const std::string& learner, const Instance& inst,
                                           std::size_t T) {
    try {
        if (learner == "alg3") {
            Margins m = compute_margins(inst.u, inst.v, inst.p0);
            return ratio_learning_regret_bound(inst.state_count, inst.p0, m.G, m.D, T);
        }
        if (learner == "alg5")
            return strength_search_regret_bound(inst.state_count, inst.p0, T);
    } catch (const Error&) {
        return std::nullopt;
    }
    return std::nullopt;
}

inline ExperimentOutput run_experiment(const ExperimentConfig& cfg, std::size_t threads) {
    Instance inst = build_instance(cfg.instance_spec);
    // surface assumption problems on the main thread before fanning out
    for (const auto& ls : cfg.learners) {
        auto probe = make_learner(ls, inst, cfg);
        if (probe->state_observing() && !cfg.state_observing)
            throw ConfigError("learner '" + ls.name +
                              "' needs flags.state_observing = true");
    }

    SimOptions opts;
    opts.tie = cfg.tie;
    opts.reveal_states = cfg.state_observing;

    struct Task {
        std::size_t learner_idx, seed_idx;
    };
    std::vector<Task> tasks;
    for (std::size_t li = 0; li < cfg.learners.size(); ++li)
        for (std::size_t si = 0; si < cfg.seeds.size(); ++si) tasks.push_back({li, si});

    ExperimentOutput out;
    out.episodes.resize(tasks.size());
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::string error_message;
    std::mutex error_mutex;

    auto worker = [&]() {
        for (;;) {
            std::size_t k = next.fetch_add(1);
            if (k >= tasks.size() || failed.load()) return;
            const Task& task = tasks[k];
            try {
                auto learner = make_learner(cfg.learners[task.learner_idx], inst, cfg);
                EpisodeTrace trace = run_episode(inst, *learner, cfg.horizon,
                                                 cfg.seeds[task.seed_idx], opts);
                EpisodeResult res;
                res.learner = cfg.learners[task.learner_idx].name;
                res.seed = cfg.seeds[task.seed_idx];
                res.instant.reserve(trace.records.size());
                for (const auto& r : trace.records) res.instant.push_back(r.instant_regret);
                res.cumulative = std::move(trace.cumulative);
                out.episodes[k] = std::move(res);
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(error_mutex);
                error_message = e.what();
                failed.store(true);
                return;
            }
        }
    };

    threads = std::max<std::size_t>(1, threads);
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (failed.load()) throw Error("episode failed: " + error_message);

    for (std::size_t li = 0; li < cfg.learners.size(); ++li) {
        double mean = 0.0;
        std::vector<double> finals;
        for (std::size_t si = 0; si < cfg.seeds.size(); ++si) {
            const auto& ep = out.episodes[li * cfg.seeds.size() + si];
            finals.push_back(ep.cumulative.back());
            mean += ep.cumulative.back();
        }
        mean /= double(finals.size());
        double var = 0.0;
        for (double f : finals) var += (f - mean) * (f - mean);
        var /= double(finals.size());  // population variance over seeds
        ExperimentOutput::SummaryRow row;
        row.learner = cfg.learners[li].name;
        row.horizon = cfg.horizon;
        row.mean = mean;
        row.stddev = std::sqrt(var);
        row.bound = summary_bound(row.learner, inst, cfg.horizon);
        out.summary.push_back(std::move(row));
    }
    return out;
}

namespace detail {

inline void format_double(std::string& buf, double x) {
    char tmp[64];
    std::snprintf(tmp, sizeof(tmp), "%.17g", x);
    buf += tmp;
}

}  // namespace detail

inline void write_results_csv(const std::filesystem::path& path,
                              const ExperimentOutput& out) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open " + path.string() + " for writing");
    std::string buf;
    buf.reserve(1 << 20);
    buf += kResultsHeader;
    buf += '\n';
    for (const auto& ep : out.episodes) {
        for (std::size_t t = 0; t < ep.instant.size(); ++t) {
            buf += ep.learner;
            buf += ',';
            buf += std::to_string(ep.seed);
            buf += ',';
            buf += std::to_string(t + 1);
            buf += ',';
            detail::format_double(buf, ep.instant[t]);
            buf += ',';
            detail::format_double(buf, ep.cumulative[t]);
            buf += '\n';
            if (buf.size() > (1 << 20)) {
                f.write(buf.data(), std::streamsize(buf.size()));
                buf.clear();
            }
        }
    }
    f.write(buf.data(), std::streamsize(buf.size()));
}

inline void write_summary_csv(const std::filesystem::path& path,
                              const ExperimentOutput& out) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open " + path.string() + " for writing");
    std::string buf;
    buf += kSummaryHeader;
    buf += '\n';
    for (const auto& row : out.summary) {
        buf += row.learner;
        buf += ',';
        buf += std::to_string(row.horizon);
        buf += ',';
        detail::format_double(buf, row.mean);
        buf += ',';
        detail::format_double(buf, row.stddev);
        buf += ',';
        if (row.bound) detail::format_double(buf, *row.bound);
        buf += '\n';
    }
    f.write(buf.data(), std::streamsize(buf.size()));
}

}  // namespace persuade::exp
