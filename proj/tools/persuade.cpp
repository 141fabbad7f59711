// Command-line front end: run seeded experiment sweeps to CSV, report optimal
// schemes and margin constants for an instance, and render regret plots.
//
// Exit codes: 0 ok, 2 config/schema error, 3 model-assumption violation.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "persuade/experiment.hpp"
#include "persuade/optimal.hpp"
#include "persuade/svg_plot.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace persuade;

namespace {

json load_json(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot open " + path);
    try {
        return json::parse(f);
    } catch (const json::parse_error& e) {
        // turn the byte offset into a line number for the diagnostic
        std::ifstream g(path, std::ios::binary);
        std::string text((std::istreambuf_iterator<char>(g)),
                         std::istreambuf_iterator<char>());
        std::size_t line = 1;
        for (std::size_t i = 0; i < std::min<std::size_t>(e.byte, text.size()); ++i)
            if (text[i] == '\n') ++line;
        throw ConfigError(path + ":" + std::to_string(line) + ": " + e.what());
    }
}

int cmd_run(const std::string& config_path, const std::string& out_dir,
            std::size_t threads) {
    json j = load_json(config_path);
    exp::ExperimentConfig cfg = exp::ExperimentConfig::parse(j);
    exp::ExperimentOutput out = exp::run_experiment(cfg, threads);
    fs::create_directories(out_dir);
    exp::write_results_csv(fs::path(out_dir) / "results.csv", out);
    exp::write_summary_csv(fs::path(out_dir) / "summary.csv", out);
    std::cout << "wrote " << (fs::path(out_dir) / "results.csv").string() << " and "
              << (fs::path(out_dir) / "summary.csv").string() << "\n";
    return 0;
}

int cmd_optimal(const std::string& instance_path) {
    json j = load_json(instance_path);
    Instance inst = exp::build_instance(j);
    Margins m = compute_margins(inst.u, inst.v, inst.p0);

    auto name_of = [&](const std::vector<std::string>& names, std::size_t i,
                       const char* prefix) {
        if (i < names.size()) return names[i];
        return std::string(prefix) + std::to_string(i);
    };

    auto [pi, value] = optimal_scheme_general(inst.prior, inst.u, inst.v);
    std::printf("states: %zu  actions: %zu  p0: %.17g\n", inst.state_count,
                inst.action_count, inst.p0);
    std::printf("margins: G = %.17g  D = %.17g\n", m.G, m.D);
    if (m.distinguishable_pair)
        std::printf("distinguishable pair: (%s, %s)\n",
                    name_of(inst.state_names, m.distinguishable_pair->first, "state").c_str(),
                    name_of(inst.state_names, m.distinguishable_pair->second, "state").c_str());
    std::printf("optimal utility (linear program): %.17g\n", value);
    std::printf("optimal direct scheme pi(action|state):\n");
    for (std::size_t w = 0; w < inst.state_count; ++w) {
        std::printf("  %-10s", name_of(inst.state_names, w, "state").c_str());
        for (std::size_t a = 0; a < inst.action_count; ++a)
            std::printf(" %.6f", pi(w, a));
        std::printf("\n");
    }
    if (inst.action_count == 2) {
        bool sender_pref = true;
        for (std::size_t w = 0; w < inst.state_count && sender_pref; ++w)
            sender_pref = inst.u(1, w) > inst.u(0, w);
        double lean0 = 0.0;
        for (std::size_t w = 0; w < inst.state_count; ++w)
            lean0 += inst.prior[w] * (inst.v(0, w) - inst.v(1, w));
        if (sender_pref && lean0 > 0.0) {
            BinaryOptimum opt = optimal_scheme_binary(inst.prior, inst.u, inst.v);
            std::printf("greedy route: M* = %.17g  threshold position = %zu  value = %.17g\n",
                        opt.m_star, opt.threshold_state, opt.value);
            std::printf("  pi*(1|state):");
            for (std::size_t w = 0; w < inst.state_count; ++w)
                std::printf(" %.6f", opt.scheme(w, 1));
            std::printf("\n");
        }
    }
    return 0;
}

int cmd_plot(const std::string& in_csv, const std::string& out_svg,
             const std::string& axes, const std::string& summary_csv) {
    auto series = plot::summarize_results_csv(in_csv);
    plot::BoundLines bounds;
    if (!summary_csv.empty()) {
        std::ifstream f(summary_csv, std::ios::binary);
        if (!f) throw ConfigError("cannot open summary file " + summary_csv);
        std::string line;
        if (!std::getline(f, line)) throw ConfigError("summary file is empty");
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line != exp::kSummaryHeader)
            throw ConfigError("summary file schema mismatch: bad header");
        while (std::getline(f, line)) {
            if (line.empty()) continue;
            std::vector<std::string> fields;
            std::size_t start = 0;
            for (std::size_t i = 0; i <= line.size(); ++i)
                if (i == line.size() || line[i] == ',') {
                    fields.push_back(line.substr(start, i - start));
                    start = i + 1;
                }
            if (fields.size() != 5)
                throw ConfigError("summary file schema mismatch");
            if (!fields[4].empty())
                bounds[fields[0]] = std::strtod(fields[4].c_str(), nullptr);
        }
    }
    plot::write_svg_plot(out_svg, series, plot::axes_mode_from_string(axes), bounds);
    std::cout << "wrote " << out_svg << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"persuasion experiments: optimal signaling, prior learning, regret sweeps"};
    app.require_subcommand(1);

    std::string config_path, out_dir = "out";
    std::size_t threads = 1;
    auto* run = app.add_subcommand("run", "run a seeded experiment sweep to CSV");
    run->add_option("--config", config_path, "experiment config (JSON)")->required();
    run->add_option("--out", out_dir, "output directory");
    run->add_option("--threads", threads, "worker threads");

    std::string instance_path;
    auto* optimal = app.add_subcommand("optimal", "report the optimal scheme and margins");
    optimal->add_option("--instance", instance_path, "instance file (JSON)")->required();

    std::string in_csv, out_svg, axes = "linear", summary_csv;
    auto* plot_cmd = app.add_subcommand("plot", "render regret curves to SVG");
    plot_cmd->add_option("--in", in_csv, "results CSV")->required();
    plot_cmd->add_option("--out", out_svg, "output SVG path")->required();
    plot_cmd->add_option("--axes", axes, "axes mode: linear | logx | loglogx");
    plot_cmd->add_option("--summary", summary_csv,
                         "summary CSV; overlays closed-form ceilings");

    try {
        app.parse(argc, argv);
        if (run->parsed()) return cmd_run(config_path, out_dir, threads);
        if (optimal->parsed()) return cmd_optimal(instance_path);
        if (plot_cmd->parsed()) return cmd_plot(in_csv, out_svg, axes, summary_csv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const AssumptionViolation& e) {
        std::cerr << "assumption violation (" << e.assumption() << "): " << e.what()
                  << "\n";
        return 3;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
