#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "persuade/errors.hpp"
#include "persuade/experiment.hpp"

// Self-contained SVG plots of cumulative-regret curves: mean over seeds with
// a +/- one-standard-deviation band per learner, on linear, log, or
// log-of-log time axes. No external assets, deterministic output.

namespace persuade::plot {

enum class AxesMode { linear, logx, loglogx };

inline AxesMode axes_mode_from_string(const std::string& s) {
    if (s == "linear") return AxesMode::linear;
    if (s == "logx") return AxesMode::logx;
    if (s == "loglogx") return AxesMode::loglogx;
    throw ConfigError("unknown axes mode: " + s);
}

struct Series {
    std::string name;
    std::vector<double> t;       // period
    std::vector<double> mean;    // mean cumulative regret across seeds
    std::vector<double> stddev;  // population std across seeds
};

// Parses a results CSV (exact schema) into per-learner mean/std curves.
// Learners appear in first-occurrence order; every (learner, seed) episode
// must cover the same period range.
inline std::vector<Series> summarize_results_csv(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot open results file " + path.string());
    std::string line;
    if (!std::getline(f, line)) throw ConfigError("results file is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != exp::kResultsHeader)
        throw ConfigError("results file schema mismatch: bad header");

    struct Accum {
        std::vector<double> sum, sumsq;
        std::size_t seen_rows = 0;
        std::size_t seeds = 0;
        std::size_t current_len = 0;
    };
    std::vector<std::string> order;
    std::map<std::string, Accum> acc;

    std::size_t line_no = 1;
    while (std::getline(f, line)) {
        ++line_no;
        if (line.empty()) continue;
        if (line.back() == '\r') line.pop_back();
        std::array<std::string, 5> fields;
        std::size_t field = 0, start = 0;
        for (std::size_t i = 0; i <= line.size(); ++i) {
            if (i == line.size() || line[i] == ',') {
                if (field >= 5)
                    throw ConfigError("results file schema mismatch at line " +
                                      std::to_string(line_no));
                fields[field++] = line.substr(start, i - start);
                start = i + 1;
            }
        }
        if (field != 5)
            throw ConfigError("results file schema mismatch at line " +
                              std::to_string(line_no));
        const std::string& name = fields[0];
        std::size_t t = std::strtoull(fields[2].c_str(), nullptr, 10);
        double cum = std::strtod(fields[4].c_str(), nullptr);
        auto it = acc.find(name);
        if (it == acc.end()) {
            order.push_back(name);
            it = acc.emplace(name, Accum{}).first;
        }
        Accum& a = it->second;
        if (t == 1) {
            ++a.seeds;
            a.current_len = 0;
        }
        ++a.current_len;
        if (t != a.current_len)
            throw ConfigError("results file has non-contiguous periods at line " +
                              std::to_string(line_no));
        if (a.sum.size() < t) {
            a.sum.resize(t, 0.0);
            a.sumsq.resize(t, 0.0);
        }
        a.sum[t - 1] += cum;
        a.sumsq[t - 1] += cum * cum;
        ++a.seen_rows;
    }

    std::vector<Series> out;
    for (const auto& name : order) {
        const Accum& a = acc.at(name);
        if (a.seeds == 0 || a.sum.empty())
            throw ConfigError("results file has no rows for learner " + name);
        if (a.seen_rows != a.seeds * a.sum.size())
            throw ConfigError("results file rows are ragged for learner " + name);
        Series s;
        s.name = name;
        for (std::size_t t = 0; t < a.sum.size(); ++t) {
            double mean = a.sum[t] / double(a.seeds);
            double var = a.sumsq[t] / double(a.seeds) - mean * mean;
            s.t.push_back(double(t + 1));
            s.mean.push_back(mean);
            s.stddev.push_back(std::sqrt(std::max(var, 0.0)));
        }
        out.push_back(std::move(s));
    }
    return out;
}

namespace detail {

inline double axis_x(AxesMode mode, double t) {
    switch (mode) {
        case AxesMode::linear: return t;
        case AxesMode::logx: return std::log2(std::max(t, 1.0));
        case AxesMode::loglogx: return std::log2(std::log2(std::max(t, 2.0)));
    }
    return t;
}

inline std::string fmt(double x) {
    char tmp[48];
    std::snprintf(tmp, sizeof(tmp), "%.6g", x);
    return tmp;
}

inline const char* palette(std::size_t i) {
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                   "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
    return colors[i % 8];
}

}  // namespace detail

// Optional dashed reference level per learner (e.g. a closed-form ceiling).
using BoundLines = std::map<std::string, double>;

inline void write_svg_plot(const std::filesystem::path& path,
                           const std::vector<Series>& series, AxesMode mode,
                           const BoundLines& bounds = {},
                           const std::string& title = "cumulative regret") {
    if (series.empty()) throw ConfigError("nothing to plot");
    const double width = 960, height = 600;
    const double ml = 80, mr = 24, mt = 48, mb = 56;

    double xmin = 1e300, xmax = -1e300, ymin = 0.0, ymax = -1e300;
    for (const auto& s : series) {
        for (std::size_t i = 0; i < s.t.size(); ++i) {
            double x = detail::axis_x(mode, s.t[i]);
            xmin = std::min(xmin, x);
            xmax = std::max(xmax, x);
            ymax = std::max(ymax, s.mean[i] + s.stddev[i]);
            ymin = std::min(ymin, s.mean[i] - s.stddev[i]);
        }
    }
    for (const auto& [name, level] : bounds) ymax = std::max(ymax, level);
    if (xmax <= xmin) xmax = xmin + 1.0;
    if (ymax <= ymin) ymax = ymin + 1.0;
    double yspan = ymax - ymin;
    ymax += 0.05 * yspan;
    ymin -= 0.05 * yspan;

    auto px = [&](double x) {
        return ml + (x - xmin) / (xmax - xmin) * (width - ml - mr);
    };
    auto py = [&](double y) {
        return height - mb - (y - ymin) / (ymax - ymin) * (height - mt - mb);
    };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
        << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << " " << height
        << "\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"16\">" << title << "</text>\n";

    // axes + ticks
    svg << "<line x1=\"" << ml << "\" y1=\"" << height - mb << "\" x2=\"" << width - mr
        << "\" y2=\"" << height - mb << "\" stroke=\"black\"/>\n";
    svg << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\""
        << height - mb << "\" stroke=\"black\"/>\n";
    const int ticks = 6;
    for (int k = 0; k <= ticks; ++k) {
        double fx = xmin + (xmax - xmin) * double(k) / ticks;
        double fy = ymin + (ymax - ymin) * double(k) / ticks;
        svg << "<line x1=\"" << detail::fmt(px(fx)) << "\" y1=\"" << height - mb
            << "\" x2=\"" << detail::fmt(px(fx)) << "\" y2=\"" << height - mb + 5
            << "\" stroke=\"black\"/>\n";
        svg << "<text x=\"" << detail::fmt(px(fx)) << "\" y=\"" << height - mb + 20
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
            << detail::fmt(fx) << "</text>\n";
        svg << "<line x1=\"" << ml - 5 << "\" y1=\"" << detail::fmt(py(fy)) << "\" x2=\""
            << ml << "\" y2=\"" << detail::fmt(py(fy)) << "\" stroke=\"black\"/>\n";
        svg << "<text x=\"" << ml - 9 << "\" y=\"" << detail::fmt(py(fy) + 4)
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
            << detail::fmt(fy) << "</text>\n";
    }
    const char* xlabel = mode == AxesMode::linear  ? "t"
                         : mode == AxesMode::logx ? "log2 t"
                                                  : "log2 log2 t";
    svg << "<text x=\"" << (ml + width - mr) / 2 << "\" y=\"" << height - 12
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
        << xlabel << "</text>\n";
    svg << "<text x=\"18\" y=\"" << (mt + height - mb) / 2
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
        << "transform=\"rotate(-90 18 " << (mt + height - mb) / 2 << ")\">"
        << "cumulative regret</text>\n";

    // subsample long curves for rendering
    auto indices = [&](const Series& s) {
        std::vector<std::size_t> idx;
        const std::size_t cap = 1200;
        std::size_t n = s.t.size();
        if (n <= cap) {
            for (std::size_t i = 0; i < n; ++i) idx.push_back(i);
        } else {
            double stride = double(n - 1) / double(cap - 1);
            for (std::size_t k = 0; k < cap; ++k)
                idx.push_back(std::size_t(std::llround(double(k) * stride)));
        }
        return idx;
    };

    for (std::size_t si = 0; si < series.size(); ++si) {
        const Series& s = series[si];
        auto idx = indices(s);
        const char* color = detail::palette(si);
        // band
        svg << "<path fill=\"" << color << "\" fill-opacity=\"0.15\" stroke=\"none\" d=\"M";
        for (std::size_t k = 0; k < idx.size(); ++k) {
            std::size_t i = idx[k];
            svg << detail::fmt(px(detail::axis_x(mode, s.t[i]))) << ","
                << detail::fmt(py(s.mean[i] + s.stddev[i])) << " ";
        }
        for (std::size_t k = idx.size(); k-- > 0;) {
            std::size_t i = idx[k];
            svg << "L" << detail::fmt(px(detail::axis_x(mode, s.t[i]))) << ","
                << detail::fmt(py(s.mean[i] - s.stddev[i])) << " ";
        }
        svg << "Z\"/>\n";
        // mean line
        svg << "<polyline fill=\"none\" stroke=\"" << color
            << "\" stroke-width=\"1.8\" points=\"";
        for (std::size_t k = 0; k < idx.size(); ++k) {
            std::size_t i = idx[k];
            svg << detail::fmt(px(detail::axis_x(mode, s.t[i]))) << ","
                << detail::fmt(py(s.mean[i])) << " ";
        }
        svg << "\"/>\n";
        // legend
        double ly = mt + 18.0 * double(si);
        svg << "<line x1=\"" << ml + 12 << "\" y1=\"" << ly << "\" x2=\"" << ml + 40
            << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        svg << "<text x=\"" << ml + 46 << "\" y=\"" << ly + 4
            << "\" font-family=\"sans-serif\" font-size=\"12\">" << s.name << "</text>\n";
        auto bit = bounds.find(s.name);
        if (bit != bounds.end()) {
            svg << "<line x1=\"" << ml << "\" y1=\"" << detail::fmt(py(bit->second))
                << "\" x2=\"" << width - mr << "\" y2=\"" << detail::fmt(py(bit->second))
                << "\" stroke=\"" << color
                << "\" stroke-width=\"1\" stroke-dasharray=\"6,4\"/>\n";
            svg << "<text x=\"" << width - mr - 4 << "\" y=\""
                << detail::fmt(py(bit->second) - 4)
                << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">"
                << s.name << " ceiling</text>\n";
        }
    }
    svg << "</svg>\n";

    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open " + path.string() + " for writing");
    const std::string body = svg.str();
    f.write(body.data(), std::streamsize(body.size()));
}

}  // namespace persuade::plot
