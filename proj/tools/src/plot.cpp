#include "cfgrid/cli/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fmt/format.h>
#include <fstream>
#include <limits>
#include <map>

#include "cfgrid/error.hpp"

namespace cfgrid::cli {

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

double parse(const std::string& s) {
    if (s.empty()) return std::numeric_limits<double>::quiet_NaN();
    char* end = nullptr;
    double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str()) return std::numeric_limits<double>::quiet_NaN();
    return v;
}

bool numeric(const std::string& s) {
    char* end = nullptr;
    std::strtod(s.c_str(), &end);
    return !s.empty() && end != s.c_str() && *end == '\0';
}

std::string escape(const std::string& s) {
    std::string out;
    for (char ch : s) {
        switch (ch) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += ch;
        }
    }
    return out;
}

double nice_step(double range, int target) {
    const double raw = range / target;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    const double f = raw / mag;
    double nice = 10.0;
    if (f <= 1.0) nice = 1.0;
    else if (f <= 2.0) nice = 2.0;
    else if (f <= 5.0) nice = 5.0;
    return nice * mag;
}

std::string tick_label(double v, double step) {
    if (std::abs(v) < step * 1e-9) v = 0.0;
    return fmt::format("{:.6g}", v);
}

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    void add(double v) {
        if (!std::isfinite(v)) return;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    void settle() {
        if (!std::isfinite(lo)) lo = 0.0, hi = 1.0;
        if (hi - lo <= 1e-300) {
            const double pad = std::abs(lo) > 0.0 ? 0.5 * std::abs(lo) : 0.5;
            lo -= pad;
            hi += pad;
        }
    }
};

// Keeps the first/min/max/last point of every pixel column so long
// trajectories stay small without losing their envelope.
std::vector<std::pair<double, double>> decimate(const std::vector<std::pair<double, double>>& pts, double x0,
                                                double x1, int pixels) {
    if (pts.size() <= static_cast<std::size_t>(4 * pixels)) return pts;
    std::vector<std::pair<double, double>> out;
    std::size_t i = 0;
    while (i < pts.size()) {
        const long bucket = std::lround((pts[i].first - x0) / (x1 - x0) * pixels);
        std::size_t j = i, imin = i, imax = i;
        while (j < pts.size() && std::lround((pts[j].first - x0) / (x1 - x0) * pixels) == bucket) {
            if (pts[j].second < pts[imin].second) imin = j;
            if (pts[j].second > pts[imax].second) imax = j;
            ++j;
        }
        std::vector<std::size_t> keep{i, imin, imax, j - 1};
        std::sort(keep.begin(), keep.end());
        keep.erase(std::unique(keep.begin(), keep.end()), keep.end());
        for (std::size_t k : keep) out.push_back(pts[k]);
        i = j;
    }
    return out;
}

}  // namespace

std::vector<Series> select_series(const PlotSpec& spec, const CsvTable& table) {
    const std::size_t xi = table.index(spec.x);
    std::vector<std::pair<std::size_t, std::string>> filters;
    for (const auto& [col, val] : spec.where) filters.emplace_back(table.index(col), val);
    const std::size_t none = std::numeric_limits<std::size_t>::max();
    const std::size_t group = spec.series_by.empty() ? none : table.index(spec.series_by);

    std::vector<const std::vector<std::string>*> rows;
    for (const auto& r : table.rows) {
        bool ok = true;
        for (const auto& [c, v] : filters) ok = ok && r[c] == v;
        if (ok) rows.push_back(&r);
    }
    std::vector<std::size_t> ys;
    for (const auto& name : spec.columns) ys.push_back(table.index(name));
    if (rows.empty()) fail(ErrorKind::EmptyData, "no data rows to plot");

    if (spec.columns.empty()) {
        for (std::size_t c = 0; c < table.header.size(); ++c) {
            if (c == xi || c == group) continue;
            bool skip = false;
            for (const auto& f : filters) skip = skip || f.first == c;
            if (!skip && numeric((*rows.front())[c])) ys.push_back(c);
        }
        if (ys.empty()) fail(ErrorKind::ColumnNotFound, "no numeric columns to plot");
    }

    std::vector<Series> out;
    for (std::size_t yc : ys) {
        if (group == none) {
            Series s;
            s.label = table.header[yc];
            for (const auto* r : rows) {
                s.x.push_back(parse((*r)[xi]));
                s.y.push_back(parse((*r)[yc]));
            }
            out.push_back(std::move(s));
            continue;
        }
        std::map<std::string, std::size_t> slot;
        for (const auto* r : rows) {
            const std::string& key = (*r)[group];
            auto it = slot.find(key);
            if (it == slot.end()) {
                it = slot.emplace(key, out.size()).first;
                Series s;
                s.label = ys.size() > 1 ? key + ":" + table.header[yc] : key;
                out.push_back(std::move(s));
            }
            out[it->second].x.push_back(parse((*r)[xi]));
            out[it->second].y.push_back(parse((*r)[yc]));
        }
    }
    return out;
}

std::string render_svg(const PlotSpec& spec, const std::vector<Series>& series) {
    const int W = spec.width, H = spec.height;
    const int left = 80, right = 170, top = 44, bottom = 56;
    const int pw = W - left - right, ph = H - top - bottom;

    Range xr, yr;
    for (const auto& s : series) {
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            xr.add(s.x[i]);
            yr.add(s.y[i]);
        }
    }
    xr.settle();
    yr.settle();
    const double ystep = nice_step(yr.hi - yr.lo, 6);
    yr.lo = std::floor(yr.lo / ystep) * ystep;
    yr.hi = std::ceil(yr.hi / ystep) * ystep;
    const double xstep = nice_step(xr.hi - xr.lo, 8);

    auto px = [&](double x) { return left + (x - xr.lo) / (xr.hi - xr.lo) * pw; };
    auto py = [&](double y) { return top + (yr.hi - y) / (yr.hi - yr.lo) * ph; };

    std::string s;
    s += fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\" "
        "font-family=\"sans-serif\" font-size=\"12\">\n",
        W, H, W, H);
    s += fmt::format("<rect x=\"0\" y=\"0\" width=\"{}\" height=\"{}\" fill=\"white\"/>\n", W, H);
    if (!spec.title.empty())
        s += fmt::format("<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">{}</text>\n",
                         left + pw / 2, escape(spec.title));

    // grid and ticks
    s += "<g stroke=\"#dddddd\" stroke-width=\"1\">\n";
    const long ny = std::lround((yr.hi - yr.lo) / ystep);
    for (long k = 0; k <= ny; ++k) {
        const double y = py(yr.lo + k * ystep);
        s += fmt::format("<line x1=\"{}\" y1=\"{:.2f}\" x2=\"{}\" y2=\"{:.2f}\"/>\n", left, y, left + pw, y);
    }
    const double x_first = std::ceil(xr.lo / xstep) * xstep;
    for (double x = x_first; x <= xr.hi + 1e-9 * xstep; x += xstep)
        s += fmt::format("<line x1=\"{:.2f}\" y1=\"{}\" x2=\"{:.2f}\" y2=\"{}\"/>\n", px(x), top, px(x), top + ph);
    s += "</g>\n";
    s += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n", left,
                     top, pw, ph);
    for (long k = 0; k <= ny; ++k) {
        const double v = yr.lo + k * ystep;
        s += fmt::format("<text x=\"{}\" y=\"{:.2f}\" text-anchor=\"end\">{}</text>\n", left - 6, py(v) + 4,
                         tick_label(v, ystep));
    }
    for (double x = x_first; x <= xr.hi + 1e-9 * xstep; x += xstep)
        s += fmt::format("<text x=\"{:.2f}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", px(x), top + ph + 18,
                         tick_label(x, xstep));
    const std::string xlabel = spec.xlabel.empty() ? spec.x : spec.xlabel;
    s += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", left + pw / 2, H - 12,
                     escape(xlabel));
    if (!spec.ylabel.empty())
        s += fmt::format("<text x=\"18\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {})\">{}</text>\n",
                         top + ph / 2, top + ph / 2, escape(spec.ylabel));

    // series
    for (std::size_t i = 0; i < series.size(); ++i) {
        const char* color = kPalette[i % std::size(kPalette)];
        std::vector<std::pair<double, double>> run;
        auto flush = [&] {
            if (run.size() >= 2) {
                s += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.3\" points=\"", color);
                bool first = true;
                for (const auto& [x, y] : decimate(run, xr.lo, xr.hi, pw)) {
                    s += fmt::format("{}{:.2f},{:.2f}", first ? "" : " ", px(x), py(y));
                    first = false;
                }
                s += "\"/>\n";
            } else if (run.size() == 1) {
                s += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"1.5\" fill=\"{}\"/>\n", px(run[0].first),
                                 py(run[0].second), color);
            }
            run.clear();
        };
        const auto& sr = series[i];
        for (std::size_t k = 0; k < sr.x.size(); ++k) {
            if (std::isfinite(sr.x[k]) && std::isfinite(sr.y[k])) run.emplace_back(sr.x[k], sr.y[k]);
            else flush();
        }
        flush();
        const int ly = top + 12 + static_cast<int>(i) * 18;
        s += fmt::format("<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{}\" stroke-width=\"2\"/>\n",
                         left + pw + 12, ly, left + pw + 36, ly, color);
        s += fmt::format("<text x=\"{}\" y=\"{}\">{}</text>\n", left + pw + 42, ly + 4, escape(sr.label));
    }
    s += "</svg>\n";
    return s;
}

void render_plot(const PlotSpec& spec) {
    const CsvTable table = read_csv_table(spec.input);
    const auto series = select_series(spec, table);
    const std::string svg = render_svg(spec, series);
    std::ofstream out(spec.output, std::ios::binary);
    if (!out) fail(ErrorKind::IoError, "cannot write " + spec.output.string());
    out << svg;
    if (!out) fail(ErrorKind::IoError, "write failed: " + spec.output.string());
}

}  // namespace cfgrid::cli
