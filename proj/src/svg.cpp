#include "qdeloc/svg.hpp"
#include "qdeloc/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

namespace qdeloc::harness {

namespace {

std::string escape(const std::string &s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

/// 1, 2 or 5 times a power of ten, giving about n intervals.
double nice_step(double span, int n) {
    const double raw = span / n;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    const double f = raw / mag;
    return (f < 1.5 ? 1.0 : f < 3.5 ? 2.0 : f < 7.5 ? 5.0 : 10.0) * mag;
}

std::string tick_label(double v) {
    if (v == 0.0) return "0";
    return fmt::format("{:.4g}", v);
}

} // namespace

std::string palette(std::size_t i) {
    static const char *colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                                   "#8c564b", "#e377c2", "#17becf", "#7f7f7f", "#bcbd22"};
    return colors[i % (sizeof(colors) / sizeof(colors[0]))];
}

std::string render_svg(const Plot &plot) {
    const double W = plot.width, H = plot.height;
    const double ml = 70, mr = 230, mt = 36, mb = 52;
    const double pw = W - ml - mr, ph = H - mt - mb;

    auto ok = [&](double x, double y) { return std::isfinite(x) && std::isfinite(y) && (!plot.log_y || y > 0); };
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const auto &s : plot.series)
        for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
            if (!ok(s.x[i], s.y[i])) continue;
            const double y = plot.log_y ? std::log10(s.y[i]) : s.y[i];
            x0 = std::min(x0, s.x[i]);
            x1 = std::max(x1, s.x[i]);
            y0 = std::min(y0, y);
            y1 = std::max(y1, y);
        }
    if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    if (x1 == x0) x0 -= 0.5, x1 += 0.5;
    if (y1 == y0) y0 -= 0.5, y1 += 0.5;
    if (plot.log_y) {
        y0 = std::floor(y0);
        y1 = std::ceil(y1);
    } else {
        const double pad = 0.05 * (y1 - y0);
        y0 -= pad;
        y1 += pad;
    }
    auto px = [&](double x) { return ml + (x - x0) / (x1 - x0) * pw; };
    auto py = [&](double y) { return mt + (1.0 - ((plot.log_y ? std::log10(y) : y) - y0) / (y1 - y0)) * ph; };
    auto py_raw = [&](double yl) { return mt + (1.0 - (yl - y0) / (y1 - y0)) * ph; };

    std::string s = fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\" "
        "font-family=\"sans-serif\" font-size=\"12\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n",
        plot.width, plot.height);
    s += fmt::format("<text x=\"{}\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n", ml + pw / 2,
                     escape(plot.title));
    s += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n", ml, mt,
                     pw, ph);

    const double xs = nice_step(x1 - x0, 6);
    for (double v = std::ceil(x0 / xs) * xs; v <= x1 + 1e-9 * xs; v += xs) {
        const double X = px(v);
        s += fmt::format("<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{0:.2f}\" y2=\"{2:.2f}\" stroke=\"black\"/>\n", X,
                         mt + ph, mt + ph + 5);
        s += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"middle\">{}</text>\n", X, mt + ph + 18,
                         tick_label(v));
    }
    if (plot.log_y) {
        const int decades = static_cast<int>(y1 - y0);
        const int every = std::max(1, decades / 8);
        for (int e = static_cast<int>(y0); e <= static_cast<int>(y1); e += every) {
            const double Y = py_raw(e);
            s += fmt::format("<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{2:.2f}\" y2=\"{1:.2f}\" stroke=\"black\"/>\n",
                             ml - 5, Y, ml);
            s += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"end\">1e{}</text>\n", ml - 8, Y + 4, e);
        }
    } else {
        const double ys = nice_step(y1 - y0, 6);
        for (double v = std::ceil(y0 / ys) * ys; v <= y1 + 1e-9 * ys; v += ys) {
            const double Y = py_raw(v);
            s += fmt::format("<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{2:.2f}\" y2=\"{1:.2f}\" stroke=\"black\"/>\n",
                             ml - 5, Y, ml);
            s += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"end\">{}</text>\n", ml - 8, Y + 4,
                             tick_label(std::abs(v) < 1e-12 * ys ? 0.0 : v));
        }
    }
    s += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"middle\">{}</text>\n", ml + pw / 2, H - 12,
                     escape(plot.xlabel));
    s += fmt::format("<text x=\"16\" y=\"{0:.2f}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {0:.2f})\">{1}</text>\n",
                     mt + ph / 2, escape(plot.ylabel));

    for (std::size_t k = 0; k < plot.series.size(); ++k) {
        const auto &ser = plot.series[k];
        const auto n = std::min(ser.x.size(), ser.y.size());
        if (ser.line) {
            std::string pts;
            for (std::size_t i = 0; i < n; ++i)
                if (ok(ser.x[i], ser.y[i])) pts += fmt::format("{:.2f},{:.2f} ", px(ser.x[i]), py(ser.y[i]));
            s += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"{} points=\"{}\"/>\n",
                             ser.color, ser.dashed ? " stroke-dasharray=\"6,4\"" : "", pts);
        }
        if (ser.points)
            for (std::size_t i = 0; i < n; ++i)
                if (ok(ser.x[i], ser.y[i]))
                    s += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"3\" fill=\"{}\"/>\n", px(ser.x[i]),
                                     py(ser.y[i]), ser.color);
        const double ly = mt + 14 + 18 * k, lx = ml + pw + 12;
        if (ser.line)
            s += fmt::format("<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{}\" stroke-width=\"1.5\"{}/>\n", lx,
                             ly - 4, lx + 20, ly - 4, ser.color, ser.dashed ? " stroke-dasharray=\"6,4\"" : "");
        if (ser.points)
            s += fmt::format("<circle cx=\"{}\" cy=\"{}\" r=\"3\" fill=\"{}\"/>\n", lx + 10, ly - 4, ser.color);
        s += fmt::format("<text x=\"{}\" y=\"{}\">{}</text>\n", lx + 26, ly, escape(ser.label));
    }
    s += "</svg>\n";
    return s;
}

void write_svg(const std::string &path, const Plot &plot) {
    if (const auto parent = std::filesystem::path(path).parent_path(); !parent.empty())
        std::filesystem::create_directories(parent);
    std::ofstream f(path);
    if (!f) throw ConfigError(fmt::format("cannot write {}", path));
    f << render_svg(plot);
}

} // namespace qdeloc::harness
