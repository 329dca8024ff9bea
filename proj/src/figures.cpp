#include "qdeloc/figures.hpp"
#include "qdeloc/errors.hpp"
#include "qdeloc/fit.hpp"
#include "qdeloc/oracles.hpp"
#include "qdeloc/run.hpp"
#include "qdeloc/svg.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

namespace qdeloc::harness {

namespace fs = std::filesystem;

namespace {

struct Context {
    std::string id;
    Scale scale;
    fs::path dir;
    int threads;
    FigureOutput out;

    std::string path(const std::string &name) const { return (dir / name).string(); }

    ObservableSeries run(ExperimentConfig c, const std::string &tag) {
        c.output = path(fmt::format("{}_{}.csv", id, tag));
        c.run_dir.clear();
        c.threads = threads;
        fs::remove(c.output);
        fs::remove(path(fmt::format("{}_{}_purity.csv", id, tag)));
        return run_series(c, out.files);
    }

    void svg(const std::string &name, const Plot &p) {
        const auto file = path(name);
        write_svg(file, p);
        out.files.push_back(file);
    }
};

ExperimentConfig exact_config(int d, std::vector<int> Ns, std::vector<double> qs, int depth, std::uint64_t R,
                              std::uint64_t seed) {
    ExperimentConfig c;
    c.engine = Engine::exact;
    c.d = d;
    c.Ns = std::move(Ns);
    c.qs = std::move(qs);
    c.depth = depth;
    c.realizations = R;
    c.seed = seed;
    return c;
}

ExperimentConfig tn_config(int d, std::vector<int> Ns, double q, int depth, int chi_max = 512) {
    ExperimentConfig c;
    c.engine = Engine::tn;
    c.d = d;
    c.Ns = std::move(Ns);
    c.qs = {q};
    c.depth = depth;
    c.chi_max = chi_max;
    return c;
}

nlohmann::json substitution(const nlohmann::json &reference, const nlohmann::json &used) {
    return {{"reference", reference}, {"used", used}};
}

std::vector<double> as_x(const std::vector<ObservableRecord> &rs) {
    std::vector<double> x;
    for (const auto &r : rs) x.push_back(r.t);
    return x;
}

template <class F> std::vector<double> map(const std::vector<ObservableRecord> &rs, F f) {
    std::vector<double> y;
    for (const auto &r : rs) y.push_back(f(r));
    return y;
}

PlotSeries fit_line(const DecayFit &fit, std::size_t k, std::string color) {
    PlotSeries s;
    s.label = fmt::format("fit N={}", fit.Ns[k]);
    s.color = std::move(color);
    s.points = false;
    s.line = true;
    for (int t : fit.window[k]) {
        s.x.push_back(t);
        s.y.push_back(fit.prefactor[k] * std::pow(fit.beta, t - 1));
    }
    return s;
}

PlotSeries asymptote(int d, int N, int t_max, double alpha, std::string label) {
    PlotSeries s;
    s.label = std::move(label);
    s.color = "#d62728";
    s.points = false;
    s.line = true;
    s.dashed = true;
    for (int t = 1; t <= t_max; ++t) {
        s.x.push_back(t);
        s.y.push_back(oracles::predicted_deficit(d, N, t, alpha));
    }
    return s;
}

/// Annealed and quenched entropies against depth with the Haar value.
void entropy_panels(Context &ctx, const ObservableSeries &s, int d, double q, const std::string &name,
                    const std::string &title, bool per_site, bool annealed) {
    Plot p;
    p.title = title;
    p.xlabel = "depth t";
    p.ylabel = per_site ? fmt::format("S_{} / N", q) : fmt::format("S_{}", q);
    std::size_t color = 0;
    for (int N : s.sizes()) {
        const auto rs = s.select(Provenance::mc, ValueKind::ipr, d, N, q);
        if (rs.empty()) continue;
        const double norm = per_site ? N : 1.0;
        PlotSeries qu{fmt::format("quenched N={}", N), as_x(rs), map(rs, [&](auto &r) { return r.s_quenched / norm; }),
                      palette(color++)};
        qu.line = true;
        p.series.push_back(qu);
        if (annealed) {
            PlotSeries an{fmt::format("annealed N={}", N), as_x(rs),
                          map(rs, [&](auto &r) { return r.s_annealed / norm; }), palette(color++)};
            p.series.push_back(an);
        }
        PlotSeries h{fmt::format("Haar N={}", N), {rs.front().t * 1.0, rs.back().t * 1.0},
                     {haar_reference_entropy(d, N, q) / norm, haar_reference_entropy(d, N, q) / norm}, "#7f7f7f"};
        h.points = false;
        h.line = true;
        h.dashed = true;
        p.series.push_back(h);
    }
    ctx.svg(name, p);
}

nlohmann::json gap_table(const ObservableSeries &s, int d, double q) {
    nlohmann::json rows = nlohmann::json::array();
    for (int N : s.sizes())
        for (const auto &r : s.select(Provenance::mc, ValueKind::ipr, d, N, q))
            rows.push_back({{"N", N},
                            {"t", r.t},
                            {"quenched_minus_annealed", r.s_quenched - r.s_annealed},
                            {"deficit", r.deficit},
                            {"deficit_err", r.deficit_err}});
    return rows;
}

void fig1_left(Context &ctx) {
    const bool desk = ctx.scale == Scale::desk;
    const std::vector<int> Ns = desk ? std::vector<int>{8, 10, 12} : std::vector<int>{8};
    const std::uint64_t R = desk ? 1000 : 300;
    const int depth = desk ? 24 : 16;
    const auto s = ctx.run(exact_config(2, Ns, {2.0}, depth, R, 11), "exact");
    entropy_panels(ctx, s, 2, 2.0, "fig1_left.svg", "q = 2, d = 2: quenched and annealed", true, true);

    Plot p;
    p.title = "q = 2 deficits";
    p.xlabel = "depth t";
    p.ylabel = "S^H - S";
    p.log_y = true;
    std::size_t color = 0;
    for (int N : Ns) {
        const auto rs = s.select(Provenance::mc, ValueKind::ipr, 2, N, 2.0);
        const double sh = haar_reference_entropy(2, N, 2.0);
        p.series.push_back({fmt::format("annealed N={}", N), as_x(rs), map(rs, [](auto &r) { return r.deficit; }),
                            palette(color++)});
        p.series.push_back({fmt::format("quenched N={}", N), as_x(rs),
                            map(rs, [&](auto &r) { return sh - r.s_quenched; }), palette(color++)});
    }
    ctx.svg("fig1_left_deficit.svg", p);
    ctx.out.sidecar["substitutions"] = {{"N", substitution({8, 10, 12, 14, 16, 18, 20, 22, 24}, Ns)},
                                        {"realizations", substitution(10000, R)}};
    ctx.out.sidecar["gaps"] = gap_table(s, 2, 2.0);
}

void fig1_right(Context &ctx) {
    const bool desk = ctx.scale == Scale::desk;
    const std::vector<int> Ns = desk ? std::vector<int>{8, 16, 64, 128, 256} : std::vector<int>{8, 16, 64};
    const int depth = 35;
    const auto tn = ctx.run(tn_config(2, Ns, 2.0, depth), "tn");
    const std::uint64_t R = desk ? 10000 : 2000;
    const auto mc = ctx.run(exact_config(2, {8}, {2.0}, 20, R, 12), "exact");

    std::vector<DeficitCurve> large;
    for (auto &c : deficit_curves(tn, Provenance::tn, 2, 2.0))
        if (c.N >= 64) large.push_back(c);
    const auto fit = fit_decay(large);

    Plot p;
    p.title = "q = 2, d = 2: approach to the Haar value";
    p.xlabel = "depth t";
    p.ylabel = "S^H - S_annealed";
    p.log_y = true;
    std::size_t color = 0;
    nlohmann::json pace = nlohmann::json::array();
    for (int N : Ns) {
        const auto rs = tn.select(Provenance::tn, ValueKind::ipr, 2, N, 2.0);
        PlotSeries s{fmt::format("TN N={}", N), as_x(rs), map(rs, [](auto &r) { return r.deficit; }), palette(color++)};
        s.points = false;
        s.line = true;
        p.series.push_back(s);
        // Mean one-layer decay ratio over 10 <= t <= 20.
        double acc = 0;
        int n = 0;
        for (std::size_t i = 1; i < rs.size(); ++i)
            if (rs[i].t >= 10 && rs[i].t <= 20 && rs[i].deficit > 0 && rs[i - 1].deficit > 0) {
                acc += std::log(rs[i].deficit / rs[i - 1].deficit);
                ++n;
            }
        pace.push_back({{"N", N}, {"mean_ratio_t10_20", n ? std::exp(acc / n) : kNaN}});
    }
    const auto mrs = mc.select(Provenance::mc, ValueKind::ipr, 2, 8, 2.0);
    p.series.push_back({"MC N=8", as_x(mrs), map(mrs, [](auto &r) { return r.deficit; }), "#000000"});
    for (std::size_t k = 0; k < fit.Ns.size(); ++k) p.series.push_back(fit_line(fit, k, palette(color++)));
    p.series.push_back(asymptote(2, Ns.back(), depth, oracles::AsymptoticConstants::alpha_qubit_q2,
                                 fmt::format("0.291 N 0.8^(t-1), N={}", Ns.back())));
    ctx.svg("fig1_right.svg", p);
    ctx.out.sidecar["fit_N_ge_64"] = fit.to_json();
    ctx.out.sidecar["pace"] = pace;
    ctx.out.sidecar["substitutions"] = {{"N", substitution({8, 16, 64, 128, 256, 512, 1024}, Ns)},
                                        {"mc_realizations", substitution(10000, R)}};
}

void fig2a(Context &ctx) {
    const bool desk = ctx.scale == Scale::desk;
    const int N = desk ? 12 : 8;
    const std::uint64_t R = desk ? 1000 : 300;
    const auto s = ctx.run(exact_config(2, {N}, {3.0}, desk ? 20 : 16, R, 21), "exact");
    entropy_panels(ctx, s, 2, 3.0, "fig2a.svg", "q = 3, d = 2: quenched and annealed", false, true);
    ctx.out.sidecar["gaps"] = gap_table(s, 2, 3.0);
    ctx.out.sidecar["substitutions"] = {{"N", substitution(24, N)}, {"realizations", substitution(10000, R)}};
}

void fig2b(Context &ctx) {
    const bool desk = ctx.scale == Scale::desk;
    const std::vector<int> Ns = desk ? std::vector<int>{32, 64, 128} : std::vector<int>{8, 16};
    const int depth = desk ? 30 : 24;
    const auto tn = ctx.run(tn_config(2, Ns, 3.0, depth, 4096), "tn");
    const std::uint64_t R = desk ? 10000 : 2000;
    const auto mc = ctx.run(exact_config(2, {8}, {3.0}, 16, R, 22), "exact");
    const auto fit = fit_decay(deficit_curves(tn, Provenance::tn, 2, 3.0));

    Plot p;
    p.title = "q = 3, d = 2: approach to the Haar value";
    p.xlabel = "depth t";
    p.ylabel = "S^H - S_annealed";
    p.log_y = true;
    std::size_t color = 0;
    for (int N : Ns) {
        const auto rs = tn.select(Provenance::tn, ValueKind::ipr, 2, N, 3.0);
        PlotSeries s{fmt::format("TN N={}", N), as_x(rs), map(rs, [](auto &r) { return r.deficit; }), palette(color++)};
        s.points = false;
        s.line = true;
        p.series.push_back(s);
    }
    const auto mrs = mc.select(Provenance::mc, ValueKind::ipr, 2, 8, 3.0);
    p.series.push_back({"MC N=8", as_x(mrs), map(mrs, [](auto &r) { return r.deficit; }), "#000000"});
    for (std::size_t k = 0; k < fit.Ns.size(); ++k) p.series.push_back(fit_line(fit, k, palette(color++)));
    p.series.push_back(asymptote(2, Ns.back(), depth, oracles::AsymptoticConstants::prefactor_qubit_q3,
                                 fmt::format("0.76 N 0.8^(t-1), N={}", Ns.back())));
    ctx.svg("fig2b.svg", p);
    ctx.out.sidecar["fit"] = fit.to_json();
    ctx.out.sidecar["substitutions"] = {{"N", substitution({8, 16, 32, 64, 128, 256, 512}, Ns)},
                                        {"mc_realizations", substitution(10000, R)}};
}

void fig2cd(Context &ctx) {
    const bool desk = ctx.scale == Scale::desk;
    const int N = desk ? 12 : 8;
    const std::uint64_t R = desk ? 1000 : 300;
    const auto s = ctx.run(exact_config(2, {N}, {1.0, 4.0}, desk ? 20 : 16, R, 23), "exact");
    entropy_panels(ctx, s, 2, 1.0, "fig2c.svg", "q = 1, d = 2: quenched Shannon entropy", false, false);
    entropy_panels(ctx, s, 2, 4.0, "fig2d.svg", "q = 4, d = 2: quenched entropy", false, false);
    ctx.out.sidecar["gaps_q1"] = gap_table(s, 2, 1.0);
    ctx.out.sidecar["gaps_q4"] = gap_table(s, 2, 4.0);
    ctx.out.sidecar["substitutions"] = {{"N", substitution(24, N)}, {"realizations", substitution(10000, R)}};
}

void fig3(Context &ctx) {
    const int N = 16, cut = 8, depth = 20;
    Plot p;
    p.title = "Renyi-2 entanglement entropy of half the chain";
    p.xlabel = "depth t";
    p.ylabel = "-ln P2";
    nlohmann::json checks = nlohmann::json::array();
    std::size_t color = 0;
    for (int d : {2, 3}) {
        auto c = tn_config(d, {N}, 2.0, depth);
        c.cuts = {cut};
        c.qs = {2.0};
        const auto tn = ctx.run(c, fmt::format("tn_d{}", d));
        auto oc = c;
        oc.engine = Engine::oracle;
        const auto oracle = ctx.run(oc, fmt::format("oracle_d{}", d));
        const auto trs = tn.select(Provenance::tn, ValueKind::purity, d, N, 2.0, cut);
        const auto ors = oracle.select(Provenance::oracle, ValueKind::purity, d, N, 2.0, cut);
        double dev = 0;
        for (std::size_t i = 0; i < std::min(trs.size(), ors.size()); ++i)
            dev = std::max(dev, std::abs(trs[i].value - ors[i].value));
        checks.push_back({{"d", d}, {"max_abs_deviation", dev}, {"tolerance", 1e-8}, {"pass", dev < 1e-8}});
        p.series.push_back(
            {fmt::format("TN d={}", d), as_x(trs), map(trs, [](auto &r) { return -std::log(r.value); }), palette(color)});
        PlotSeries o{fmt::format("walk d={}", d), as_x(ors), map(ors, [](auto &r) { return -std::log(r.value); }),
                     palette(color)};
        o.points = false;
        o.line = true;
        p.series.push_back(o);
        ++color;

        // Short-time slope at N = 64 against the entanglement velocity.
        auto vc = tn_config(d, {64}, 2.0, 6);
        vc.cuts = {32};
        const auto vs = ctx.run(vc, fmt::format("tn_velocity_d{}", d));
        std::vector<int> t;
        std::vector<double> y;
        for (const auto &r : vs.select(Provenance::tn, ValueKind::purity, d, 64, 2.0, 32))
            if (r.t >= 3 && r.t <= 6) {
                t.push_back(r.t);
                y.push_back(-std::log(r.value));
            }
        const auto slope = parity_slope(t, y);
        const double v = oracles::entanglement_velocity(d);
        checks.push_back({{"d", d}, {"velocity_fit", slope.slope}, {"velocity", v},
                          {"relative_error", std::abs(slope.slope / v - 1.0)}});
    }
    ctx.svg("fig3.svg", p);
    ctx.out.sidecar["checks"] = checks;
    ctx.out.sidecar["substitutions"] = nlohmann::json::object();
}

} // namespace

Scale parse_scale(std::string_view s) {
    if (s == "quick") return Scale::quick;
    if (s == "desk") return Scale::desk;
    throw ConfigError(fmt::format("unknown scale '{}' (quick or desk)", s));
}

FigureOutput reproduce_figure(std::string_view id, Scale scale, const std::string &out_dir, int threads) {
    if (std::find(kFigureIds.begin(), kFigureIds.end(), id) == kFigureIds.end())
        throw ConfigError(fmt::format("unknown figure id '{}'", id));
    fs::create_directories(out_dir);
    Context ctx{std::string(id), scale, fs::path(out_dir), threads, {}};
    ctx.out.id = ctx.id;
    ctx.out.sidecar["figure"] = ctx.id;
    ctx.out.sidecar["scale"] = scale == Scale::desk ? "desk" : "quick";
    if (id == "fig1_left") fig1_left(ctx);
    else if (id == "fig1_right") fig1_right(ctx);
    else if (id == "fig2a") fig2a(ctx);
    else if (id == "fig2b") fig2b(ctx);
    else if (id == "fig2cd") fig2cd(ctx);
    else fig3(ctx);
    const auto side = ctx.path(ctx.id + ".json");
    std::ofstream(side) << ctx.out.sidecar.dump(2) << '\n';
    ctx.out.files.push_back(side);
    return ctx.out;
}

} // namespace qdeloc::harness
