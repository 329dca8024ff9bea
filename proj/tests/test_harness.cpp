#include "qdeloc/config.hpp"
#include "qdeloc/crosscheck.hpp"
#include "qdeloc/errors.hpp"
#include "qdeloc/figures.hpp"
#include "qdeloc/fit.hpp"
#include "qdeloc/oracles.hpp"
#include "qdeloc/run.hpp"
#include "qdeloc/svg.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace qdeloc;
using namespace qdeloc::harness;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string &name) {
    auto p = fs::temp_directory_path() / "qdeloc_test_harness" / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path &p) {
    std::ifstream f(p);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

DeficitCurve synthetic(int N, double alpha, double beta, int t_max) {
    DeficitCurve c;
    c.N = N;
    for (int t = 0; t <= t_max; ++t) {
        c.t.push_back(t);
        c.deficit.push_back(alpha * N * std::pow(beta, t - 1));
    }
    return c;
}

} // namespace

TEST_CASE("config file parsing") {
    const auto c = parse_config(R"(
# comment
engine = tn
d = 3
N = 8:16:4, 32
q = 2,3
depth = 12   # trailing comment
eps = 1e-12
chi-max = 64
cut = N/2
output = "x.csv"
)");
    CHECK(c.engine == Engine::tn);
    CHECK(c.d == 3);
    CHECK(c.Ns == std::vector<int>{8, 12, 16, 32});
    CHECK(c.qs == std::vector<double>{2.0, 3.0});
    CHECK(c.depth == 12);
    CHECK(c.eps == 1e-12);
    CHECK(c.chi_max == 64);
    CHECK(c.cuts == std::vector<int>{-1});
    CHECK(resolve_cut(c.cuts[0], 12) == 6);
    CHECK(c.output == "x.csv");

    CHECK_THROWS_AS(parse_config("colour = blue"), ConfigError);
    CHECK_THROWS_AS(parse_config("d 3"), ConfigError);
    CHECK_THROWS_AS(parse_config("d = three"), ConfigError);
    CHECK_THROWS_AS(parse_config("N = 8:4"), ConfigError);
    CHECK_THROWS_AS(parse_engine("dmrg"), ConfigError);

    // Flags are applied after the file.
    auto f = parse_config("d = 3\nseed = 5");
    apply_setting(f, "d", "2");
    CHECK(f.d == 2);
    CHECK(f.seed == 5);
}

TEST_CASE("config validation against engine capabilities") {
    ExperimentConfig c;
    c.engine = Engine::exact;
    c.Ns = {24};
    CHECK_NOTHROW(validate(c));
    c.Ns = {26};
    CHECK_THROWS_AS(validate(c), CapacityError);
    c.d = 3;
    c.Ns = {16};
    CHECK_THROWS_AS(validate(c), CapacityError);
    c.d = 2;
    c.Ns = {7};
    CHECK_THROWS_AS(validate(c), LayoutError);
    c.Ns = {8};
    c.cuts = {9};
    CHECK_THROWS_AS(validate(c), UnsupportedRegionError);
    c.cuts.clear();
    c.d = 1;
    CHECK_THROWS_AS(validate(c), DomainError);

    ExperimentConfig t;
    t.engine = Engine::tn;
    t.qs = {2, 3};
    CHECK_NOTHROW(validate(t));
    t.qs = {4};
    CHECK_THROWS_AS(validate(t), CapacityError);
    t.allow_q4 = true;
    CHECK_NOTHROW(validate(t));
    t.qs = {5};
    CHECK_THROWS_AS(validate(t), CapacityError);
    t.qs = {2.5};
    CHECK_THROWS_AS(validate(t), ConfigError);
    t.qs = {1};
    CHECK_THROWS_AS(validate(t), ConfigError);
    t.qs = {2};
    t.sum_bipartitions = true;
    t.Ns = {30};
    CHECK_THROWS_AS(validate(t), CapacityError);
}

TEST_CASE("synthetic exponential decay is recovered exactly") {
    std::vector<DeficitCurve> curves{synthetic(16, 0.3, 0.8, 30), synthetic(32, 0.3, 0.8, 30),
                                     synthetic(64, 0.3, 0.8, 30)};
    const auto f = fit_decay(curves);
    CHECK(f.beta == doctest::Approx(0.8).epsilon(1e-6));
    CHECK(f.alpha == doctest::Approx(0.3).epsilon(1e-6));
    CHECK(std::abs(f.alpha_intercept) < 1e-6);
    CHECK(f.r2 == doctest::Approx(1.0).epsilon(1e-12));
    for (std::size_t k = 0; k < 3; ++k) {
        CHECK(f.prefactor[k] == doctest::Approx(0.3 * f.Ns[k]).epsilon(1e-6));
        for (double r : f.residuals[k]) CHECK(std::abs(r) < 1e-9);
        // Default window: last 60% of the 31 usable depths.
        CHECK(f.window[k].size() == 19);
        CHECK(f.window[k].back() == 30);
        CHECK(f.hsd_time(k, 1e-2) == doctest::Approx(oracles::hsd_time(2, f.Ns[k], 0.3, 1e-2)).epsilon(1e-9));
    }

    const auto one = fit_decay({synthetic(20, 0.45, 0.6, 20)});
    CHECK(one.beta == doctest::Approx(0.6).epsilon(1e-9));
    CHECK(one.alpha == doctest::Approx(0.45).epsilon(1e-9));
}

TEST_CASE("fit window rules") {
    auto c = synthetic(10, 0.5, 0.5, 40);
    // Deficit floor 1e-10 removes the tail: 5 * 0.5^(t-1) > 1e-10 up to t = 36.
    auto keep = window_points(c, {});
    CHECK(c.t[keep.back()] == 36);

    // Points within 10 error bars of zero are excluded.
    c.error.assign(c.t.size(), 1e-3);
    keep = window_points(c, {});
    for (auto i : keep) CHECK(c.deficit[i] > 1e-2);

    FitWindow w;
    w.t_min = 2;
    w.t_max = 5;
    CHECK(window_points(c, w).size() == 4);
    w.t_max = 4;
    CHECK_THROWS_AS(fit_decay({c}, w), FitWindowError);

    auto bad = synthetic(10, 0.5, 0.5, 10);
    bad.deficit[4] = -1e-3;
    w.t_min = 1;
    w.t_max = 8;
    CHECK_THROWS_AS(fit_decay({bad}, w), FitWindowError);

    CHECK_THROWS_AS(fit_decay({synthetic(10, 0.5, 1.1, 10)}), FitWindowError);
    CHECK_THROWS_AS(fit_decay({}), FitWindowError);
}

TEST_CASE("noisy fit reports a bootstrap interval around the truth") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g;
    DeficitCurve c;
    c.N = 12;
    for (int t = 1; t <= 20; ++t) {
        const double truth = 0.3 * 12 * std::pow(0.8, t - 1);
        const double err = 0.01 * truth;
        c.t.push_back(t);
        c.deficit.push_back(truth + err * g(rng));
        c.error.push_back(err);
    }
    FitWindow w;
    w.t_min = 1;
    w.t_max = 20;
    const auto f = fit_decay({c}, w);
    CHECK(f.bootstrap_ci);
    CHECK(f.beta_ci_low < 0.8);
    CHECK(f.beta_ci_high > 0.8);
    CHECK(f.beta_ci_high - f.beta_ci_low < 0.01);
}

TEST_CASE("parity slope is the mean of two-layer differences") {
    const std::vector<int> t{3, 4, 5, 6};
    const std::vector<double> y{1.0, 1.7, 2.1, 2.5};
    CHECK(parity_slope(t, y).slope == doctest::Approx((2.5 - 1.7 + 2.1 - 1.0) / 4).epsilon(1e-12));
    CHECK_THROWS_AS(parity_slope({2, 4, 6}, {1, 2, 3}), FitWindowError);
}

TEST_CASE("tensor-network fit is stable under window shifts") {
    ExperimentConfig c;
    c.engine = Engine::tn;
    c.Ns = {64};
    c.depth = 35;
    const auto dir = scratch("stability");
    c.output = (dir / "tn.csv").string();
    const auto series = run(c).series;
    const auto curves = deficit_curves(series, Provenance::tn, 2, 2.0);
    FitWindow w;
    w.t_min = 14;
    w.t_max = 34;
    const double b0 = fit_decay(curves, w).beta;
    for (int shift : {-1, 1}) {
        FitWindow s = w;
        *s.t_min += shift;
        *s.t_max += shift;
        CHECK(std::abs(fit_decay(curves, s).beta / b0 - 1.0) < 0.02);
    }
    CHECK(std::abs(b0 / 0.8 - 1.0) < 0.01);
}

TEST_CASE("exact-engine CSV is deterministic and round-trips") {
    const auto dir = scratch("determinism");
    ExperimentConfig c;
    c.engine = Engine::exact;
    c.Ns = {6};
    c.qs = {1.0, 2.0};
    c.depth = 4;
    c.realizations = 50;
    c.bootstrap = 20;
    c.seed = 9;
    c.cuts = {-1};
    c.threads = 1;
    c.run_dir = (dir / "a").string();
    c.output = "out.csv";
    const auto ra = run(c);
    c.run_dir = (dir / "b").string();
    run(c);
    c.run_dir = (dir / "c").string();
    c.threads = 3;
    run(c);
    const auto a = slurp(dir / "a" / "out.csv");
    CHECK(a == slurp(dir / "b" / "out.csv"));
    CHECK(a == slurp(dir / "c" / "out.csv"));
    CHECK(slurp(dir / "a" / "out_purity.csv") == slurp(dir / "b" / "out_purity.csv"));
    CHECK(a.rfind("t,q,I_mean,I_stderr,S_annealed,S_annealed_err,S_quenched,S_quenched_err,n_realizations,d,N,seed\n",
                   0) == 0);
    CHECK(fs::exists(dir / "a" / "manifest.json"));
    const auto manifest = nlohmann::json::parse(slurp(dir / "a" / "manifest.json"));
    CHECK(manifest["config"]["seed"] == 9);
    CHECK(manifest["seeds"]["master"] == 9);
    CHECK(manifest.contains("wall_time_s"));
    CHECK(manifest["versions"].contains("eigen"));

    const auto back = read_series_csv((dir / "a" / "out.csv").string());
    const auto orig = ra.series.select(Provenance::mc, ValueKind::ipr, 2, 6, 2.0);
    const auto got = back.select(Provenance::mc, ValueKind::ipr, 2, 6, 2.0);
    REQUIRE(orig.size() == got.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
        CHECK(got[i].value == orig[i].value);
        CHECK(got[i].s_quenched == orig[i].s_quenched);
        CHECK(got[i].deficit == orig[i].deficit);
    }

    // A second run appends rows without a second header.
    c.run_dir = (dir / "a").string();
    c.threads = 1;
    run(c);
    const auto twice = slurp(dir / "a" / "out.csv");
    CHECK(twice == a + a.substr(a.find('\n') + 1));
}

TEST_CASE("tensor-network CSV and deficit invariant") {
    const auto dir = scratch("tn");
    ExperimentConfig c;
    c.engine = Engine::tn;
    c.Ns = {8, 12};
    c.qs = {2, 3};
    c.depth = 80;
    c.sum_bipartitions = true;
    c.cuts = {4};
    c.chi_max = 4096;
    // Deep records sit within truncation noise of the Haar value; at the default cutoff that
    // noise (a few 1e-8) exceeds the 1e-9 slack, so the invariant is checked on a converged run.
    c.eps = 1e-22;
    c.output = (dir / "tn.csv").string();
    const auto r = run(c);
    CHECK(r.series.deficit_violations().empty());
    for (const auto &rec : r.series.records)
        if (rec.kind != ValueKind::purity) CHECK(rec.deficit >= -1e-9);
    // Deep circuits reach the Haar value in the shared convention.
    const auto deep = r.series.select(Provenance::tn, ValueKind::ipr, 2, 8, 3.0);
    CHECK(std::abs(deep.back().deficit) < 1e-6);
    const auto pur = r.series.select(Provenance::tn, ValueKind::purity, 2, 8, 2.0, 4);
    CHECK(std::abs(pur.back().deficit) < 1e-6);
    // Bipartition rows line up with the IPR rows at the same depth.
    const auto ipr = r.series.select(Provenance::tn, ValueKind::ipr, 2, 12, 2.0);
    for (const auto &b : r.series.select(Provenance::tn, ValueKind::bipartition_sum, 2, 12, 2.0))
        CHECK(std::abs(b.value - ipr[b.t].value) < 1e-8);

    const auto back = read_series_csv(c.output);
    CHECK(back.records.size() == r.series.records.size());
    const auto a = back.select(Provenance::tn, ValueKind::ipr, 2, 12, 3.0);
    const auto b = r.series.select(Provenance::tn, ValueKind::ipr, 2, 12, 3.0);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].deficit == doctest::Approx(b[i].deficit).epsilon(1e-12));
}

TEST_CASE("oracle engine is a closed-form table") {
    const auto dir = scratch("oracle");
    ExperimentConfig c;
    c.engine = Engine::oracle;
    c.Ns = {8};
    c.qs = {1, 2, 3};
    c.cuts = {-1};
    c.depth = 10;
    c.output = (dir / "o.csv").string();
    const auto r = run(c);
    const auto h = r.series.select(Provenance::oracle, ValueKind::ipr, 2, 8, 3.0);
    REQUIRE(h.size() == 1);
    CHECK(h[0].value == oracles::haar_ipr(2, 8, 3));
    const auto w = r.series.select(Provenance::oracle, ValueKind::purity, 2, 8, 2.0, 4);
    CHECK(w.size() == 11);
    CHECK(w[0].value == doctest::Approx(1.0));
    const auto first = slurp(c.output);
    fs::remove(c.output);
    run(c);
    CHECK(slurp(c.output) == first);
}

TEST_CASE("svg rendering") {
    Plot p;
    p.title = "a < b";
    p.log_y = true;
    p.series.push_back({"pts", {1, 2, 3, 4}, {1e-1, 1e-3, -1.0, 1e-5}, palette(0)});
    PlotSeries l{"line", {1, 4}, {1.0, 1e-6}, palette(1)};
    l.points = false;
    l.line = true;
    l.dashed = true;
    p.series.push_back(l);
    const auto s = render_svg(p);
    CHECK(s.rfind("<svg", 0) == 0);
    CHECK(s.find("a &lt; b") != std::string::npos);
    CHECK(s.find("stroke-dasharray") != std::string::npos);
    CHECK(s.find("1e-6") != std::string::npos);
    std::size_t circles = 0;
    for (auto pos = s.find("<circle"); pos != std::string::npos; pos = s.find("<circle", pos + 1)) ++circles;
    CHECK(circles == 3 + 1); // non-positive point skipped; one legend marker
}

TEST_CASE("figure reproduction") {
    CHECK_THROWS_AS(reproduce_figure("fig9", Scale::quick, scratch("fig").string()), ConfigError);
    CHECK_THROWS_AS(parse_scale("huge"), ConfigError);
    const auto dir = scratch("fig3");
    const auto out = reproduce_figure("fig3", Scale::quick, dir.string());
    CHECK(fs::exists(dir / "fig3.svg"));
    CHECK(fs::exists(dir / "fig3.json"));
    for (const auto &f : out.files) CHECK(fs::exists(f));
    for (const auto &c : out.sidecar["checks"]) {
        if (c.contains("max_abs_deviation")) CHECK(c["pass"].get<bool>());
        if (c.contains("relative_error")) CHECK(c["relative_error"].get<double>() < 0.02);
    }
}

TEST_CASE("crosscheck report and negative control") {
    CrosscheckParams p;
    p.N = 6;
    p.depth = 4;
    p.realizations = 4000;
    p.include_q1 = false;
    p.threads = 1;
    const auto rep = crosscheck(p);
    for (const auto &e : rep.entries) CHECK_MESSAGE(e.pass, e.name, " ", e.value);
    CHECK(rep.find("tn_vs_walk_purity") != nullptr);
    CHECK(rep.find("walk_spectral_vs_recursion") != nullptr);
    CHECK(rep.to_json()["all_pass"].get<bool>());

    p.corrupt_k = true;
    const auto bad = crosscheck(p);
    CHECK_FALSE(bad.all_pass());
    CHECK_FALSE(bad.find("tn_vs_walk_purity")->pass);
    CHECK(bad.find("tn_vs_oracle_first_layer")->pass);
}
