// Acceptance suite: one PASS/FAIL line per criterion. Exit status is nonzero if any fails.
// `acceptance 1 2 8` runs a subset.

#include "qdeloc/exactsim.hpp"
#include "qdeloc/fit.hpp"
#include "qdeloc/oracles.hpp"
#include "qdeloc/permutations.hpp"
#include "qdeloc/replicatn.hpp"
#include "qdeloc/series.hpp"

#include <fmt/format.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>

using namespace qdeloc;
using namespace qdeloc::harness;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

/// TN deficit curves for the given sizes, in the same form the harness produces.
std::vector<DeficitCurve> tn_curves(int d, int q, const std::vector<int> &Ns, int depth, int chi_max) {
    tn::TnOptions opt;
    opt.chi_max = chi_max;
    std::vector<DeficitCurve> out;
    for (int N : Ns) {
        DeficitCurve c;
        c.N = N;
        c.weighted = false;
        for (const auto &p : tn::averaged_ipr_series(d, q, N, depth, opt)) {
            c.t.push_back(p.t);
            c.deficit.push_back(ipr_deficit(d, N, q, p.log_value));
            c.error.push_back(tn_deficit_error(N, p.t, q, opt.eps));
        }
        out.push_back(std::move(c));
    }
    return out;
}

std::optional<DecayFit> q2_fit; // shared by criteria 5 and 11

Verdict weingarten_correctness() {
    double worst = 0.0;
    bool sums = true;
    for (int q : {1, 2, 3, 4}) {
        const auto table = perm::build_group(q);
        for (std::int64_t D : {4, 9, 16, 25}) {
            const auto wg = perm::weingarten(table, D);
            worst = std::max(worst, wg.gram_residual(table));
            sums = sums && wg.sum() == perm::weingarten_sum_rule(D, q);
        }
    }
    return {worst < 1e-12 && sums, fmt::format("max residual {:.2e} (< 1e-12), exact sum rule {}", worst,
                                               sums ? "holds" : "violated")};
}

Verdict first_layer() {
    double worst = 0.0;
    for (int d : {2, 3, 5})
        for (int N : {8, 16}) {
            const double expect = std::pow(2.0 / (d * d + 1.0), N / 2);
            worst = std::max(worst, std::abs(tn::averaged_ipr(d, 2, N, 1).value / expect - 1.0));
        }
    return {worst < 1e-10, fmt::format("max relative error {:.2e} (< 1e-10)", worst)};
}

Verdict engine_equivalence() {
    exact::EnsembleConfig e;
    e.d = 2;
    e.N = 8;
    e.depth = 5;
    e.qs = {2.0, 3.0};
    e.realizations = 100000;
    e.seed = 2024;
    const auto mc = exact::ensemble_run(e);
    std::map<int, std::vector<tn::TnPoint>> tn;
    for (int q : {2, 3}) tn[q] = tn::averaged_ipr_series(2, q, 8, 5);
    double worst = 0.0;
    std::string where;
    for (const auto &p : mc.points) {
        if (p.t < 1) continue;
        const double z = std::abs(p.ipr_mean - tn[static_cast<int>(p.q)][p.t].value) / p.ipr_stderr;
        if (z > worst) {
            worst = z;
            where = fmt::format("q={}, t={}", p.q, p.t);
        }
    }
    return {worst < 3.0, fmt::format("max |MC - TN| = {:.2f} sigma at {} (< 3), 1e5 realizations", worst, where)};
}

Verdict stationary_values() {
    exact::EnsembleConfig e;
    e.d = 2;
    e.N = 12;
    e.depth = 60;
    e.qs = {2.0, 3.0, 4.0};
    e.realizations = 1000;
    e.seed = 77;
    const auto deep = exact::ensemble_run(e);
    double worst = 0.0;
    for (const auto &p : deep.points) {
        if (p.t != e.depth) continue;
        const double sh = oracles::haar_entropy(2, 12, static_cast<int>(p.q));
        worst = std::max(worst, std::abs(p.s_annealed - sh) / p.s_annealed_err);
    }
    exact::EnsembleConfig s;
    s.d = 2;
    s.N = 6;
    s.depth = 30;
    s.qs = {2.0};
    s.realizations = 20000;
    s.seed = 78;
    const auto sd = exact::ensemble_run(s);
    const double mc_std = sd.points.back().ipr_std;
    const double std_rel = std::abs(mc_std / oracles::haar_ipr_std(2, 6, 2) - 1.0);
    return {worst < 3.0 && std_rel < 0.10,
            fmt::format("max |S_annealed - S^H| = {:.2f} sigma at t=60, N=12 (< 3); std(I_2) at N=6 off by {:.1f}% "
                        "(< 10%)",
                        worst, 100 * std_rel)};
}

Verdict decay_law_q2() {
    q2_fit = fit_decay(tn_curves(2, 2, {64, 128, 256}, 35, 512));
    const auto &f = *q2_fit;
    const double beta_rel = std::abs(f.beta / 0.8 - 1.0);
    const bool pass = beta_rel < 0.01 && std::abs(f.alpha - 0.291) <= 0.02;
    return {pass, fmt::format("beta = {:.5f} ({:.2f}% from 4/5, < 1%), alpha_2 = {:.4f} (0.291 +- 0.02), R^2 = {:.6f}",
                              f.beta, 100 * beta_rel, f.alpha, f.r2)};
}

Verdict large_d_prefactor() {
    std::vector<double> alphas;
    std::string list;
    for (int d : {3, 5, 8, 13}) {
        const auto f = fit_decay(tn_curves(d, 2, {128}, 35, 512));
        alphas.push_back(f.alpha);
        list += fmt::format("{}alpha_{} = {:.4f} (beta {:.4f} vs {:.4f})", list.empty() ? "" : ", ", d, f.alpha, f.beta,
                            oracles::decay_base(d));
    }
    bool monotone = true;
    for (std::size_t i = 1; i < alphas.size(); ++i) monotone = monotone && alphas[i] > alphas[i - 1];
    const bool in_range = alphas.back() > 0.40 && alphas.back() < 0.50;
    return {monotone && in_range, fmt::format("{}; monotone {}, alpha_13 in (0.40, 0.50) {}", list,
                                              monotone ? "yes" : "no", in_range ? "yes" : "no")};
}

Verdict q3_universality() {
    const auto f = fit_decay(tn_curves(2, 3, {32, 64, 128}, 30, 4096));
    const double beta_rel = std::abs(f.beta / 0.8 - 1.0);
    const double pref_rel = std::abs(f.alpha / 0.76 - 1.0);
    return {beta_rel < 0.02 && pref_rel < 0.15,
            fmt::format("beta = {:.5f} ({:.2f}% from 4/5, < 2%), prefactor slope = {:.4f} ({:.1f}% from 0.76, < 15%); "
                        "A_N = {:.3f}, {:.3f}, {:.3f}; A_N/N = {:.3f}, {:.3f}, {:.3f}",
                        f.beta, 100 * beta_rel, f.alpha, 100 * pref_rel, f.prefactor[0], f.prefactor[1],
                        f.prefactor[2], f.prefactor[0] / 32, f.prefactor[1] / 64, f.prefactor[2] / 128)};
}

Verdict walk_purity() {
    double worst = 0.0;
    std::string slopes;
    bool slope_ok = true;
    for (int d : {2, 3}) {
        for (const auto &p : tn::averaged_purity_series(d, 2, 16, 8, 20))
            worst = std::max(worst, std::abs(p.value - oracles::walk_purity(d, 16, 8, oracles::walk_steps(16, 8, p.t))));
        std::vector<int> t;
        std::vector<double> y;
        for (const auto &p : tn::averaged_purity_series(d, 2, 64, 32, 6))
            if (p.t >= 3) {
                t.push_back(p.t);
                y.push_back(-p.log_value);
            }
        const double v = oracles::entanglement_velocity(d);
        const double rel = std::abs(parity_slope(t, y).slope / v - 1.0);
        slope_ok = slope_ok && rel < 0.02;
        slopes += fmt::format(", slope d={} off by {:.2f}%", d, 100 * rel);
    }
    return {worst < 1e-8 && slope_ok, fmt::format("max |TN - walk| = {:.2e} (< 1e-8){} (< 2%)", worst, slopes)};
}

Verdict bipartition_identity() {
    double worst = 0.0;
    const auto ipr = tn::averaged_ipr_series(2, 2, 8, 4);
    for (int t : {1, 2, 3}) worst = std::max(worst, std::abs(tn::sum_over_bipartitions(2, 8, t) - ipr[t + 1].value));
    return {worst < 1e-8, fmt::format("max |sum over 16 bipartitions - Ibar_2(t+1)| = {:.2e} (< 1e-8)", worst)};
}

Verdict self_averaging() {
    exact::EnsembleConfig e;
    e.d = 2;
    e.N = 12;
    e.depth = 20;
    e.qs = {2.0, 3.0};
    e.realizations = 1000;
    e.seed = 1010;
    const auto res = exact::ensemble_run(e);
    std::map<double, std::pair<double, int>> worst;
    for (const auto &p : res.points) {
        if (p.t < 6) continue;
        const double gap = std::abs(p.s_quenched - p.s_annealed);
        auto &w = worst[p.q];
        if (gap > w.first) w = {gap, p.t};
    }
    const bool pass = worst[2.0].first < 0.05 && worst[3.0].first < 0.05;
    return {pass, fmt::format("max |quenched - annealed| for t >= 6: q=2 {:.4f} (t={}), q=3 {:.4f} (t={}) (< 0.05)",
                              worst[2.0].first, worst[2.0].second, worst[3.0].first, worst[3.0].second)};
}

Verdict hsd_scaling() {
    if (!q2_fit) q2_fit = fit_decay(tn_curves(2, 2, {64, 128, 256}, 35, 512));
    const auto &f = *q2_fit;
    const double expect = std::log(2.0) / -std::log(0.8);
    // Least-squares slope of t_HSD against log2 N.
    std::vector<double> x, y;
    for (std::size_t k = 0; k < f.Ns.size(); ++k) {
        x.push_back(std::log2(f.Ns[k]));
        y.push_back(f.hsd_time(k, 1e-2));
    }
    double xm = 0, ym = 0;
    for (std::size_t k = 0; k < x.size(); ++k) xm += x[k], ym += y[k];
    xm /= x.size();
    ym /= y.size();
    double sxx = 0, sxy = 0;
    for (std::size_t k = 0; k < x.size(); ++k) sxx += (x[k] - xm) * (x[k] - xm), sxy += (x[k] - xm) * (y[k] - ym);
    const double growth = sxy / sxx;
    const double rel = std::abs(growth / expect - 1.0);
    return {rel < 0.10, fmt::format("t_HSD(1e-2) = {:.2f}, {:.2f}, {:.2f} at N = 64, 128, 256; growth per doubling "
                                    "{:.3f} vs {:.3f} ({:.1f}%, < 10%); steps {:.3f}, {:.3f}",
                                    y[0], y[1], y[2], growth, expect, 100 * rel, y[1] - y[0], y[2] - y[1])};
}

} // namespace

int main(int argc, char **argv) {
    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
        {"Weingarten correctness", weingarten_correctness},
        {"First-layer closed form", first_layer},
        {"Engine equivalence", engine_equivalence},
        {"Stationary values", stationary_values},
        {"Decay law q=2", decay_law_q2},
        {"Large-d prefactor trend", large_d_prefactor},
        {"q=3 base universality", q3_universality},
        {"Random-walk purity", walk_purity},
        {"Bipartition-sum identity", bipartition_identity},
        {"Self-averaging", self_averaging},
        {"t_HSD scaling", hsd_scaling},
    };
    std::set<int> only;
    for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i) + 1;
        if (!only.empty() && !only.count(id)) continue;
        const auto start = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = criteria[i].second();
        } catch (const std::exception &e) {
            v = {false, fmt::format("exception: {}", e.what())};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (!v.pass) ++failed;
        fmt::print("{} {:2d} {}: {} [{:.1f} s]\n", v.pass ? "PASS" : "FAIL", id, criteria[i].first, v.detail, secs);
        std::fflush(stdout);
    }
    fmt::print("{} of {} criteria failed\n", failed, only.empty() ? criteria.size() : only.size());
    return failed == 0 ? 0 : 1;
}
