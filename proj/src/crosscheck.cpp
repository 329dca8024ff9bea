#include "qdeloc/crosscheck.hpp"
#include "qdeloc/exactsim.hpp"
#include "qdeloc/oracles.hpp"
#include "qdeloc/permutations.hpp"
#include "qdeloc/replicatn.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace qdeloc::harness {

namespace {

/// First-passage probabilities by evolving the walk's position distribution.
double first_passage_direct(int N, int z, int t) {
    if (z == 0 || z == N) return t == 0 ? 1.0 : 0.0;
    if (t == 0) return 0.0;
    std::vector<double> p(N + 1, 0.0), next(N + 1);
    p[z] = 1.0;
    double absorbed_now = 0.0;
    for (int s = 1; s <= t; ++s) {
        std::fill(next.begin(), next.end(), 0.0);
        for (int x = 1; x < N; ++x) {
            next[x - 1] += 0.5 * p[x];
            next[x + 1] += 0.5 * p[x];
        }
        absorbed_now = next[0] + next[N];
        next[0] = next[N] = 0.0;
        p.swap(next);
    }
    return absorbed_now;
}

CheckEntry entry(std::string name, double value, double tol, std::string detail) {
    return {std::move(name), value < tol, value, tol, std::move(detail)};
}

} // namespace

bool CrosscheckReport::all_pass() const {
    return std::all_of(entries.begin(), entries.end(), [](const auto &e) { return e.pass; });
}

const CheckEntry *CrosscheckReport::find(const std::string &name) const {
    for (const auto &e : entries)
        if (e.name == name) return &e;
    return nullptr;
}

nlohmann::json CrosscheckReport::to_json() const {
    nlohmann::json j;
    j["params"] = {{"d", params.d},         {"N", params.N},
                   {"q", params.q},         {"depth", params.depth},
                   {"realizations", params.realizations}, {"seed", params.seed},
                   {"eps", params.eps},     {"corrupt_k", params.corrupt_k}};
    j["checks"] = nlohmann::json::array();
    for (const auto &e : entries)
        j["checks"].push_back(
            {{"name", e.name}, {"pass", e.pass}, {"value", e.value}, {"tolerance", e.tolerance}, {"detail", e.detail}});
    j["all_pass"] = all_pass();
    return j;
}

CrosscheckReport crosscheck(const CrosscheckParams &P) {
    CrosscheckReport rep;
    rep.params = P;
    auto &out = rep.entries;
    const int d = P.d, N = P.N, q = P.q;
    tn::TnOptions opt;
    opt.eps = P.eps;
    opt.chi_max = 4096;
    opt.allow_q4 = true;

    // Weingarten residuals for the gate dimension d^2 and the single-site dimension d.
    {
        const auto table = perm::build_group(q);
        for (std::int64_t D : {std::int64_t{d} * d, std::int64_t{d}}) {
            if (D < q) continue;
            const auto wg = perm::weingarten(table, D);
            out.push_back(entry(fmt::format("weingarten_residual_D{}", D), wg.gram_residual(table), 1e-12,
                                fmt::format("max |G Wg - I| for q={}", q)));
            const bool rule = wg.sum() == perm::weingarten_sum_rule(D, q);
            out.push_back({fmt::format("weingarten_sum_rule_D{}", D), rule, rule ? 0.0 : 1.0, 0.5,
                           "exact sum of Wg equals (D-1)!/(D+q-1)!"});
        }
    }

    // Spectral first-passage density against direct evolution of the walk.
    {
        double worst = 0.0;
        for (int z = 0; z <= N; ++z)
            for (int t = 0; t <= 4 * N; ++t)
                worst = std::max(worst, std::abs(oracles::walk_absorption(N, z, t) - first_passage_direct(N, z, t)));
        out.push_back(entry("walk_spectral_vs_recursion", worst, 1e-12, fmt::format("z in [0,{}], t <= {}", N, 4 * N)));
    }

    const auto tn_ipr = tn::averaged_ipr_series(d, q, N, P.depth, opt);

    // First layer: every pair holds a Haar state of dimension d^2.
    {
        const double expect = std::pow(oracles::haar_ipr(d, 2, q), N / 2);
        const double rel = P.depth >= 1 ? std::abs(tn_ipr[1].value / expect - 1.0) : 0.0;
        out.push_back(entry("tn_vs_oracle_first_layer", rel, 1e-8, "relative, Ibar_q(1) = (I^H_q(d^2))^(N/2)"));
    }

    // Purity of half the chain against the absorbing walk.
    {
        const int cut = N / 2;
        const double base = P.corrupt_k ? 2.0 * d / (d * d + 2.0) : oracles::decay_base(d);
        const int T = std::max(P.depth, 2 * N);
        const auto pur = tn::averaged_purity_series(d, 2, N, cut, T, opt);
        double worst = 0.0;
        for (const auto &p : pur)
            worst = std::max(worst, std::abs(p.value - oracles::walk_purity_with_base(
                                                           base, N, cut, oracles::walk_steps(N, cut, p.t))));
        out.push_back(entry("tn_vs_walk_purity", worst, 1e-8,
                            fmt::format("absolute, n_a={}, t <= {}{}", cut, T, P.corrupt_k ? ", corrupted K" : "")));
    }

    // Monte Carlo against the tensor network.
    {
        exact::EnsembleConfig e;
        e.d = d;
        e.N = N;
        e.depth = P.depth;
        e.qs = {static_cast<double>(q)};
        e.realizations = P.realizations;
        e.seed = P.seed;
        e.purity_cut = N / 2;
        e.threads = P.threads;
        const auto mc = exact::ensemble_run(e);
        const auto pur = tn::averaged_purity_series(d, 2, N, N / 2, P.depth, opt);
        double worst = 0.0, worst_p = 0.0;
        for (const auto &p : mc.points) {
            if (p.t < 1) continue;
            worst = std::max(worst, std::abs(p.ipr_mean - tn_ipr[p.t].value) / p.ipr_stderr);
        }
        for (const auto &p : mc.purity) {
            if (p.t < 1) continue;
            worst_p = std::max(worst_p, std::abs(p.mean - pur[p.t].value) / p.error);
        }
        out.push_back(entry("tn_vs_mc_ipr", worst, 3.0,
                            fmt::format("max |MC - TN| / sigma over 1 <= t <= {}, {} realizations", P.depth,
                                        P.realizations)));
        out.push_back(entry("tn_vs_mc_purity", worst_p, 3.0, "max |MC - TN| / sigma, half-chain purity"));
    }

    // Deep-circuit Shannon entropy against the q -> 1 continuation of the Haar value.
    if (P.include_q1) {
        exact::EnsembleConfig e;
        e.d = d;
        e.N = N;
        e.depth = 5 * N;
        e.qs = {1.0};
        e.realizations = P.realizations;
        e.seed = P.seed + 1;
        e.threads = P.threads;
        const auto mc = exact::ensemble_run(e);
        const auto &last = mc.points.back();
        const double sh = oracles::haar_entropy(d, N, 1);
        out.push_back(entry("q1_exact_vs_oracle", std::abs(last.s_quenched - sh) / last.s_quenched_err, 3.0,
                            fmt::format("S1 at t={}: {} vs {}", last.t, last.s_quenched, sh)));
    }
    return rep;
}

} // namespace qdeloc::harness
