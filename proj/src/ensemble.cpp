#include "qdeloc/exactsim.hpp"
#include "qdeloc/parallel.hpp"

#include "qdeloc/errors.hpp"

#include <fmt/format.h>

#include <cmath>

namespace qdeloc::exact {

namespace {

void validate(const EnsembleConfig &c) {
    if (c.realizations < 1) throw ConfigError("ensemble needs at least one realization");
    if (c.depth < 0) throw ConfigError("depth must be non-negative");
    if (c.qs.empty()) throw ConfigError("no Renyi index requested");
    if (c.bootstrap < 1) throw ConfigError("bootstrap needs at least one resample");
    for (double q : c.qs)
        if (!(q > 0.0)) throw DomainError(fmt::format("Renyi index q={} must be positive", q));
    if (c.purity_cut && (*c.purity_cut < 0 || *c.purity_cut > c.N))
        throw ConfigError(fmt::format("purity cut {} outside chain of {}", *c.purity_cut, c.N));
}

EvolveOptions options_for(const EnsembleConfig &c) {
    EvolveOptions o;
    o.qs = c.qs;
    o.purity_cut = c.purity_cut;
    o.random_local_basis = c.random_local_basis;
    return o;
}

RealizationRecord run_one(const EnsembleConfig &c, const BrickwallLayout &layout, const EvolveOptions &o,
                          std::uint64_t r) {
    QuditState state(c.d, c.N);
    auto sampler = GateSampler::for_realization(c.d, c.seed, r);
    return evolve(state, layout, sampler, o);
}

double stddev(double sum, double sum_sq, double n) {
    if (n < 2.0) return 0.0;
    const double mean = sum / n;
    return std::sqrt(std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0)));
}

} // namespace

std::vector<RealizationRecord> ensemble_records(const EnsembleConfig &config) {
    validate(config);
    const BrickwallLayout layout(config.N, config.depth);
    const auto opts = options_for(config);
    std::vector<RealizationRecord> out(config.realizations);
    parallel_for(config.realizations, worker_count(config.threads),
                 [&](std::uint64_t r) { out[r] = run_one(config, layout, opts, r); });
    return out;
}

EnsembleResult ensemble_run(const EnsembleConfig &config) {
    validate(config);
    const BrickwallLayout layout(config.N, config.depth);
    const auto opts = options_for(config);
    const std::size_t R = config.realizations;
    const std::size_t depths = static_cast<std::size_t>(config.depth) + 1;
    const std::size_t nq = config.qs.size();
    const bool with_purity = config.purity_cut.has_value();

    // Row r holds [I(t,q)..., S(t,q)..., P(t)...] for realization r.
    const std::size_t ni = depths * nq;
    const std::size_t width = 2 * ni + (with_purity ? depths : 0);
    std::vector<double> table(R * width);

    parallel_for(R, worker_count(config.threads), [&](std::uint64_t r) {
        const auto rec = run_one(config, layout, opts, r);
        double *row = table.data() + r * width;
        for (std::size_t t = 0; t < depths; ++t) {
            for (std::size_t k = 0; k < nq; ++k) {
                row[t * nq + k] = rec.depths[t].ipr[k];
                row[ni + t * nq + k] = rec.depths[t].entropy[k];
            }
            if (with_purity) row[2 * ni + t] = *rec.depths[t].purity;
        }
    });

    // Plain moments.
    std::vector<double> sum(width, 0.0), sum_sq(width, 0.0);
    for (std::size_t r = 0; r < R; ++r) {
        const double *row = table.data() + r * width;
        for (std::size_t j = 0; j < width; ++j) {
            sum[j] += row[j];
            sum_sq[j] += row[j] * row[j];
        }
    }
    const double n = static_cast<double>(R);

    // Bootstrap over realizations: the same resample draws serve every column.
    const auto B = static_cast<std::size_t>(config.bootstrap);
    std::vector<double> boot(B * width, 0.0);
    std::seed_seq seq{static_cast<std::uint32_t>(config.seed), static_cast<std::uint32_t>(config.seed >> 32), 0xb0075u};
    std::mt19937_64 rng(seq);
    std::uniform_int_distribution<std::size_t> pick(0, R - 1);
    std::vector<std::uint32_t> counts(R);
    for (std::size_t b = 0; b < B; ++b) {
        std::fill(counts.begin(), counts.end(), 0u);
        for (std::size_t i = 0; i < R; ++i) ++counts[pick(rng)];
        double *acc = boot.data() + b * width;
        for (std::size_t r = 0; r < R; ++r) {
            if (counts[r] == 0) continue;
            const double w = counts[r];
            const double *row = table.data() + r * width;
            for (std::size_t j = 0; j < width; ++j) acc[j] += w * row[j];
        }
        for (std::size_t j = 0; j < width; ++j) acc[j] /= n;
    }
    std::vector<double> vals(B);
    auto boot_std = [&](auto &&f) {
        if (B < 2) return 0.0;
        double mean = 0.0;
        for (std::size_t b = 0; b < B; ++b) mean += (vals[b] = f(boot.data() + b * width));
        mean /= static_cast<double>(B);
        double ss = 0.0;
        for (double v : vals) ss += (v - mean) * (v - mean);
        return std::sqrt(ss / static_cast<double>(B - 1));
    };

    EnsembleResult out;
    out.config = config;
    out.realizations = R;
    for (std::size_t t = 0; t < depths; ++t) {
        for (std::size_t k = 0; k < nq; ++k) {
            const double q = config.qs[k];
            const std::size_t ji = t * nq + k;
            const std::size_t js = ni + ji;
            EnsemblePoint p;
            p.t = static_cast<int>(t);
            p.q = q;
            p.ipr_mean = sum[ji] / n;
            p.ipr_std = stddev(sum[ji], sum_sq[ji], n);
            p.ipr_stderr = boot_std([&](const double *m) { return m[ji]; });
            p.s_quenched = sum[js] / n;
            p.s_quenched_err = boot_std([&](const double *m) { return m[js]; });
            if (q == 1.0) {
                p.s_annealed = p.s_quenched;
                p.s_annealed_err = p.s_quenched_err;
            } else {
                p.s_annealed = std::log(p.ipr_mean) / (1.0 - q);
                p.s_annealed_err = boot_std([&](const double *m) { return std::log(m[ji]) / (1.0 - q); });
            }
            out.points.push_back(p);
        }
        if (with_purity) {
            const std::size_t jp = 2 * ni + t;
            out.purity.push_back({static_cast<int>(t), sum[jp] / n, boot_std([&](const double *m) { return m[jp]; })});
        }
    }
    return out;
}

} // namespace qdeloc::exact
