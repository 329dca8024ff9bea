#include "qdeloc/errors.hpp"
#include "qdeloc/replicatn.hpp"

#include <fmt/format.h>

#include <cmath>

namespace qdeloc::tn {

namespace {

void check_request(int d, int q, int N, const TnOptions &options) {
    if (d < 2) throw DomainError(fmt::format("local dimension d={} must be >= 2", d));
    if (N < 2 || N % 2 != 0) throw LayoutError(fmt::format("chain length N={} must be even and >= 2", N));
    if (q < 1) throw DomainError(fmt::format("replica number q={} must be >= 1", q));
    if (q >= 5 || (q == 4 && !options.allow_q4))
        throw CapacityError(fmt::format("tensor network for q={} is disabled (local dimension {})", q, q == 4 ? 24 : 120));
    if (!(options.eps >= 0.0)) throw ConfigError("truncation eps must be non-negative");
    if (options.chi_max < 1) throw ConfigError("chi_max must be positive");
}

MpsOptions mps_options(const TnOptions &o) { return {o.eps, o.chi_max}; }

TnPoint point(int t, const LogValue &v, const ReplicaMPS *mps) {
    TnPoint p;
    p.t = t;
    if (v.sign <= 0) throw DegeneracyError(fmt::format("contraction at t={} is not positive (sign {})", t, v.sign));
    p.log_value = v.log_abs;
    p.value = v.value();
    if (mps) {
        p.chi_max_used = mps->max_bond_used();
        p.max_discarded = mps->max_discarded();
    }
    return p;
}

std::vector<int> brickwork_parities(int t) {
    std::vector<int> p(static_cast<std::size_t>(std::max(t, 0)));
    for (int k = 0; k < t; ++k) p[static_cast<std::size_t>(k)] = k % 2;
    return p;
}

// Shared driver: contract after every layer.
std::vector<TnPoint> run_series(int d, int q, int N, std::span<const int> parities, std::span<const SiteBoundary> boundary,
                                const TnOptions &options) {
    check_request(d, q, N, options);
    if (static_cast<int>(boundary.size()) != N) throw LayoutError("boundary length differs from the chain");
    std::vector<TnPoint> out;
    out.push_back(point(0, LogValue{0.0, 1}, nullptr));
    if (parities.empty()) return out;
    if (parities[0] == 1 && parities.size() == 1 && (!boundary.front().in_span || !boundary.back().in_span))
        throw ConfigError("an odd first layer leaves the edge sites ungated; the participation boundary needs them gated");

    const auto table = perm::build_group(q);
    const auto wg = perm::weingarten(table, static_cast<std::int64_t>(d) * d);
    const auto tr = build_transfer(table, wg, d);
    auto mps = ReplicaMPS::first_layer(table, tr, N, parities[0], mps_options(options));
    out.push_back(point(1, mps.contract(boundary), &mps));
    for (std::size_t k = 1; k < parities.size(); ++k) {
        mps.apply_layer(tr, parities[k]);
        out.push_back(point(static_cast<int>(k) + 1, mps.contract(boundary), &mps));
    }
    return out;
}

} // namespace

std::vector<TnPoint> averaged_ipr_series(int d, int q, int N, int t_max, const TnOptions &options) {
    if (t_max < 0) throw DomainError("depth must be non-negative");
    check_request(d, q, N, options);
    const auto table = perm::build_group(q);
    const std::vector<SiteBoundary> boundary(static_cast<std::size_t>(N), lambda_boundary(table, d));
    const auto parities = brickwork_parities(t_max);
    return run_series(d, q, N, parities, boundary, options);
}

TnPoint averaged_ipr(int d, int q, int N, int t, const TnOptions &options) {
    return averaged_ipr_series(d, q, N, t, options).back();
}

std::vector<TnPoint> averaged_purity_series(int d, int q, int N, int n_a, int t_max, const TnOptions &options) {
    if (t_max < 0) throw DomainError("depth must be non-negative");
    check_request(d, q, N, options);
    const auto table = perm::build_group(q);
    const auto boundary = domain_wall(table, d, N, n_a);
    const auto parities = brickwork_parities(t_max);
    return run_series(d, q, N, parities, boundary, options);
}

TnPoint averaged_purity(int d, int q, int N, int n_a, int t, const TnOptions &options) {
    return averaged_purity_series(d, q, N, n_a, t, options).back();
}

TnPoint contract_circuit(int d, int q, int N, std::span<const int> parities, std::span<const SiteBoundary> boundary,
                         const TnOptions &options) {
    for (int p : parities)
        if (p != 0 && p != 1) throw LayoutError("layer parity must be 0 or 1");
    return run_series(d, q, N, parities, boundary, options).back();
}

double sum_over_bipartitions(int d, int N, int t, const TnOptions &options) {
    constexpr int q = 2;
    check_request(d, q, N, options);
    if (N > 28) throw CapacityError(fmt::format("exhaustive bipartition sum needs N <= 28, got {}", N));
    if (t < 0) throw DomainError("depth must be non-negative");
    const int pairs = N / 2;
    const double log_norm = -0.5 * N * std::log(static_cast<double>(d) * d + 1.0);
    if (t == 0) return std::exp(log_norm + pairs * std::log(2.0));

    // Reading the circuit top-down turns <<Lambda| into |0...0> and the first layer into the
    // sum over pair labels; the remaining layers t+1, t, ..., 2 act bottom-up.
    std::vector<int> parities;
    for (int k = t + 1; k >= 2; --k) parities.push_back((k - 1) % 2);

    const auto table = perm::build_group(q);
    const auto wg = perm::weingarten(table, static_cast<std::int64_t>(d) * d);
    const auto tr = build_transfer(table, wg, d);
    auto mps = ReplicaMPS::first_layer(table, tr, N, parities[0], mps_options(options));
    for (std::size_t k = 1; k < parities.size(); ++k) mps.apply_layer(tr, parities[k]);

    const auto swap_site = permutation_boundary(table, d, table.cycle_index()).weights;
    const auto id_site = permutation_boundary(table, d, perm::PermutationTable::identity_index()).weights;
    std::vector<std::vector<double>> w(static_cast<std::size_t>(N));
    double max_log = -std::numeric_limits<double>::infinity();
    std::vector<double> logs;
    logs.reserve(std::size_t{1} << pairs);
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << pairs); ++mask) {
        for (int k = 0; k < pairs; ++k) {
            const bool in_a = (mask >> k) & 1u;
            w[static_cast<std::size_t>(2 * k)] = in_a ? swap_site : id_site;
            w[static_cast<std::size_t>(2 * k + 1)] = in_a ? swap_site : id_site;
        }
        const auto v = mps.contract(std::span<const std::vector<double>>(w));
        if (v.sign <= 0) throw DegeneracyError("non-positive purity in bipartition sum");
        logs.push_back(v.log_abs);
        max_log = std::max(max_log, v.log_abs);
    }
    double acc = 0.0;
    for (double l : logs) acc += std::exp(l - max_log);
    return std::exp(log_norm + max_log + std::log(acc));
}

} // namespace qdeloc::tn
