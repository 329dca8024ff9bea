#include "qdeloc/errors.hpp"
#include "qdeloc/replicatn.hpp"

#include <fmt/format.h>

#include <cmath>

namespace qdeloc::tn {

namespace {

std::vector<double> powers_of(int d, int q) {
    std::vector<double> p(static_cast<std::size_t>(q) + 1);
    for (int k = 0; k <= q; ++k) p[static_cast<std::size_t>(k)] = std::pow(static_cast<double>(d), k);
    return p;
}

// <<a|b>> = d^{#(a^-1 b)} on one site.
int pairing_cycles(const perm::PermutationTable &t, int a, int b) { return t.cycle_count(t.compose(t.inverse(a), b)); }

} // namespace

TwoSiteTransfer build_transfer(const perm::PermutationTable &table, const perm::WeingartenTable &wg, int d) {
    const int q = table.order();
    if (d < 2) throw DomainError(fmt::format("local dimension d={} must be >= 2", d));
    if (wg.order() != q || wg.dimension() != static_cast<std::int64_t>(d) * d)
        throw ConfigError(fmt::format("Weingarten table (D={}, q={}) does not match d^2={}, q={}", wg.dimension(),
                                      wg.order(), d * d, q));
    const int n = table.size();
    const auto pw = powers_of(d, q);
    TwoSiteTransfer tr;
    tr.d = d;
    tr.q = q;
    tr.n = n;
    tr.diagonal_output = true;
    tr.dense = Eigen::MatrixXd::Zero(n * n, n * n);
    for (int s = 0; s < n; ++s)
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) {
                double acc = 0.0;
                for (int t = 0; t < n; ++t)
                    acc += wg.value(table.compose(s, table.inverse(t))) *
                           pw[static_cast<std::size_t>(pairing_cycles(table, t, a))] *
                           pw[static_cast<std::size_t>(pairing_cycles(table, t, b))];
                tr.dense(s * n + s, a * n + b) = acc;
            }
    return tr;
}

TwoSiteTransfer build_transfer(int d, int q) {
    const auto table = perm::build_group(q);
    return build_transfer(table, perm::weingarten(table, static_cast<std::int64_t>(d) * d), d);
}

TwoSiteTransfer identity_transfer(int d, int q) {
    const auto table = perm::build_group(q);
    TwoSiteTransfer tr;
    tr.d = d;
    tr.q = q;
    tr.n = table.size();
    tr.diagonal_output = false;
    tr.dense = Eigen::MatrixXd::Identity(tr.n * tr.n, tr.n * tr.n);
    return tr;
}

SiteBoundary lambda_boundary(const perm::PermutationTable &table, int d) {
    return {std::vector<double>(static_cast<std::size_t>(table.size()), static_cast<double>(d)), false};
}

SiteBoundary permutation_boundary(const perm::PermutationTable &table, int d, int sigma) {
    const auto pw = powers_of(d, table.order());
    SiteBoundary b;
    b.weights.resize(static_cast<std::size_t>(table.size()));
    for (int t = 0; t < table.size(); ++t)
        b.weights[static_cast<std::size_t>(t)] = pw[static_cast<std::size_t>(pairing_cycles(table, sigma, t))];
    return b;
}

std::vector<SiteBoundary> domain_wall(const perm::PermutationTable &table, int d, int N, int n_a) {
    if (n_a < 0 || n_a > N) throw UnsupportedRegionError(fmt::format("left block of {} sites on {} sites", n_a, N));
    const auto in_a = permutation_boundary(table, d, table.cycle_index());
    const auto out_a = permutation_boundary(table, d, perm::PermutationTable::identity_index());
    std::vector<SiteBoundary> b;
    for (int j = 0; j < N; ++j) b.push_back(j < n_a ? in_a : out_a);
    return b;
}

std::vector<double> initial_site_vector(const perm::PermutationTable &table, int d) {
    // Gram-dual of the all-ones pairing: v_a = sum_t Wg(d; a t^-1).
    const auto wg = perm::weingarten(table, d);
    std::vector<double> v(static_cast<std::size_t>(table.size()), 0.0);
    for (int a = 0; a < table.size(); ++a)
        for (int t = 0; t < table.size(); ++t)
            v[static_cast<std::size_t>(a)] += wg.value(table.compose(a, table.inverse(t)));
    return v;
}

double LogValue::value() const { return sign == 0 ? 0.0 : sign * std::exp(log_abs); }

} // namespace qdeloc::tn
