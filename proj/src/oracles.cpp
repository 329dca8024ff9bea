#include "qdeloc/oracles.hpp"

#include "qdeloc/errors.hpp"

#include <fmt/format.h>

#include <cmath>
#include <limits>
#include <numbers>

namespace qdeloc::oracles {

namespace {

void check_args(int d, int N, int q) {
    if (d < 2) throw DomainError(fmt::format("local dimension d={} must be >= 2", d));
    if (N < 1) throw DomainError(fmt::format("site count N={} must be >= 1", N));
    if (q < 1) throw DomainError(fmt::format("Renyi index q={} must be a positive integer here", q));
}

double log_factorial(int n) { return std::lgamma(static_cast<double>(n) + 1.0); }

// ln(D + k) with D = d^N, without forming D.
double log_shifted(double log_dim, int k) {
    if (k == 0) return log_dim;
    return log_dim + std::log1p(static_cast<double>(k) * std::exp(-log_dim));
}

void check_walk(int N, int z) {
    if (N < 2 || N % 2 != 0) throw DomainError(fmt::format("walk length N={} must be even and >= 2", N));
    if (z < 0 || z > N) throw DomainError(fmt::format("walk start z={} outside [0, {}]", z, N));
}

} // namespace

double haar_log_ipr(int d, int N, int q) {
    check_args(d, N, q);
    const double log_dim = N * std::log(static_cast<double>(d));
    double acc = log_factorial(q);
    for (int k = 1; k < q; ++k) acc -= log_shifted(log_dim, k);
    return acc;
}

double haar_ipr(int d, int N, int q) { return std::exp(haar_log_ipr(d, N, q)); }

std::optional<Rational> haar_ipr_exact(int d, int N, int q) {
    check_args(d, N, q);
    boost::multiprecision::cpp_int dim = 1;
    for (int i = 0; i < N; ++i) dim *= d;
    if (dim >= (boost::multiprecision::cpp_int(1) << 63)) return std::nullopt;
    boost::multiprecision::cpp_int num = 1;
    boost::multiprecision::cpp_int den = 1;
    for (int k = 2; k <= q; ++k) num *= k;
    for (int k = 1; k < q; ++k) den *= dim + k;
    return Rational(num, den);
}

double haar_entropy(int d, int N, int q) {
    check_args(d, N, q);
    if (q > 1) return haar_log_ipr(d, N, q) / (1.0 - q);

    // ln I_q = lnG(q+1) + lnG(D+1) - lnG(D+q), continued to real q.
    constexpr long double h = 1e-4L;
    const long double dim = std::pow(static_cast<long double>(d), static_cast<long double>(N));
    const long double diff = (std::lgamma(2.0L + h) - std::lgamma(2.0L - h)) -
                             (std::lgamma(dim + 1.0L + h) - std::lgamma(dim + 1.0L - h));
    return static_cast<double>(-diff / (2.0L * h));
}

double haar_ipr_second_moment(int d, int N, int q) {
    check_args(d, N, q);
    const double log_dim = N * std::log(static_cast<double>(d));
    const double c = std::exp(log_factorial(2 * q) - 2.0 * log_factorial(q));
    // (q!)^2 (D - 1) + (2q)! = (q!)^2 D (1 + (c - 1)/D)
    double acc = 2.0 * log_factorial(q) + log_dim + std::log1p((c - 1.0) * std::exp(-log_dim));
    for (int k = 1; k < 2 * q; ++k) acc -= log_shifted(log_dim, k);
    return std::exp(acc);
}

double haar_ipr_std(int d, int N, int q) {
    check_args(d, N, q);
    const double log_dim = N * std::log(static_cast<double>(d));
    const double c = std::exp(log_factorial(2 * q) - 2.0 * log_factorial(q));
    // Var / mean^2 = [(D-1) + c] prod_{k<q}(D+k)^2 / prod_{k<2q}(D+k); every factor of D cancels.
    double log_ratio;
    if (log_dim > 600.0) {
        // x = 1/D underflows; keep the leading order x (c - 1 - q^2).
        const double lead = c - 1.0 - static_cast<double>(q) * q;
        if (lead <= 0.0) return 0.0;
        log_ratio = std::log(lead) - log_dim;
    } else {
        const double x = std::exp(-log_dim);
        double l = std::log1p((c - 1.0) * x);
        for (int k = 1; k < q; ++k) l += 2.0 * std::log1p(k * x);
        for (int k = 1; k < 2 * q; ++k) l -= std::log1p(k * x);
        const double rel_var = std::expm1(l);
        if (rel_var <= 0.0) return 0.0;
        log_ratio = std::log(rel_var);
    }
    return std::exp(haar_log_ipr(d, N, q) + 0.5 * log_ratio);
}

HaarStationary haar_stationary(int d, int N, int q) {
    HaarStationary h;
    h.d = d;
    h.N = N;
    h.q = q;
    h.log_ipr = haar_log_ipr(d, N, q);
    h.ipr = std::exp(h.log_ipr);
    h.entropy = haar_entropy(d, N, q);
    h.entropy_extended = (q == 1);
    h.ipr_second_moment = haar_ipr_second_moment(d, N, q);
    h.ipr_std = haar_ipr_std(d, N, q);
    return h;
}

double hopping_weight(int d) {
    if (d < 1) throw DomainError("local dimension must be positive");
    return static_cast<double>(d) / (static_cast<double>(d) * d + 1.0);
}

double decay_base(int d) { return 2.0 * hopping_weight(d); }

double entanglement_velocity(int d) { return -std::log(decay_base(d)); }

AsymptoticConstants asymptotic_constants(int d) {
    AsymptoticConstants c;
    c.d = d;
    c.K = hopping_weight(d);
    c.base = decay_base(d);
    c.velocity = entanglement_velocity(d);
    return c;
}

double walk_absorption(int N, int z, int t) {
    check_walk(N, z);
    if (t < 0) throw DomainError("walk time must be non-negative");
    if (z == 0 || z == N) return t == 0 ? 1.0 : 0.0;
    if (t == 0) return 0.0;
    double acc = 0.0;
    for (int nu = 0; nu < N / 2; ++nu) {
        const double theta = std::numbers::pi * (2 * nu + 1) / N;
        acc += std::sin(theta) * std::pow(std::cos(theta), t - 1) * std::sin(theta * z);
    }
    return 2.0 * acc / N;
}

double walk_survival(int N, int z, int t) {
    check_walk(N, z);
    if (t < 0) throw DomainError("walk time must be non-negative");
    if (z == 0 || z == N) return 0.0;
    if (t == 0) return 1.0;
    double acc = 0.0;
    for (int nu = 0; nu < N / 2; ++nu) {
        const double theta = std::numbers::pi * (2 * nu + 1) / N;
        const double c = std::cos(theta);
        acc += std::sin(theta) * std::sin(theta * z) * std::pow(c, t) / (1.0 - c);
    }
    return 2.0 * acc / N;
}

double walk_absorbed_by(int N, int z, int t) {
    check_walk(N, z);
    if (z == 0 || z == N) return 1.0;
    return 1.0 - walk_survival(N, z, t);
}

double walk_purity(int d, int N, int n_a, int t) { return walk_purity_with_base(decay_base(d), N, n_a, t); }

double walk_purity_with_base(double base, int N, int n_a, int t) {
    check_walk(N, n_a);
    if (t < 0) throw DomainError("walk time must be non-negative");
    double acc = std::pow(base, t) * walk_survival(N, n_a, t);
    for (int s = 0; s <= t; ++s) acc += std::pow(base, s) * walk_absorption(N, n_a, s);
    return acc;
}

int walk_steps(int N, int n_a, int t) {
    if (t < 0) throw DomainError("depth must be non-negative");
    if (n_a <= 0 || n_a >= N || t == 0) return 0;
    const int top = t - 1;
    // Even layers couple (1,2),(3,4),... so they cut through odd bonds; odd layers through even bonds.
    const bool straddled = (top % 2 == 0) == (n_a % 2 == 1);
    return straddled ? t : t - 1;
}

double haar_purity(int d, int N, int n_a) {
    if (n_a < 0 || n_a > N) throw DomainError("block size outside chain");
    const double ld = std::log(static_cast<double>(d));
    // (d^a + d^b)/(d^N + 1) with a + b = N, evaluated in log form.
    const double a = n_a * ld;
    const double b = (N - n_a) * ld;
    const double hi = std::max(a, b);
    const double lo = std::min(a, b);
    const double log_num = hi + std::log1p(std::exp(lo - hi));
    const double log_den = N * ld + std::log1p(std::exp(-N * ld));
    return std::exp(log_num - log_den);
}

double predicted_deficit(int d, int N, int t, double alpha) {
    return alpha * N * std::pow(decay_base(d), t - 1);
}

double hsd_time(int d, int N, double alpha, double eps) {
    if (eps <= 0.0) throw DomainError("tolerance must be positive");
    return 1.0 + std::log(alpha * N / eps) / entanglement_velocity(d);
}

} // namespace qdeloc::oracles
