#pragma once

// Closed-form ground truth: Haar-random stationary values, the absorbing random
// walk of a single two-replica domain wall, and the asymptotic decay constants.

#include <boost/multiprecision/cpp_int.hpp>

#include <optional>

namespace qdeloc::oracles {

using Rational = boost::multiprecision::cpp_rational;

/// Stationary IPR statistics of a Haar-random state on N qudits of dimension d.
struct HaarStationary {
    int d = 0;
    int N = 0;
    int q = 0;
    double ipr = 0.0;
    double log_ipr = 0.0;
    double entropy = 0.0;
    /// True when the entropy is the numerical q -> 1 continuation rather than a closed form.
    bool entropy_extended = false;
    double ipr_second_moment = 0.0;
    double ipr_std = 0.0;
};

/// ln of q!/((D+1)(D+2)...(D+q-1)), D = d^N. Valid for any N (no overflow).
double haar_log_ipr(int d, int N, int q);
double haar_ipr(int d, int N, int q);
/// Exact value when d^N < 2^63.
std::optional<Rational> haar_ipr_exact(int d, int N, int q);

/// Annealed Renyi entropy (1-q)^-1 ln I_q^H. For q = 1 the value is the two-sided
/// finite difference of ln I_q at q = 1 +- 1e-4 of the Gamma-function continuation.
double haar_entropy(int d, int N, int q);

/// E[I_q^2] = ((q!)^2 (D-1) + (2q)!)/((D+1)...(D+2q-1)).
double haar_ipr_second_moment(int d, int N, int q);
double haar_ipr_std(int d, int N, int q);

HaarStationary haar_stationary(int d, int N, int q);

/// K_d = d/(d^2+1).
double hopping_weight(int d);
/// 2 K_d, the per-layer decay base of the entropy deficit.
double decay_base(int d);
/// v_d = -ln(2 K_d).
double entanglement_velocity(int d);

struct AsymptoticConstants {
    int d = 0;
    double K = 0.0;
    double base = 0.0;
    double velocity = 0.0;
    static constexpr double alpha_large_d = 0.5;
    static constexpr double alpha_qubit_q2 = 0.291;
    static constexpr double alpha_qubit_q2_err = 0.005;
    static constexpr double prefactor_qubit_q3 = 0.76;
};
AsymptoticConstants asymptotic_constants(int d);

/// Probability that a symmetric +-1 walk started at z on {0..N} is first absorbed
/// at step t. Interior z: spectral sum for t >= 1 and 0 at t = 0. Boundary z: 1 at t = 0.
double walk_absorption(int N, int z, int t);
/// Probability of absorption at or before step t. Obeys the two-step recursion with
/// boundary data u_{0,t} = u_{N,t} = 1 and u_{z,0} = delta_{z,0} + delta_{z,N}.
double walk_absorbed_by(int N, int z, int t);
/// Sum over s > t of walk_absorption(N, z, s), from the geometric resummation of the spectral form.
double walk_survival(int N, int z, int t);

/// Averaged two-replica purity of the left block of n_a sites after t wall-moving steps:
/// (2K)^t P(T > t) + sum_{s <= t} (2K)^s P(T = s).
double walk_purity(int d, int N, int n_a, int t);
/// Same with an arbitrary per-step weight in place of 2 K_d.
double walk_purity_with_base(double base, int N, int n_a, int t);

/// Number of the first t brick-wall layers (even bonds first) that move a domain wall
/// sitting at cut n_a when the layers are traversed from the top. Open chain of N sites.
int walk_steps(int N, int n_a, int t);

/// Haar stationary purity of an n_a-site block: (d^{n_a} + d^{N-n_a})/(d^N + 1).
double haar_purity(int d, int N, int n_a);

/// alpha N (2K_d)^{t-1}.
double predicted_deficit(int d, int N, int t, double alpha);
/// Depth at which the predicted deficit falls to eps: 1 + ln(alpha N/eps)/(-ln 2K_d).
double hsd_time(int d, int N, double alpha, double eps);

} // namespace qdeloc::oracles
