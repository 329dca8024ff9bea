#pragma once

// Statevector simulation of brick-wall Haar circuits on an open chain of qudits.

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <utility>
#include <vector>

namespace qdeloc::exact {

using Complex = std::complex<double>;
using Matrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic>;

/// Default cap on d^N.
inline constexpr std::size_t kMaxAmplitudes = std::size_t{1} << 24;

/// Pure state of N qudits. Site 0 is the most significant digit of the amplitude index.
class QuditState {
  public:
    /// |0...0>.
    QuditState(int d, int N, std::size_t max_amplitudes = kMaxAmplitudes);
    static QuditState from_amplitudes(int d, int N, std::vector<Complex> amplitudes);

    int d() const { return d_; }
    int sites() const { return N_; }
    std::size_t dim() const { return amps_.size(); }
    /// d^(N-1-site).
    std::size_t stride(int site) const;

    std::span<const Complex> amplitudes() const { return amps_; }
    std::span<Complex> amplitudes() { return amps_; }
    Complex operator[](std::size_t n) const { return amps_[n]; }

    double norm_squared() const;

  private:
    int d_;
    int N_;
    std::vector<Complex> amps_;
};

/// Alternating brick wall with open ends: even layers couple (0,1),(2,3),..., odd layers (1,2),(3,4),...
class BrickwallLayout {
  public:
    BrickwallLayout(int N, int depth);
    int sites() const { return N_; }
    int depth() const { return depth_; }
    /// Left sites i of the pairs (i, i+1) acted on by layer tau.
    std::vector<int> pairs(int layer) const;

  private:
    int N_;
    int depth_;
};

/// Haar-distributed unitaries from a seeded 64-bit Mersenne twister.
class GateSampler {
  public:
    GateSampler(int d, std::uint64_t seed);
    /// Independent stream for realization r of an ensemble with the given master seed.
    static GateSampler for_realization(int d, std::uint64_t master_seed, std::uint64_t realization);

    int d() const { return d_; }
    std::uint64_t seed() const { return seed_; }
    /// Number of unitaries emitted so far.
    std::uint64_t position() const { return position_; }

    /// n x n Haar unitary.
    Matrix unitary(int n);

  private:
    int d_;
    std::uint64_t seed_;
    std::uint64_t position_ = 0;
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_;
};

/// d^2 x d^2 Haar gate: QR of a complex Ginibre matrix with Q columns multiplied by R_jj/|R_jj|.
Matrix haar_gate(GateSampler &sampler);

/// Apply a d^2 x d^2 unitary to sites (site, site+1). Basis order of U is |a b> -> a*d + b.
void apply_gate(QuditState &state, int site, const Matrix &U);
/// Apply a d x d unitary to one site.
void apply_local(QuditState &state, int site, const Matrix &u);

struct Participation {
    double ipr = 1.0;
    double entropy = 0.0;
};

/// I_q = sum p^q and S_q = ln(I_q)/(1-q); q = 1 gives the Shannon entropy and I_1 = 1.
Participation participation(const QuditState &state, double q);
/// Same for several q with one pass over the amplitudes.
std::vector<Participation> participation(const QuditState &state, std::span<const double> qs);

/// tr(rho_A^2) for A = {0, ..., n_a - 1}.
double purity_left(const QuditState &state, int n_a);
/// tr(rho_A^2) for a site set that must be a left block; anything else raises UnsupportedRegionError.
double purity(const QuditState &state, std::span<const int> sites);

/// Observables after one depth.
struct DepthObservables {
    int t = 0;
    std::vector<double> ipr;     // one per requested q
    std::vector<double> entropy; // one per requested q
    std::optional<double> purity;
};

struct RealizationRecord {
    std::uint64_t seed = 0;
    std::vector<DepthObservables> depths; // t = 0 .. depth
};

struct EvolveOptions {
    std::vector<double> qs{2.0};
    /// Left-block size for the per-depth purity.
    std::optional<int> purity_cut;
    /// Prepend one layer of independent single-site Haar rotations (counted as t = 0).
    bool random_local_basis = false;
};

/// Run the layout on `state`, measuring at t = 0 and after each complete layer.
RealizationRecord evolve(QuditState &state, const BrickwallLayout &layout, GateSampler &sampler,
                         const EvolveOptions &options);

struct EnsembleConfig {
    int d = 2;
    int N = 8;
    int depth = 10;
    std::vector<double> qs{2.0};
    std::uint64_t realizations = 10000;
    std::uint64_t seed = 42;
    std::optional<int> purity_cut;
    bool random_local_basis = false;
    int bootstrap = 200;
    /// 0: use QDELOC_THREADS or the hardware concurrency.
    int threads = 0;
};

struct EnsemblePoint {
    int t = 0;
    double q = 0.0;
    double ipr_mean = 0.0;
    double ipr_stderr = 0.0;
    /// Sample standard deviation of I_q across realizations.
    double ipr_std = 0.0;
    double s_annealed = 0.0;
    double s_annealed_err = 0.0;
    double s_quenched = 0.0;
    double s_quenched_err = 0.0;
};

struct PurityPoint {
    int t = 0;
    double mean = 0.0;
    double error = 0.0;
};

struct EnsembleResult {
    EnsembleConfig config;
    std::vector<EnsemblePoint> points; // ordered by t, then q
    std::vector<PurityPoint> purity;   // empty unless purity_cut is set
    std::uint64_t realizations = 0;
};

/// Independent realizations seeded from (seed, r); bootstrap errors over realizations.
/// For q = 1 the annealed entropy is reported as the quenched Shannon mean.
EnsembleResult ensemble_run(const EnsembleConfig &config);

/// Per-realization records of an ensemble, in realization order.
std::vector<RealizationRecord> ensemble_records(const EnsembleConfig &config);

} // namespace qdeloc::exact
