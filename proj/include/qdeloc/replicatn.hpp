#pragma once

// Circuit-averaged IPR and purities from the replica tensor network. Each site carries a
// vector in the (nonorthogonal) span of the q! permutation operators; the averaged gate
// maps a pair of such vectors onto the diagonal sum_sigma c_sigma |sigma sigma>>.

#include "qdeloc/permutations.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace qdeloc::tn {

/// Averaged two-site channel in the permutation coefficient basis.
/// Row index sigma1 * n + sigma2 (output), column index alpha * n + beta (input), n = q!.
struct TwoSiteTransfer {
    int d = 0;
    int q = 0;
    int n = 0;
    Eigen::MatrixXd dense;
    /// True when every output is of the form |sigma sigma>>.
    bool diagonal_output = false;

    /// Coefficient of |tau tau>> produced by the input |alpha beta>>.
    double reduced(int tau, int alpha, int beta) const { return dense(tau * n + tau, alpha * n + beta); }
};

/// M[(s,s),(a,b)] = sum_tau Wg(d^2; s tau^-1) d^{#(tau^-1 a) + #(tau^-1 b)}.
TwoSiteTransfer build_transfer(const perm::PermutationTable &table, const perm::WeingartenTable &wg, int d);
TwoSiteTransfer build_transfer(int d, int q);
/// Identity superoperator on two sites (used to exercise the generic update path).
TwoSiteTransfer identity_transfer(int d, int q);

/// Per-site pairings with the permutation basis.
struct SiteBoundary {
    std::vector<double> weights;
    /// False for the participation boundary, which is not in the permutation span.
    bool in_span = true;
};

/// <<Lambda_q|tau>> = d for every tau.
SiteBoundary lambda_boundary(const perm::PermutationTable &table, int d);
/// <<sigma|tau>> = d^{#(sigma^-1 tau)}.
SiteBoundary permutation_boundary(const perm::PermutationTable &table, int d, int sigma);
/// Cyclic permutation on the first n_a sites, identity on the rest.
std::vector<SiteBoundary> domain_wall(const perm::PermutationTable &table, int d, int N, int n_a);
/// Coefficients of |0><0|^{(x)q} projected onto the single-site permutation span (pairing 1 with every tau).
std::vector<double> initial_site_vector(const perm::PermutationTable &table, int d);

struct MpsOptions {
    /// Discarded relative squared singular weight per bond.
    double eps = 1e-15;
    int chi_max = 512;
};

/// Signed number stored as log|x|.
struct LogValue {
    double log_abs = 0.0;
    int sign = 1;
    double value() const;
};

/// Open-boundary MPS over the permutation span with a separate log-scale factor, kept in
/// mixed canonical form (Euclidean metric on the coefficients).
class ReplicaMPS {
  public:
    /// Product state sum_k site_vectors[k] (one vector of length n per site).
    static ReplicaMPS product(int n, const std::vector<std::vector<double>> &site_vectors, MpsOptions options = {});
    /// Output of the first layer on |0...0>: pairs of that parity become c_q sum_sigma |sigma sigma>>;
    /// sites left ungated carry initial_site_vector.
    static ReplicaMPS first_layer(const perm::PermutationTable &table, const TwoSiteTransfer &transfer, int N,
                                  int parity, MpsOptions options = {});

    int sites() const { return static_cast<int>(tensors_.size()); }
    int local_dim() const { return n_; }
    /// Dimension of the bond between site b and b + 1.
    int bond_dim(int b) const;
    int max_bond() const;
    int max_bond_used() const { return max_bond_used_; }
    /// Largest discarded relative weight of any truncation so far.
    double max_discarded() const { return max_discarded_; }
    double log_scale() const { return log_scale_; }
    int center() const { return center_; }
    const MpsOptions &options() const { return options_; }

    /// Apply the transfer to the pairs (i, i+1) with i = parity, parity + 2, ...
    void apply_layer(const TwoSiteTransfer &transfer, int parity);
    /// Apply the transfer to one pair.
    void apply_pair(const TwoSiteTransfer &transfer, int site);

    /// sum over configurations of prod_j boundary[j][sigma_j] * coefficient.
    LogValue contract(std::span<const SiteBoundary> boundary) const;
    LogValue contract(std::span<const std::vector<double>> weights) const;
    /// Single coefficient, including the scale factor.
    double entry(std::span<const int> config) const;

    friend LogValue overlap(const ReplicaMPS &a, const ReplicaMPS &b);

  private:
    ReplicaMPS(int n, MpsOptions options) : n_(n), options_(options) {}
    using Site = std::vector<Eigen::MatrixXd>;

    void move_center(int target);
    void shift_right();
    void shift_left();
    void update_diagonal(const TwoSiteTransfer &transfer, int i, bool left_to_right);
    void update_generic(const TwoSiteTransfer &transfer, int i, bool left_to_right);
    void record_bond(int bond, int dim, double discarded);

    int n_;
    MpsOptions options_;
    std::vector<Site> tensors_;
    double log_scale_ = 0.0;
    int center_ = 0;
    int max_bond_used_ = 1;
    double max_discarded_ = 0.0;
};

/// <<a|b>> in the Euclidean coefficient metric.
LogValue overlap(const ReplicaMPS &a, const ReplicaMPS &b);

struct TnOptions {
    double eps = 1e-15;
    int chi_max = 512;
    /// TN cost grows with (q!)^2 per pair; q = 4 must be requested explicitly.
    bool allow_q4 = false;
};

struct TnPoint {
    int t = 0;
    double log_value = 0.0;
    double value = 0.0;
    int chi_max_used = 1;
    double max_discarded = 0.0;
};

/// Ibar_q(t) for t = 0..t_max, where t counts physical layers (even layer first).
std::vector<TnPoint> averaged_ipr_series(int d, int q, int N, int t_max, const TnOptions &options = {});
TnPoint averaged_ipr(int d, int q, int N, int t, const TnOptions &options = {});

/// Averaged tr(rho_A^q) for the left block of n_a sites, t = 0..t_max.
std::vector<TnPoint> averaged_purity_series(int d, int q, int N, int n_a, int t_max, const TnOptions &options = {});
TnPoint averaged_purity(int d, int q, int N, int n_a, int t, const TnOptions &options = {});

/// General contraction: layers applied bottom-up with the given parities to |0...0>,
/// closed by a per-site product boundary.
TnPoint contract_circuit(int d, int q, int N, std::span<const int> parities, std::span<const SiteBoundary> boundary,
                         const TnOptions &options = {});

/// (d^2+1)^{-N/2} sum over unions A of even pairs of the averaged purity of A after t layers of
/// the circuit read top-down; equals Ibar_2(t + 1). Exhaustive over 2^{N/2} terms, N <= 28.
double sum_over_bipartitions(int d, int N, int t, const TnOptions &options = {});

} // namespace qdeloc::tn
