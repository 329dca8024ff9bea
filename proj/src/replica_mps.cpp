#include "qdeloc/errors.hpp"
#include "qdeloc/replicatn.hpp"
#include "thin_svd.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace qdeloc::tn {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;

// Relative squared singular value treated as zero: (1e-12)^2.
constexpr double kNoiseFloor = 1e-24;

struct Triplet {
    int block;
    Index column;
    double weight; // squared singular value
};

// Indices of rows (or columns) that are not identically zero.
std::vector<Index> nonzero_rows(const MatrixXd &m) {
    std::vector<Index> out;
    for (Index r = 0; r < m.rows(); ++r)
        if (m.row(r).cwiseAbs().maxCoeff() > 0.0) out.push_back(r);
    return out;
}

std::vector<Index> nonzero_cols(const MatrixXd &m) {
    std::vector<Index> out;
    for (Index c = 0; c < m.cols(); ++c)
        if (m.col(c).cwiseAbs().maxCoeff() > 0.0) out.push_back(c);
    return out;
}

// Keep the largest weights whose complement carries at most eps of the total.
std::vector<Triplet> truncate(std::vector<Triplet> all, double eps, double &discarded) {
    double total = 0.0;
    for (const auto &t : all) total += t.weight;
    std::sort(all.begin(), all.end(), [](const Triplet &a, const Triplet &b) { return a.weight > b.weight; });
    if (!std::isfinite(total)) throw DegeneracyError("non-finite singular values in bond update");
    // Singular values below round-off of the largest one are noise; drop them whatever eps is,
    // then the tail under the threshold.
    const double floor = all.empty() ? 0.0 : all.front().weight * kNoiseFloor;
    while (!all.empty() && all.back().weight <= floor) all.pop_back();
    double dropped = 0.0;
    while (all.size() > 1 && dropped + all.back().weight <= eps * total) {
        dropped += all.back().weight;
        all.pop_back();
    }
    discarded = total > 0.0 ? dropped / total : 0.0;
    return all;
}

} // namespace

ReplicaMPS ReplicaMPS::product(int n, const std::vector<std::vector<double>> &site_vectors, MpsOptions options) {
    if (site_vectors.empty()) throw LayoutError("MPS needs at least one site");
    ReplicaMPS m(n, options);
    for (const auto &v : site_vectors) {
        if (static_cast<int>(v.size()) != n) throw LayoutError("site vector length differs from the local dimension");
        double norm = 0.0;
        for (double x : v) norm += x * x;
        norm = std::sqrt(norm);
        if (norm == 0.0) throw DegeneracyError("zero site vector in product state");
        Site s(static_cast<std::size_t>(n), MatrixXd::Zero(1, 1));
        for (int a = 0; a < n; ++a) s[static_cast<std::size_t>(a)](0, 0) = v[static_cast<std::size_t>(a)] / norm;
        m.tensors_.push_back(std::move(s));
        m.log_scale_ += std::log(norm);
    }
    m.center_ = 0;
    return m;
}

ReplicaMPS ReplicaMPS::first_layer(const perm::PermutationTable &table, const TwoSiteTransfer &transfer, int N,
                                   int parity, MpsOptions options) {
    if (N < 2 || N % 2 != 0) throw LayoutError(fmt::format("chain length N={} must be even and >= 2", N));
    if (parity != 0 && parity != 1) throw LayoutError("layer parity must be 0 or 1");
    if (transfer.n != table.size() || transfer.q != table.order())
        throw ConfigError("transfer and permutation table disagree on q");
    const int n = transfer.n;
    const perm::Rational c_exact = perm::weingarten_sum_rule(static_cast<std::int64_t>(transfer.d) * transfer.d, transfer.q);
    const double log_c = std::log(static_cast<double>(c_exact));

    ReplicaMPS m(n, options);
    m.tensors_.resize(static_cast<std::size_t>(N));
    const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));
    auto single = [&](int j) {
        const auto v = initial_site_vector(table, transfer.d);
        double norm = 0.0;
        for (double x : v) norm += x * x;
        norm = std::sqrt(norm);
        Site s(static_cast<std::size_t>(n), MatrixXd::Zero(1, 1));
        for (int a = 0; a < n; ++a) s[static_cast<std::size_t>(a)](0, 0) = v[static_cast<std::size_t>(a)] / norm;
        m.tensors_[static_cast<std::size_t>(j)] = std::move(s);
        m.log_scale_ += std::log(norm);
    };
    if (parity == 1) {
        single(0);
        single(N - 1);
    }
    for (int i = parity; i + 1 < N; i += 2) {
        Site left(static_cast<std::size_t>(n), MatrixXd::Zero(1, n));
        Site right(static_cast<std::size_t>(n), MatrixXd::Zero(n, 1));
        for (int a = 0; a < n; ++a) {
            left[static_cast<std::size_t>(a)](0, a) = inv_sqrt_n;
            right[static_cast<std::size_t>(a)](a, 0) = 1.0;
        }
        m.tensors_[static_cast<std::size_t>(i)] = std::move(left);
        m.tensors_[static_cast<std::size_t>(i) + 1] = std::move(right);
        m.log_scale_ += log_c + 0.5 * std::log(static_cast<double>(n));
        m.max_bond_used_ = std::max(m.max_bond_used_, n);
    }
    m.center_ = 0;
    return m;
}

int ReplicaMPS::bond_dim(int b) const {
    if (b < 0 || b + 1 >= sites()) throw LayoutError(fmt::format("bond {} outside chain", b));
    return static_cast<int>(tensors_[static_cast<std::size_t>(b)][0].cols());
}

int ReplicaMPS::max_bond() const {
    int m = 1;
    for (int b = 0; b + 1 < sites(); ++b) m = std::max(m, bond_dim(b));
    return m;
}

void ReplicaMPS::record_bond(int bond, int dim, double discarded) {
    if (dim > options_.chi_max)
        throw CapacityError(fmt::format("bond {} needs dimension {} > chi_max {} at eps {:g}", bond, dim,
                                        options_.chi_max, options_.eps));
    max_bond_used_ = std::max(max_bond_used_, dim);
    max_discarded_ = std::max(max_discarded_, discarded);
}

// Center moves one site right: QR of the stacked tensor, R pushed into the neighbour.
void ReplicaMPS::shift_right() {
    const int i = center_;
    auto &A = tensors_[static_cast<std::size_t>(i)];
    const Index rows = A[0].rows();
    const Index cols = A[0].cols();
    MatrixXd stacked(rows * n_, cols);
    for (int a = 0; a < n_; ++a) stacked.middleRows(a * rows, rows) = A[static_cast<std::size_t>(a)];
    const auto keep = nonzero_rows(stacked);
    if (keep.empty()) throw DegeneracyError(fmt::format("site {} tensor vanished", i));
    const MatrixXd compact = stacked(keep, Eigen::all);
    Eigen::HouseholderQR<MatrixXd> qr(compact);
    const Index k = std::min<Index>(compact.rows(), cols);
    const MatrixXd q = qr.householderQ() * MatrixXd::Identity(compact.rows(), k);
    const MatrixXd r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
    MatrixXd full = MatrixXd::Zero(rows * n_, k);
    for (std::size_t j = 0; j < keep.size(); ++j) full.row(keep[j]) = q.row(static_cast<Index>(j));
    for (int a = 0; a < n_; ++a) A[static_cast<std::size_t>(a)] = full.middleRows(a * rows, rows);
    for (auto &B : tensors_[static_cast<std::size_t>(i) + 1]) B = r * B;
    ++center_;
}

// Center moves one site left: LQ of the side-by-side tensor, L pushed into the neighbour.
void ReplicaMPS::shift_left() {
    const int i = center_;
    auto &A = tensors_[static_cast<std::size_t>(i)];
    const Index rows = A[0].rows();
    const Index cols = A[0].cols();
    MatrixXd wide(rows, cols * n_);
    for (int a = 0; a < n_; ++a) wide.middleCols(a * cols, cols) = A[static_cast<std::size_t>(a)];
    const auto keep = nonzero_cols(wide);
    if (keep.empty()) throw DegeneracyError(fmt::format("site {} tensor vanished", i));
    const MatrixXd compact_t = wide(Eigen::all, keep).transpose();
    Eigen::HouseholderQR<MatrixXd> qr(compact_t);
    const Index k = std::min<Index>(compact_t.rows(), rows);
    const MatrixXd q = qr.householderQ() * MatrixXd::Identity(compact_t.rows(), k);
    const MatrixXd l = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>().toDenseMatrix().transpose();
    MatrixXd full = MatrixXd::Zero(k, cols * n_);
    for (std::size_t j = 0; j < keep.size(); ++j) full.col(keep[j]) = q.row(static_cast<Index>(j)).transpose();
    for (int a = 0; a < n_; ++a) A[static_cast<std::size_t>(a)] = full.middleCols(a * cols, cols);
    for (auto &B : tensors_[static_cast<std::size_t>(i) - 1]) B = B * l;
    --center_;
}

void ReplicaMPS::move_center(int target) {
    while (center_ < target) shift_right();
    while (center_ > target) shift_left();
}

void ReplicaMPS::update_diagonal(const TwoSiteTransfer &tr, int i, bool left_to_right) {
    auto &A = tensors_[static_cast<std::size_t>(i)];
    auto &B = tensors_[static_cast<std::size_t>(i) + 1];
    const Index rows = A[0].rows();
    const Index cols = B[0].cols();

    // X_tau = sum_{a,b} M(tau; a, b) A[a] B[b], using the row/column supports of each slice.
    std::vector<MatrixXd> X(static_cast<std::size_t>(n_), MatrixXd::Zero(rows, cols));
    std::vector<std::vector<Index>> arows(static_cast<std::size_t>(n_)), bcols(static_cast<std::size_t>(n_));
    for (int a = 0; a < n_; ++a) {
        arows[static_cast<std::size_t>(a)] = nonzero_rows(A[static_cast<std::size_t>(a)]);
        bcols[static_cast<std::size_t>(a)] = nonzero_cols(B[static_cast<std::size_t>(a)]);
    }
    for (int a = 0; a < n_; ++a) {
        const auto &ra = arows[static_cast<std::size_t>(a)];
        if (ra.empty()) continue;
        const MatrixXd Asub = A[static_cast<std::size_t>(a)](ra, Eigen::all);
        for (int b = 0; b < n_; ++b) {
            const auto &cb = bcols[static_cast<std::size_t>(b)];
            if (cb.empty()) continue;
            bool any = false;
            for (int t = 0; t < n_ && !any; ++t) any = tr.reduced(t, a, b) != 0.0;
            if (!any) continue;
            const MatrixXd theta = Asub * B[static_cast<std::size_t>(b)](Eigen::all, cb);
            for (int t = 0; t < n_; ++t) {
                const double w = tr.reduced(t, a, b);
                if (w != 0.0) X[static_cast<std::size_t>(t)](ra, cb) += w * theta;
            }
        }
    }

    std::vector<detail::ThinSvd> svds;
    svds.reserve(static_cast<std::size_t>(n_));
    std::vector<Triplet> all;
    for (int t = 0; t < n_; ++t) {
        svds.push_back(detail::thin_svd(X[static_cast<std::size_t>(t)]));
        const auto &s = svds.back().s;
        for (Index k = 0; k < s.size(); ++k) all.push_back({t, k, s(k) * s(k)});
    }
    double discarded = 0.0;
    const auto kept = truncate(std::move(all), options_.eps, discarded);
    if (kept.empty()) throw DegeneracyError(fmt::format("pair ({}, {}) maps to zero", i, i + 1));
    double norm2 = 0.0;
    for (const auto &k : kept) norm2 += k.weight;
    const double norm = std::sqrt(norm2);
    log_scale_ += std::log(norm);
    const Index chi = static_cast<Index>(kept.size());
    record_bond(i, static_cast<int>(chi), discarded);

    for (int a = 0; a < n_; ++a) {
        A[static_cast<std::size_t>(a)] = MatrixXd::Zero(rows, chi);
        B[static_cast<std::size_t>(a)] = MatrixXd::Zero(chi, cols);
    }
    for (Index c = 0; c < chi; ++c) {
        const auto &k = kept[static_cast<std::size_t>(c)];
        const auto &svd = svds[static_cast<std::size_t>(k.block)];
        const double s = std::sqrt(k.weight) / norm;
        const auto t = static_cast<std::size_t>(k.block);
        if (left_to_right) {
            A[t].col(c) = svd.u.col(k.column);
            B[t].row(c) = s * svd.v.col(k.column).transpose();
        } else {
            A[t].col(c) = s * svd.u.col(k.column);
            B[t].row(c) = svd.v.col(k.column).transpose();
        }
    }
    center_ = left_to_right ? i + 1 : i;
}

void ReplicaMPS::update_generic(const TwoSiteTransfer &tr, int i, bool left_to_right) {
    auto &A = tensors_[static_cast<std::size_t>(i)];
    auto &B = tensors_[static_cast<std::size_t>(i) + 1];
    const Index rows = A[0].rows();
    const Index cols = B[0].cols();
    std::vector<MatrixXd> theta(static_cast<std::size_t>(n_ * n_));
    for (int a = 0; a < n_; ++a)
        for (int b = 0; b < n_; ++b)
            theta[static_cast<std::size_t>(a * n_ + b)] = A[static_cast<std::size_t>(a)] * B[static_cast<std::size_t>(b)];
    MatrixXd big = MatrixXd::Zero(rows * n_, cols * n_);
    for (int g = 0; g < n_; ++g)
        for (int h = 0; h < n_; ++h) {
            auto blk = big.block(g * rows, h * cols, rows, cols);
            for (int ab = 0; ab < n_ * n_; ++ab) {
                const double w = tr.dense(g * n_ + h, ab);
                if (w != 0.0) blk += w * theta[static_cast<std::size_t>(ab)];
            }
        }
    const auto svd = detail::thin_svd(big);
    std::vector<Triplet> all;
    const auto &s = svd.s;
    for (Index k = 0; k < s.size(); ++k) all.push_back({0, k, s(k) * s(k)});
    double discarded = 0.0;
    const auto kept = truncate(std::move(all), options_.eps, discarded);
    if (kept.empty()) throw DegeneracyError(fmt::format("pair ({}, {}) maps to zero", i, i + 1));
    double norm2 = 0.0;
    for (const auto &k : kept) norm2 += k.weight;
    const double norm = std::sqrt(norm2);
    log_scale_ += std::log(norm);
    const Index chi = static_cast<Index>(kept.size());
    record_bond(i, static_cast<int>(chi), discarded);
    for (int a = 0; a < n_; ++a) {
        A[static_cast<std::size_t>(a)] = MatrixXd::Zero(rows, chi);
        B[static_cast<std::size_t>(a)] = MatrixXd::Zero(chi, cols);
    }
    for (Index c = 0; c < chi; ++c) {
        const auto &k = kept[static_cast<std::size_t>(c)];
        const double sv = std::sqrt(k.weight) / norm;
        const double ls = left_to_right ? 1.0 : sv;
        const double rs = left_to_right ? sv : 1.0;
        for (int g = 0; g < n_; ++g) {
            A[static_cast<std::size_t>(g)].col(c) = ls * svd.u.col(k.column).segment(g * rows, rows);
            B[static_cast<std::size_t>(g)].row(c) = rs * svd.v.col(k.column).segment(g * cols, cols).transpose();
        }
    }
    center_ = left_to_right ? i + 1 : i;
}

void ReplicaMPS::apply_pair(const TwoSiteTransfer &tr, int site) {
    if (tr.n != n_) throw ConfigError("transfer local dimension differs from the MPS");
    if (site < 0 || site + 1 >= sites()) throw LayoutError(fmt::format("pair ({}, {}) outside chain", site, site + 1));
    const bool ltr = center_ <= site;
    move_center(ltr ? site : site + 1);
    if (tr.diagonal_output)
        update_diagonal(tr, site, ltr);
    else
        update_generic(tr, site, ltr);
}

void ReplicaMPS::apply_layer(const TwoSiteTransfer &tr, int parity) {
    if (parity != 0 && parity != 1) throw LayoutError("layer parity must be 0 or 1");
    std::vector<int> pairs;
    for (int i = parity; i + 1 < sites(); i += 2) pairs.push_back(i);
    if (pairs.empty()) return;
    // Sweep away from whichever end the center is nearer to.
    if (center_ - pairs.front() > pairs.back() + 1 - center_) std::reverse(pairs.begin(), pairs.end());
    for (int i : pairs) apply_pair(tr, i);
}

LogValue ReplicaMPS::contract(std::span<const std::vector<double>> weights) const {
    if (static_cast<int>(weights.size()) != sites()) throw LayoutError("boundary length differs from the chain");
    Eigen::RowVectorXd v = Eigen::RowVectorXd::Ones(1);
    double log_acc = log_scale_;
    for (int j = 0; j < sites(); ++j) {
        const auto &w = weights[static_cast<std::size_t>(j)];
        if (static_cast<int>(w.size()) != n_) throw LayoutError("boundary vector length differs from q!");
        const auto &A = tensors_[static_cast<std::size_t>(j)];
        Eigen::RowVectorXd next = Eigen::RowVectorXd::Zero(A[0].cols());
        for (int a = 0; a < n_; ++a)
            if (w[static_cast<std::size_t>(a)] != 0.0) next += w[static_cast<std::size_t>(a)] * (v * A[static_cast<std::size_t>(a)]);
        const double scale = next.cwiseAbs().maxCoeff();
        if (scale == 0.0) return {-std::numeric_limits<double>::infinity(), 0};
        log_acc += std::log(scale);
        v = next / scale;
    }
    const double last = v(0);
    return {log_acc + std::log(std::fabs(last)), last > 0.0 ? 1 : (last < 0.0 ? -1 : 0)};
}

LogValue ReplicaMPS::contract(std::span<const SiteBoundary> boundary) const {
    std::vector<std::vector<double>> w;
    w.reserve(boundary.size());
    for (const auto &b : boundary) w.push_back(b.weights);
    return contract(std::span<const std::vector<double>>(w));
}

double ReplicaMPS::entry(std::span<const int> config) const {
    if (static_cast<int>(config.size()) != sites()) throw LayoutError("configuration length differs from the chain");
    Eigen::RowVectorXd v = Eigen::RowVectorXd::Ones(1);
    for (int j = 0; j < sites(); ++j) v = v * tensors_[static_cast<std::size_t>(j)][static_cast<std::size_t>(config[static_cast<std::size_t>(j)])];
    return v(0) * std::exp(log_scale_);
}

LogValue overlap(const ReplicaMPS &a, const ReplicaMPS &b) {
    if (a.sites() != b.sites() || a.n_ != b.n_) throw LayoutError("overlap of MPS with different shapes");
    MatrixXd e = MatrixXd::Ones(1, 1);
    double log_acc = a.log_scale_ + b.log_scale_;
    for (int j = 0; j < a.sites(); ++j) {
        MatrixXd next = MatrixXd::Zero(a.tensors_[static_cast<std::size_t>(j)][0].cols(), b.tensors_[static_cast<std::size_t>(j)][0].cols());
        for (int s = 0; s < a.n_; ++s)
            next += a.tensors_[static_cast<std::size_t>(j)][static_cast<std::size_t>(s)].transpose() * e *
                    b.tensors_[static_cast<std::size_t>(j)][static_cast<std::size_t>(s)];
        const double scale = next.cwiseAbs().maxCoeff();
        if (scale == 0.0) return {-std::numeric_limits<double>::infinity(), 0};
        log_acc += std::log(scale);
        e = next / scale;
    }
    const double last = e(0, 0);
    return {log_acc + std::log(std::fabs(last)), last > 0.0 ? 1 : (last < 0.0 ? -1 : 0)};
}

} // namespace qdeloc::tn
