#include "qdeloc/exactsim.hpp"

#include "qdeloc/errors.hpp"

#include <fmt/format.h>

#include <cmath>
#include <limits>
#include <stdexcept>

namespace qdeloc::exact {

namespace {

std::size_t checked_power(int d, int N, std::size_t cap) {
    std::size_t dim = 1;
    for (int i = 0; i < N; ++i) {
        if (dim > cap / static_cast<std::size_t>(d))
            throw CapacityError(fmt::format("state of {} qudits of dimension {} exceeds {} amplitudes", N, d, cap));
        dim *= static_cast<std::size_t>(d);
    }
    return dim;
}

void check_shape(int d, int N) {
    if (d < 2) throw DomainError(fmt::format("local dimension d={} must be >= 2", d));
    if (N < 1) throw DomainError(fmt::format("site count N={} must be >= 1", N));
}

constexpr double kNormDrift = 1e-10;

} // namespace

QuditState::QuditState(int d, int N, std::size_t max_amplitudes) : d_(d), N_(N) {
    check_shape(d, N);
    amps_.assign(checked_power(d, N, max_amplitudes), Complex(0.0, 0.0));
    amps_[0] = 1.0;
}

QuditState QuditState::from_amplitudes(int d, int N, std::vector<Complex> amplitudes) {
    check_shape(d, N);
    const std::size_t dim = checked_power(d, N, std::numeric_limits<std::size_t>::max());
    if (amplitudes.size() != dim)
        throw LayoutError(fmt::format("expected {} amplitudes for N={}, d={}, got {}", dim, N, d, amplitudes.size()));
    QuditState s(d, 1);
    s.N_ = N;
    s.amps_ = std::move(amplitudes);
    return s;
}

std::size_t QuditState::stride(int site) const {
    if (site < 0 || site >= N_) throw LayoutError(fmt::format("site {} outside chain of {}", site, N_));
    std::size_t s = 1;
    for (int k = site + 1; k < N_; ++k) s *= static_cast<std::size_t>(d_);
    return s;
}

double QuditState::norm_squared() const {
    double acc = 0.0;
    for (const auto &a : amps_) acc += std::norm(a);
    return acc;
}

BrickwallLayout::BrickwallLayout(int N, int depth) : N_(N), depth_(depth) {
    if (N < 2 || N % 2 != 0) throw LayoutError(fmt::format("brick wall needs an even N >= 2, got {}", N));
    if (depth < 0) throw LayoutError("depth must be non-negative");
}

std::vector<int> BrickwallLayout::pairs(int layer) const {
    if (layer < 0) throw LayoutError("negative layer index");
    std::vector<int> out;
    for (int i = layer % 2; i + 1 < N_; i += 2) out.push_back(i);
    return out;
}

GateSampler::GateSampler(int d, std::uint64_t seed) : d_(d), seed_(seed) {
    if (d < 2) throw DomainError(fmt::format("local dimension d={} must be >= 2", d));
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
    engine_.seed(seq);
}

GateSampler GateSampler::for_realization(int d, std::uint64_t master_seed, std::uint64_t realization) {
    std::seed_seq seq{static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32),
                      static_cast<std::uint32_t>(realization), static_cast<std::uint32_t>(realization >> 32)};
    std::uint32_t words[2];
    seq.generate(words, words + 2);
    return GateSampler(d, (static_cast<std::uint64_t>(words[1]) << 32) | words[0]);
}

Matrix GateSampler::unitary(int n) {
    if (n < 1) throw DomainError("unitary size must be positive");
    constexpr double inv_sqrt2 = 0.70710678118654752440;
    for (;;) {
        Matrix z(n, n);
        for (int c = 0; c < n; ++c)
            for (int r = 0; r < n; ++r) z(r, c) = Complex(normal_(engine_), normal_(engine_)) * inv_sqrt2;
        Eigen::HouseholderQR<Matrix> qr(z);
        Matrix q = qr.householderQ();
        const auto &packed = qr.matrixQR();
        bool degenerate = false;
        for (int j = 0; j < n; ++j) {
            const double mag = std::abs(packed(j, j));
            if (mag == 0.0) {
                degenerate = true;
                break;
            }
            q.col(j) *= packed(j, j) / mag;
        }
        if (degenerate) continue;
        ++position_;
        return q;
    }
}

Matrix haar_gate(GateSampler &sampler) { return sampler.unitary(sampler.d() * sampler.d()); }

void apply_gate(QuditState &state, int site, const Matrix &U) {
    const int d = state.d();
    const int N = state.sites();
    if (site < 0 || site + 1 >= N)
        throw LayoutError(fmt::format("pair ({}, {}) outside chain of {} sites", site, site + 1, N));
    const int dd = d * d;
    if (U.rows() != dd || U.cols() != dd)
        throw LayoutError(fmt::format("two-site gate must be {}x{}, got {}x{}", dd, dd, U.rows(), U.cols()));

    const std::size_t inner = state.stride(site + 1);
    const std::size_t block = inner * static_cast<std::size_t>(dd);
    const std::size_t outer = state.dim() / block;
    auto amps = state.amplitudes();
    std::vector<Complex> in(static_cast<std::size_t>(dd));
    const Complex *u = U.data();
    for (std::size_t hi = 0; hi < outer; ++hi) {
        Complex *base = amps.data() + hi * block;
        for (std::size_t lo = 0; lo < inner; ++lo) {
            for (int k = 0; k < dd; ++k) in[static_cast<std::size_t>(k)] = base[lo + static_cast<std::size_t>(k) * inner];
            for (int r = 0; r < dd; ++r) {
                Complex acc(0.0, 0.0);
                for (int k = 0; k < dd; ++k) acc += u[r + k * dd] * in[static_cast<std::size_t>(k)];
                base[lo + static_cast<std::size_t>(r) * inner] = acc;
            }
        }
    }
}

void apply_local(QuditState &state, int site, const Matrix &u) {
    const int d = state.d();
    if (site < 0 || site >= state.sites())
        throw LayoutError(fmt::format("site {} outside chain of {}", site, state.sites()));
    if (u.rows() != d || u.cols() != d) throw LayoutError(fmt::format("local gate must be {}x{}", d, d));
    const std::size_t inner = state.stride(site);
    const std::size_t block = inner * static_cast<std::size_t>(d);
    auto amps = state.amplitudes();
    std::vector<Complex> in(static_cast<std::size_t>(d));
    for (std::size_t hi = 0; hi < state.dim() / block; ++hi) {
        Complex *base = amps.data() + hi * block;
        for (std::size_t lo = 0; lo < inner; ++lo) {
            for (int k = 0; k < d; ++k) in[static_cast<std::size_t>(k)] = base[lo + static_cast<std::size_t>(k) * inner];
            for (int r = 0; r < d; ++r) {
                Complex acc(0.0, 0.0);
                for (int k = 0; k < d; ++k) acc += u(r, k) * in[static_cast<std::size_t>(k)];
                base[lo + static_cast<std::size_t>(r) * inner] = acc;
            }
        }
    }
}

std::vector<Participation> participation(const QuditState &state, std::span<const double> qs) {
    for (double q : qs)
        if (!(q > 0.0)) throw DomainError(fmt::format("Renyi index q={} must be positive", q));

    // Small integer q avoids pow in the inner loop.
    std::vector<int> int_power(qs.size(), 0);
    for (std::size_t k = 0; k < qs.size(); ++k)
        if (qs[k] == std::floor(qs[k]) && qs[k] <= 8.0) int_power[k] = static_cast<int>(qs[k]);

    std::vector<double> acc(qs.size(), 0.0);
    for (const auto &a : state.amplitudes()) {
        const double p = std::norm(a);
        if (p == 0.0) continue;
        for (std::size_t k = 0; k < qs.size(); ++k) {
            const int m = int_power[k];
            if (m == 1) {
                acc[k] -= p * std::log(p);
            } else if (m > 1) {
                double v = p;
                for (int j = 1; j < m; ++j) v *= p;
                acc[k] += v;
            } else {
                acc[k] += std::pow(p, qs[k]);
            }
        }
    }

    std::vector<Participation> out(qs.size());
    for (std::size_t k = 0; k < qs.size(); ++k) {
        if (qs[k] == 1.0) {
            out[k].ipr = 1.0;
            out[k].entropy = acc[k];
        } else {
            out[k].ipr = acc[k];
            out[k].entropy = std::log(acc[k]) / (1.0 - qs[k]);
        }
    }
    return out;
}

Participation participation(const QuditState &state, double q) {
    const double qs[] = {q};
    return participation(state, qs).front();
}

double purity_left(const QuditState &state, int n_a) {
    if (n_a < 0 || n_a > state.sites())
        throw UnsupportedRegionError(fmt::format("left block of {} sites on a chain of {}", n_a, state.sites()));
    std::size_t dim_a = 1;
    for (int i = 0; i < n_a; ++i) dim_a *= static_cast<std::size_t>(state.d());
    const std::size_t dim_b = state.dim() / dim_a;
    using RowMajor = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    Eigen::Map<const RowMajor> m(state.amplitudes().data(), static_cast<Eigen::Index>(dim_a),
                                 static_cast<Eigen::Index>(dim_b));
    // tr(rho_A^2) = ||M M^+||_F^2, and M^+ M has the same nonzero spectrum.
    if (dim_a <= dim_b) {
        const Matrix g = m * m.adjoint();
        return g.squaredNorm();
    }
    const Matrix g = m.adjoint() * m;
    return g.squaredNorm();
}

double purity(const QuditState &state, std::span<const int> sites) {
    for (std::size_t k = 0; k < sites.size(); ++k)
        if (sites[k] != static_cast<int>(k))
            throw UnsupportedRegionError("purity supports only blocks {0, 1, ..., n_a - 1} listed in order");
    return purity_left(state, static_cast<int>(sites.size()));
}

namespace {

DepthObservables measure(const QuditState &state, int t, const EvolveOptions &options) {
    DepthObservables obs;
    obs.t = t;
    const auto parts = participation(state, options.qs);
    for (const auto &p : parts) {
        obs.ipr.push_back(p.ipr);
        obs.entropy.push_back(p.entropy);
    }
    if (options.purity_cut) obs.purity = purity_left(state, *options.purity_cut);
    return obs;
}

} // namespace

RealizationRecord evolve(QuditState &state, const BrickwallLayout &layout, GateSampler &sampler,
                         const EvolveOptions &options) {
    if (layout.sites() != state.sites())
        throw LayoutError(fmt::format("layout has {} sites, state has {}", layout.sites(), state.sites()));
    if (sampler.d() != state.d()) throw LayoutError("gate sampler and state have different local dimension");

    RealizationRecord rec;
    rec.seed = sampler.seed();
    if (options.random_local_basis)
        for (int i = 0; i < state.sites(); ++i) apply_local(state, i, sampler.unitary(state.d()));
    rec.depths.push_back(measure(state, 0, options));
    for (int layer = 0; layer < layout.depth(); ++layer) {
        for (int site : layout.pairs(layer)) apply_gate(state, site, haar_gate(sampler));
        const double drift = std::fabs(state.norm_squared() - 1.0);
        if (drift > kNormDrift)
            throw std::logic_error(fmt::format("norm drifted by {:.3e} after layer {}", drift, layer + 1));
        rec.depths.push_back(measure(state, layer + 1, options));
    }
    return rec;
}

} // namespace qdeloc::exact
