#include "qdeloc/fit.hpp"
#include "qdeloc/errors.hpp"

#include <Eigen/Dense>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace qdeloc::harness {

namespace {

struct Design {
    Eigen::MatrixXd X;
    Eigen::VectorXd y;
    Eigen::VectorXd sigma; // of y; zero when unweighted
    std::vector<std::size_t> curve_of_row;
};

Eigen::VectorXd solve(const Design &D, const Eigen::VectorXd &y, const Eigen::VectorXd &w) {
    const Eigen::MatrixXd A = D.X.transpose() * w.asDiagonal() * D.X;
    const Eigen::VectorXd b = D.X.transpose() * (w.asDiagonal() * y);
    return A.ldlt().solve(b);
}

double quantile(std::vector<double> v, double p) {
    std::sort(v.begin(), v.end());
    const double pos = p * (v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - lo) * (v[hi] - v[lo]);
}

} // namespace

std::vector<std::size_t> window_points(const DeficitCurve &c, const FitWindow &w) {
    std::vector<std::size_t> idx(c.t.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return c.t[a] < c.t[b]; });
    std::vector<std::size_t> keep;
    for (auto i : idx) {
        const int t = c.t[i];
        if (w.t_min && t < *w.t_min) continue;
        if (w.t_max && t > *w.t_max) continue;
        const double x = c.deficit[i];
        const double e = i < c.error.size() ? c.error[i] : 0.0;
        if (w.t_min && w.t_max && !(x > 0.0))
            throw FitWindowError(fmt::format("non-positive deficit {} at N={}, t={} inside the fit window", x, c.N, t));
        if (std::isfinite(x) && x > std::max(w.floor, w.error_factor * e)) keep.push_back(i);
    }
    if (!w.t_min && !keep.empty()) {
        const auto n = static_cast<std::size_t>(std::ceil(w.tail_fraction * keep.size()));
        keep.erase(keep.begin(), keep.end() - std::min(n, keep.size()));
    }
    return keep;
}

DecayFit fit_decay(const std::vector<DeficitCurve> &curves, const FitWindow &window) {
    if (curves.empty()) throw FitWindowError("no deficit curves to fit");
    const auto K = curves.size();
    std::vector<std::vector<std::size_t>> pts(K);
    std::size_t rows = 0;
    bool weighted = true;
    for (std::size_t k = 0; k < K; ++k) {
        pts[k] = window_points(curves[k], window);
        if (pts[k].size() < 4)
            throw FitWindowError(fmt::format("only {} usable depths for N={} (need 4)", pts[k].size(), curves[k].N));
        rows += pts[k].size();
        if (!curves[k].weighted) weighted = false;
        for (auto i : pts[k])
            if (!(i < curves[k].error.size() && curves[k].error[i] > 0.0)) weighted = false;
    }

    Design D;
    D.X = Eigen::MatrixXd::Zero(rows, K + 1);
    D.y.resize(rows);
    D.sigma = Eigen::VectorXd::Zero(rows);
    std::size_t r = 0;
    for (std::size_t k = 0; k < K; ++k)
        for (auto i : pts[k]) {
            const auto &c = curves[k];
            D.X(r, k) = 1.0;
            D.X(r, K) = c.t[i] - 1.0;
            D.y(r) = std::log(c.deficit[i]);
            if (weighted) D.sigma(r) = c.error[i] / c.deficit[i];
            D.curve_of_row.push_back(k);
            ++r;
        }
    const Eigen::VectorXd w =
        weighted ? Eigen::VectorXd(D.sigma.array().square().inverse()) : Eigen::VectorXd::Ones(rows);
    const Eigen::VectorXd p = solve(D, D.y, w);
    const Eigen::VectorXd res = D.y - D.X * p;
    const double chi2 = (w.array() * res.array().square()).sum();
    const auto dof = static_cast<double>(rows) - static_cast<double>(K + 1);
    const Eigen::MatrixXd cov0 = (D.X.transpose() * w.asDiagonal() * D.X).inverse();
    const double scale = dof > 0 ? (weighted ? std::max(1.0, chi2 / dof) : chi2 / dof) : 0.0;
    const Eigen::MatrixXd cov = cov0 * scale;

    DecayFit f;
    const double slope = p(K);
    const double slope_se = std::sqrt(std::max(0.0, cov(K, K)));
    f.beta = std::exp(slope);
    if (!(f.beta > 0.0 && f.beta < 1.0))
        throw FitWindowError(fmt::format("fitted base {} is outside (0, 1); the deficit is not decaying", f.beta));
    f.beta_err = f.beta * slope_se;
    f.beta_ci_low = std::exp(slope - 1.96 * slope_se);
    f.beta_ci_high = std::exp(slope + 1.96 * slope_se);
    if (weighted && window.bootstrap > 0) {
        std::mt19937_64 rng(window.seed);
        std::normal_distribution<double> g;
        std::vector<double> betas;
        betas.reserve(window.bootstrap);
        for (int b = 0; b < window.bootstrap; ++b) {
            Eigen::VectorXd yb = D.y;
            for (Eigen::Index i = 0; i < yb.size(); ++i) yb(i) += D.sigma(i) * g(rng);
            betas.push_back(std::exp(solve(D, yb, w)(K)));
        }
        f.beta_ci_low = quantile(betas, 0.025);
        f.beta_ci_high = quantile(betas, 0.975);
        f.bootstrap_ci = true;
    }

    const double ybar = (w.array() * D.y.array()).sum() / w.sum();
    const double ss_tot = (w.array() * (D.y.array() - ybar).square()).sum();
    f.r2 = ss_tot > 0 ? 1.0 - chi2 / ss_tot : 1.0;

    f.window.resize(K);
    f.residuals.resize(K);
    for (std::size_t k = 0, row = 0; k < K; ++k) {
        f.Ns.push_back(curves[k].N);
        const double A = std::exp(p(k));
        f.prefactor.push_back(A);
        f.prefactor_err.push_back(A * std::sqrt(std::max(0.0, cov(k, k))));
        for (auto i : pts[k]) {
            f.window[k].push_back(curves[k].t[i]);
            f.residuals[k].push_back(res(row++));
        }
    }

    if (K == 1) {
        f.alpha = f.prefactor[0] / f.Ns[0];
        f.alpha_err = f.prefactor_err[0] / f.Ns[0];
    } else {
        double nm = 0, am = 0;
        for (std::size_t k = 0; k < K; ++k) {
            nm += f.Ns[k];
            am += f.prefactor[k];
        }
        nm /= K;
        am /= K;
        double sxx = 0, sxy = 0;
        for (std::size_t k = 0; k < K; ++k) {
            sxx += (f.Ns[k] - nm) * (f.Ns[k] - nm);
            sxy += (f.Ns[k] - nm) * (f.prefactor[k] - am);
        }
        if (sxx == 0) throw FitWindowError("prefactor regression needs distinct system sizes");
        f.alpha = sxy / sxx;
        f.alpha_intercept = am - f.alpha * nm;
        if (K > 2) {
            double s2 = 0;
            for (std::size_t k = 0; k < K; ++k) {
                const double e = f.prefactor[k] - f.alpha_intercept - f.alpha * f.Ns[k];
                s2 += e * e;
            }
            f.alpha_err = std::sqrt(s2 / (K - 2) / sxx);
        } else {
            f.alpha_err = std::hypot(f.prefactor_err[0], f.prefactor_err[1]) / std::abs(f.Ns[1] - f.Ns[0]);
        }
    }
    return f;
}

double DecayFit::hsd_time(std::size_t k, double eps) const {
    return 1.0 + std::log(prefactor.at(k) / eps) / -std::log(beta);
}

nlohmann::json DecayFit::to_json() const {
    nlohmann::json j;
    j["beta"] = beta;
    j["beta_err"] = beta_err;
    j["beta_ci"] = {beta_ci_low, beta_ci_high};
    j["beta_ci_method"] = bootstrap_ci ? "bootstrap" : "normal";
    j["N"] = Ns;
    j["prefactor"] = prefactor;
    j["prefactor_err"] = prefactor_err;
    j["alpha"] = alpha;
    j["alpha_err"] = alpha_err;
    j["alpha_intercept"] = alpha_intercept;
    j["r2"] = r2;
    j["window"] = window;
    j["residuals"] = residuals;
    return j;
}

std::vector<DeficitCurve> deficit_curves(const ObservableSeries &series, Provenance p, int d, double q) {
    std::vector<DeficitCurve> out;
    for (int N : series.sizes()) {
        DeficitCurve c;
        c.N = N;
        c.weighted = p == Provenance::mc;
        for (const auto &r : series.select(p, ValueKind::ipr, d, N, q)) {
            if (r.t < 0) continue;
            c.t.push_back(r.t);
            c.deficit.push_back(r.deficit);
            c.error.push_back(r.deficit_err);
        }
        if (!c.t.empty()) out.push_back(std::move(c));
    }
    return out;
}

ParitySlope parity_slope(const std::vector<int> &t, const std::vector<double> &y) {
    const auto n = static_cast<Eigen::Index>(t.size());
    if (n < 3 || y.size() != t.size()) throw FitWindowError("parity slope needs at least 3 points");
    Eigen::MatrixXd X(n, 3);
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        X(i, 0) = 1.0;
        X(i, 1) = t[i];
        X(i, 2) = t[i] % 2 != 0 ? 1.0 : 0.0;
        v(i) = y[i];
    }
    const Eigen::MatrixXd A = X.transpose() * X;
    if (std::abs(A.determinant()) < 1e-12) throw FitWindowError("parity slope needs both parities and 2+ depths");
    const Eigen::VectorXd p = A.ldlt().solve(X.transpose() * v);
    ParitySlope s;
    s.slope = p(1);
    if (n > 3) {
        const double s2 = (v - X * p).squaredNorm() / static_cast<double>(n - 3);
        s.slope_err = std::sqrt(s2 * A.inverse()(1, 1));
    }
    return s;
}

} // namespace qdeloc::harness
