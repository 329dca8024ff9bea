#pragma once

// Exponential saturation fits: ln(deficit) = c_N + (t - 1) ln(beta), common beta across sizes.

#include "qdeloc/series.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <vector>

namespace qdeloc::harness {

/// Deficit versus depth for one system size. Errors may be empty or all zero (exact data).
struct DeficitCurve {
    int N = 0;
    std::vector<int> t;
    std::vector<double> deficit;
    std::vector<double> error;
    /// Errors are statistical and enter the fit as weights; otherwise they only shape the window.
    bool weighted = true;
};

struct FitWindow {
    /// Explicit depth bounds (inclusive). Unset bounds fall back to the default rule.
    std::optional<int> t_min;
    std::optional<int> t_max;
    /// Points need deficit > max(floor, error_factor * error).
    double floor = 1e-10;
    double error_factor = 10.0;
    /// Without an explicit t_min, keep the last fraction of the usable depths.
    double tail_fraction = 0.6;
    /// Parametric bootstrap resamples when errors are present.
    int bootstrap = 200;
    std::uint64_t seed = 1;
};

struct DecayFit {
    double beta = 0.0;
    double beta_err = 0.0;
    double beta_ci_low = 0.0;
    double beta_ci_high = 0.0;
    bool bootstrap_ci = false;
    std::vector<int> Ns;
    /// A_N in deficit = A_N beta^{t-1}.
    std::vector<double> prefactor;
    std::vector<double> prefactor_err;
    /// Slope of A_N against N (A_N / N when only one size is given).
    double alpha = 0.0;
    double alpha_err = 0.0;
    double alpha_intercept = 0.0;
    double r2 = 0.0;
    /// Depths used and residuals of ln(deficit), per size.
    std::vector<std::vector<int>> window;
    std::vector<std::vector<double>> residuals;

    /// Depth at which the fitted deficit for size index k drops to eps.
    double hsd_time(std::size_t k, double eps) const;
    nlohmann::json to_json() const;
};

/// Points of a curve that the window keeps.
std::vector<std::size_t> window_points(const DeficitCurve &curve, const FitWindow &window);

/// Weighted least squares (weights 1/sigma^2 of ln deficit when every point has an error,
/// uniform otherwise). Raises FitWindowError on fewer than 4 usable depths per size or on
/// non-positive deficits inside an explicit window.
DecayFit fit_decay(const std::vector<DeficitCurve> &curves, const FitWindow &window = {});

/// Deficit curves of IPR records with given provenance, d and q, one per size.
/// Only Monte Carlo curves are weighted.
std::vector<DeficitCurve> deficit_curves(const ObservableSeries &series, Provenance p, int d, double q);

/// Least-squares slope of y against t with a separate offset for odd t.
struct ParitySlope {
    double slope = 0.0;
    double slope_err = 0.0;
};
ParitySlope parity_slope(const std::vector<int> &t, const std::vector<double> &y);

} // namespace qdeloc::harness
