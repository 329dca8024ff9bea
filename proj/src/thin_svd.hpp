#pragma once

#include <Eigen/Dense>

namespace qdeloc::tn::detail {

struct ThinSvd {
    Eigen::MatrixXd u;
    Eigen::VectorXd s;
    Eigen::MatrixXd v;
};

/// m = u diag(s) v^T with s sorted descending. LAPACK divide and conquer, falling back
/// to the QR-iteration driver and then to one-sided Jacobi if a driver fails to converge.
ThinSvd thin_svd(const Eigen::MatrixXd &m);

} // namespace qdeloc::tn::detail
