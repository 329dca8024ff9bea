#include "thin_svd.hpp"

#include <lapacke.h>

#include <algorithm>

namespace qdeloc::tn::detail {

ThinSvd thin_svd(const Eigen::MatrixXd &m) {
    const lapack_int rows = static_cast<lapack_int>(m.rows());
    const lapack_int cols = static_cast<lapack_int>(m.cols());
    const lapack_int k = std::min(rows, cols);
    ThinSvd out;
    if (k == 0) {
        out.u = Eigen::MatrixXd::Zero(rows, 0);
        out.v = Eigen::MatrixXd::Zero(cols, 0);
        out.s.resize(0);
        return out;
    }
    Eigen::MatrixXd a = m;
    Eigen::MatrixXd vt(k, cols);
    out.u.resize(rows, k);
    out.s.resize(k);
    lapack_int info = LAPACKE_dgesdd(LAPACK_COL_MAJOR, 'S', rows, cols, a.data(), rows, out.s.data(), out.u.data(),
                                     rows, vt.data(), k);
    if (info != 0) {
        a = m;
        Eigen::VectorXd superb(k);
        info = LAPACKE_dgesvd(LAPACK_COL_MAJOR, 'S', 'S', rows, cols, a.data(), rows, out.s.data(), out.u.data(), rows,
                              vt.data(), k, superb.data());
    }
    if (info != 0) {
        Eigen::JacobiSVD<Eigen::MatrixXd> j(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
        out.u = j.matrixU();
        out.s = j.singularValues();
        out.v = j.matrixV();
        return out;
    }
    out.v = vt.transpose();
    return out;
}

} // namespace qdeloc::tn::detail
