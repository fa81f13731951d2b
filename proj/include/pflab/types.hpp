// types.hpp — shared scalar/matrix aliases and small numeric helpers
#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <complex>
#include <cstddef>

namespace pflab {

using cplx = std::complex<double>;
using SparseCd = Eigen::SparseMatrix<cplx>;

// Hard cap on basis dimensions; guards against accidental blowup.
inline constexpr std::size_t kDefaultDimCap = std::size_t{1} << 20;

// Max-norm over stored coefficients (absent entries are zero).
inline double max_abs(const SparseCd& m) {
    double r = 0.0;
    for (int o = 0; o < m.outerSize(); ++o) {
        for (SparseCd::InnerIterator it(m, o); it; ++it) {
            r = std::max(r, std::abs(it.value()));
        }
    }
    return r;
}

inline double max_abs(const Eigen::MatrixXcd& m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline double max_abs(const Eigen::VectorXcd& v) {
    return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

} // namespace pflab
