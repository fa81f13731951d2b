// Shared generators for randomized test configurations.
#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "pflab/fock.hpp"
#include "pflab/operators.hpp"

namespace testsupport {

using pflab::cplx;

// Valid mode set with arbitrary count: random nonzero k, positive weight,
// random real unit polarization orthogonal to k.
inline pflab::fock::ModeSet random_modes(std::mt19937_64& rng, std::size_t count) {
    std::normal_distribution<double> gauss;
    std::uniform_real_distribution<double> wdist(0.2, 3.0);
    std::vector<pflab::fock::Mode> modes;
    for (std::size_t m = 0; m < count; ++m) {
        Eigen::Vector3d k;
        do {
            k = Eigen::Vector3d(gauss(rng), gauss(rng), gauss(rng));
        } while (k.norm() < 0.3);
        Eigen::Vector3d raw(gauss(rng), gauss(rng), gauss(rng));
        Eigen::Vector3d eps = raw - raw.dot(k) / k.squaredNorm() * k;
        while (eps.norm() < 1e-6) {
            raw = Eigen::Vector3d(gauss(rng), gauss(rng), gauss(rng));
            eps = raw - raw.dot(k) / k.squaredNorm() * k;
        }
        modes.push_back(pflab::fock::Mode{k, m % 2 == 0 ? 1 : 2, wdist(rng), eps.normalized()});
    }
    return pflab::fock::ModeSet::from_modes(std::move(modes));
}

inline Eigen::Matrix3d random_rotation(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    Eigen::Matrix3d a;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) a(i, j) = gauss(rng);
    Eigen::HouseholderQR<Eigen::Matrix3d> qr(a);
    Eigen::Matrix3d q = qr.householderQ();
    if (q.determinant() < 0.0) q.col(0) *= -1.0;
    return q;
}

// One randomized fixed-momentum configuration: M in {1,2,3} modes,
// N_max in {1,2,3}, e in [0,1], |P| <= 2.
struct FiberConfig {
    pflab::fock::ModeSet modes;
    pflab::fock::FockBasis basis;
    Eigen::Vector3d P;
    double e;
};

inline FiberConfig random_fiber_config(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> mdist(1, 3), ndist(1, 3);
    std::uniform_real_distribution<double> edist(0.0, 1.0), pdist(-1.0, 1.0);
    const std::size_t m = static_cast<std::size_t>(mdist(rng));
    const int n_max = ndist(rng);
    pflab::fock::ModeSet ms = random_modes(rng, m);
    pflab::fock::FockBasis basis(m, n_max);
    Eigen::Vector3d P(pdist(rng), pdist(rng), pdist(rng));
    if (P.norm() > 2.0) P *= 2.0 / P.norm();
    return FiberConfig{std::move(ms), std::move(basis), P, edist(rng)};
}

inline pflab::ops::HermitianOperator random_dense_hermitian(std::mt19937_64& rng,
                                                            std::size_t dim) {
    std::normal_distribution<double> gauss;
    Eigen::MatrixXcd a(dim, dim);
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j) a(i, j) = cplx(gauss(rng), gauss(rng));
    const Eigen::MatrixXcd h = (a + a.adjoint()) / 2.0;
    return pflab::ops::HermitianOperator(pflab::ops::SpaceTag::fock(dim), h.sparseView());
}

} // namespace testsupport
