#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Dense>

#include "pflab/fock.hpp"
#include "pflab/operators.hpp"
#include "pflab/symmetry.hpp"

using namespace pflab;
using fock::FockBasis;
using fock::Mode;
using fock::ModeSet;
using ops::FieldOperators;
using ops::HermitianOperator;
using ops::SpaceTag;
using sym::AntiunitaryOperator;
using sym::Involution;

namespace {

ModeSet two_point_modes() {
    return ModeSet::from_kpoints({{{0.0, 0.0, 1.0}, 1.0}, {{1.0, 0.5, -0.3}, 0.7}});
}

Eigen::VectorXcd random_vector(std::mt19937_64& rng, std::size_t dim) {
    std::normal_distribution<double> gauss;
    Eigen::VectorXcd v(static_cast<Eigen::Index>(dim));
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = cplx(gauss(rng), gauss(rng));
    return v;
}

} // namespace

TEST_SUITE("symmetry") {

TEST_CASE("involutions validate and apply") {
    const Involution id = Involution::identity(4);
    CHECK(id.dim() == 4);
    const Involution flip = Involution::grid_flip(3, 2);
    CHECK(flip.image(0) == 4);
    CHECK(flip.image(1) == 5);
    CHECK(flip.image(2) == 2);
    CHECK(flip.image(4) == 0);

    std::mt19937_64 rng(3);
    const Eigen::VectorXcd v = random_vector(rng, 6);
    const Eigen::VectorXcd jv = flip.apply(v);
    const Eigen::VectorXcd jjv = flip.apply(jv);
    CHECK((jjv - v).norm() == 0.0); // j^2 = 1 exactly
    CHECK(jv.norm() == doctest::Approx(v.norm()).epsilon(1e-15));
}

TEST_CASE("theta squared sign is (-1)^N") {
    const Involution j = Involution::identity(3);
    CHECK(sym::make_theta(j, 1).sign() == -1);
    CHECK(sym::make_theta(j, 2).sign() == +1);
    CHECK(sym::make_theta(j, 3).sign() == -1);
    CHECK(sym::make_theta(j, 4).sign() == +1);
    CHECK_THROWS_AS((void)sym::make_theta(j, 0), std::invalid_argument);
}

TEST_CASE("theta is antiunitary: norms, antilinearity, inner products") {
    const Involution j = Involution::grid_flip(5, 4);
    const AntiunitaryOperator theta = sym::make_theta(j, 1);
    std::mt19937_64 rng(5);

    for (int trial = 0; trial < 100; ++trial) {
        const Eigen::VectorXcd v = random_vector(rng, theta.dim());
        CHECK(std::abs(theta.apply(v).norm() - v.norm()) <= 1e-13 * v.norm());
    }
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::VectorXcd u = random_vector(rng, theta.dim());
        const Eigen::VectorXcd v = random_vector(rng, theta.dim());
        // <theta u, theta v> = <v, u>
        const cplx lhs = theta.apply(u).dot(theta.apply(v));
        const cplx rhs = v.dot(u);
        CHECK(std::abs(lhs - rhs) <= 1e-13 * std::abs(rhs));
        // theta(alpha v) = conj(alpha) theta(v), exact entrywise since the
        // unitary factor has only axis-unit entries
        const cplx alpha(0.8, -1.7);
        const Eigen::VectorXcd lhs2 = theta.apply(alpha * v);
        const Eigen::VectorXcd rhs2 = std::conj(alpha) * theta.apply(v);
        CHECK(max_abs(Eigen::VectorXcd(lhs2 - rhs2)) == 0.0);
    }
}

TEST_CASE("field operators against the Fock involution") {
    const ModeSet ms = two_point_modes();
    const FockBasis basis(ms.size(), 2);
    const FieldOperators F = ops::build_field_operators(basis, ms);
    const Involution j = Involution::identity(basis.dim());

    SUBCASE("ladder operators are reality preserving, exactly") {
        for (std::size_t m = 0; m < ms.size(); ++m) {
            CHECK(sym::reality_residual(F.a[m], j) == 0.0);
            CHECK(sym::reality_residual(F.adag[m], j) == 0.0);
        }
    }
    SUBCASE("A0, Hf, Pf commute with j; B0 anticommutes") {
        CHECK(sym::reality_residual(F.field_energy(), j) == 0.0);
        for (int axis = 0; axis < 3; ++axis) {
            CHECK(sym::reality_residual(F.A0[axis], j) == 0.0);
            CHECK(sym::reality_residual(F.Pf[axis], j) == 0.0);
            CHECK(sym::anti_reality_residual(F.B0[axis], j) == 0.0);
        }
    }
    SUBCASE("B0 itself fails by twice its largest entry") {
        for (int axis = 0; axis < 3; ++axis) {
            const double biggest = max_abs(F.B0[axis].sparse());
            if (biggest == 0.0) continue;
            const double res = sym::reality_residual(F.B0[axis], j);
            CHECK(res == doctest::Approx(2.0 * biggest).epsilon(1e-15));
        }
    }
}

TEST_CASE("algebra closure under real combinations and products") {
    const ModeSet ms = two_point_modes();
    const FockBasis basis(ms.size(), 2);
    const FieldOperators F = ops::build_field_operators(basis, ms);
    const Involution j = Involution::identity(basis.dim());

    const sym::ClosureResult combo =
        sym::algebra_closure_test(F.A0[0], F.field_energy(), 2.0, -3.0, j);
    CHECK(combo.pass);
    CHECK(combo.combo_residual <= 1e-12);
    CHECK(combo.product_residual <= 1e-12);

    // i * (reality preserving) is not reality preserving: real-linearity only.
    const SparseCd ia0 = SparseCd(cplx(0.0, 1.0) * F.A0[0].sparse());
    CHECK(sym::reality_residual(ia0, j) > 0.1);

    // inputs must individually pass
    CHECK_THROWS_AS(
        (void)sym::algebra_closure_test(F.B0[0], F.field_energy(), 1.0, 1.0, j),
        std::invalid_argument);
}

TEST_CASE("fixed-momentum Hamiltonian commutes with theta") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> ed(0.0, 1.0), pd(-2.0, 2.0);
    const ModeSet ms = two_point_modes();
    const FockBasis basis(ms.size(), 2);
    const FieldOperators F = ops::build_field_operators(basis, ms);
    const Involution j = Involution::identity(basis.dim());
    const AntiunitaryOperator theta = sym::make_theta(j, 1);

    for (int trial = 0; trial < 5; ++trial) {
        const Eigen::Vector3d P(pd(rng), pd(rng), pd(rng));
        const HermitianOperator H = ops::build_HP(F, P, ed(rng));
        CHECK(sym::commutation_residual(H, theta) <= 1e-12);
    }
}

TEST_CASE("block-diagonal real matrices commute with sigma2 J exactly") {
    std::mt19937_64 rng(19);
    std::normal_distribution<double> gauss;
    const std::size_t d = 6;
    Eigen::MatrixXd a(d, d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t k = 0; k < d; ++k) a(i, k) = gauss(rng);
    a = ((a + a.transpose()) / 2.0).eval();

    SparseCd block(2 * d, 2 * d);
    std::vector<Eigen::Triplet<cplx>> tr;
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t k = 0; k < d; ++k) {
            tr.emplace_back(static_cast<int>(i), static_cast<int>(k), cplx(a(i, k), 0.0));
            tr.emplace_back(static_cast<int>(d + i), static_cast<int>(d + k), cplx(a(i, k), 0.0));
        }
    }
    block.setFromTriplets(tr.begin(), tr.end());
    const HermitianOperator H(SpaceTag::spin_fock(d), block);
    const AntiunitaryOperator theta = sym::make_theta(Involution::identity(d), 1);
    CHECK(sym::commutation_residual(H, theta) == 0.0);
}

TEST_CASE("sigma3 probe breaks the commutation by O(1)") {
    const ModeSet ms = two_point_modes();
    const FockBasis basis(ms.size(), 2);
    const HermitianOperator H = ops::build_HP(basis, ms, {0.0, 0.0, 0.3}, 0.5);
    const AntiunitaryOperator theta = sym::make_theta(Involution::identity(basis.dim()), 1);

    CHECK(sym::commutation_residual(H, theta) <= 1e-12);
    const HermitianOperator probe = sym::symmetry_breaking_probe(H);
    CHECK(sym::commutation_residual(probe, theta) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("grid involution: even potential commutes, odd potential does not") {
    const ModeSet ms = ModeSet::from_kpoints({{{0.0, 0.0, 1.0}, 1.0}});
    const FockBasis basis(ms.size(), 1);
    const ops::GridSpec grid{2, 0.5};
    const std::size_t G = grid.points();

    std::vector<double> even(G), odd(G);
    for (std::size_t g = 0; g < G; ++g) {
        const double x = grid.coordinate(g);
        even[g] = x * x;
        odd[g] = x;
    }
    const Involution j = Involution::grid_flip(G, basis.dim());
    const AntiunitaryOperator theta = sym::make_theta(j, 1);

    const HermitianOperator He = ops::build_HPF_grid(basis, ms, grid, even, 0.3);
    CHECK(sym::commutation_residual(He, theta) <= 1e-12);

    const HermitianOperator Ho = ops::build_HPF_grid(basis, ms, grid, odd, 0.3);
    CHECK(sym::commutation_residual(Ho, theta) > 1e-2);
}

} // TEST_SUITE
