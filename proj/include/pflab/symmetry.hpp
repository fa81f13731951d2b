// symmetry.hpp — involutions j, antiunitaries theta = U conj(.), and the
// residuals that decide reality preservation and theta-commutation
#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "pflab/operators.hpp"
#include "pflab/types.hpp"

namespace pflab::sym {

// Membership threshold in max-norm; the identities checked here are exact in
// rational arithmetic, the margin absorbs floating-point assembly noise.
inline constexpr double kRealityTol = 1e-12;
inline constexpr double kCommuteTol = 1e-12;

// An antilinear involution j: v -> P conj(v) with P an involutive basis
// permutation. Identity permutation for the bare Fock space; the grid flip
// x -> -x (tensored with the Fock identity) for the lattice space.
class Involution {
public:
    static Involution identity(std::size_t dim);
    static Involution grid_flip(std::size_t grid_points, std::size_t fock_dim);

    std::size_t dim() const { return perm_.size(); }
    std::size_t image(std::size_t i) const { return perm_[i]; }
    const std::vector<std::size_t>& perm() const { return perm_; }

    // Permutation matrix P with (P v)_i = v_{perm(i)}; symmetric since the
    // permutation is involutive.
    SparseCd matrix() const;

    Eigen::VectorXcd apply(const Eigen::VectorXcd& v) const;

private:
    explicit Involution(std::vector<std::size_t> perm);
    std::vector<std::size_t> perm_;
};

// theta = U conj(.) with U unitary. theta^2 = U conj(U) must be +1 or -1;
// the sign is recorded at construction.
class AntiunitaryOperator {
public:
    static constexpr double kUnitaryTol = 1e-12;

    explicit AntiunitaryOperator(SparseCd U);

    std::size_t dim() const { return static_cast<std::size_t>(U_.rows()); }
    const SparseCd& unitary() const { return U_; }
    int sign() const { return sign_; }

    Eigen::VectorXcd apply(const Eigen::VectorXcd& v) const;

private:
    SparseCd U_;
    int sign_;
};

// theta = sigma_2^(x)N (x) P_j on the N-spin extension of j's space;
// theta^2 = (-1)^N.
AntiunitaryOperator make_theta(const Involution& j, int spin_factors);

// || A P - P conj(A) ||_max: zero iff A commutes with j (A is reality
// preserving).
double reality_residual(const SparseCd& op, const Involution& j);
double reality_residual(const ops::HermitianOperator& op, const Involution& j);

// || A P + P conj(A) ||_max: zero iff A anticommutes with j, i.e. iA is
// reality preserving.
double anti_reality_residual(const SparseCd& op, const Involution& j);
double anti_reality_residual(const ops::HermitianOperator& op, const Involution& j);

bool is_reality_preserving(const ops::HermitianOperator& op, const Involution& j,
                           double tol = kRealityTol);

// || H U - U conj(H) ||_max, the matrix form of theta H = H theta.
double commutation_residual(const ops::HermitianOperator& H, const AntiunitaryOperator& theta);

struct ClosureResult {
    double combo_residual;
    double product_residual;
    bool pass;
};

// Real algebra closure: alpha a + beta b and a b stay reality preserving.
// Requires a and b to individually pass; alpha, beta are real.
ClosureResult algebra_closure_test(const ops::HermitianOperator& a,
                                   const ops::HermitianOperator& b, double alpha, double beta,
                                   const Involution& j, double tol = kRealityTol);

// H + sigma_3 (x) 1 on the leading spin factor: a deliberate symmetry breaker
// used as a negative control.
ops::HermitianOperator symmetry_breaking_probe(const ops::HermitianOperator& H);

} // namespace pflab::sym
