// semigroup.hpp — real functional calculus f(H) and the vacuum-sector
// semigroup identities
#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include <Eigen/Dense>

#include "pflab/fock.hpp"
#include "pflab/operators.hpp"
#include "pflab/symmetry.hpp"

namespace pflab::semi {

// The supported real function family: e^{-tH}, (H + c)^{-1}, and the spectral
// indicator 1(H < threshold).
struct FunctionSpec {
    enum class Kind { ExpNegT, ResolventShift, IndicatorBelow };

    Kind kind{Kind::ExpNegT};
    double param{1.0};

    static FunctionSpec exp_neg_t(double t) { return {Kind::ExpNegT, t}; }
    static FunctionSpec resolvent_shift(double c) { return {Kind::ResolventShift, c}; }
    static FunctionSpec indicator_below(double threshold) {
        return {Kind::IndicatorBelow, threshold};
    }

    std::string label() const;
};

struct FunctionOfOperator {
    FunctionSpec spec;
    Eigen::MatrixXcd matrix;
};

// f(H) = V f(Lambda) V^dag from the dense spectral decomposition. Validates
// that f(H) is Hermitian and commutes with H; rejects resolvent shifts that
// leave H + c near-singular.
FunctionOfOperator apply_function(const ops::HermitianOperator& H, FunctionSpec f);

// || f(H) U - U conj(f(H)) ||_max for theta = U conj(.).
double theta_function_commutes(const ops::HermitianOperator& H,
                               const sym::AntiunitaryOperator& theta, FunctionSpec f);

struct VacuumSemigroupResult {
    double t;
    double offdiag;          // |<e1 (x) vac, e^{-tH} e2 (x) vac>|
    double diag_gap;         // difference of the two diagonal vacuum values
    double a_t;              // the common diagonal value
    double max_quadratic_gap; // max |<x (x) vac, e^{-tH} x (x) vac> - a_t |x|^2|
};

// Vacuum matrix elements of e^{-tH} on spin (x) Fock: the spin-off-diagonal
// element vanishes, the two diagonal elements agree, and the quadratic form
// is a(t) |x|^2 for every spinor x.
VacuumSemigroupResult hiroshima_spohn_check(const ops::HermitianOperator& H_P,
                                            const fock::FockBasis& basis, double t,
                                            std::uint64_t seed = 0x0a11ce, int n_random = 10);

struct JRealCheckResult {
    double gap_up;   // max |q(x) - |x|^2 a_up|
    double gap_down; // max |q(x) - |x|^2 a_down|
};

// Generalization to arbitrary real f and j-real phi: the quadratic form
// <x (x) phi, f(H) x (x) phi> equals |x|^2 times either spin-diagonal value.
// Rejects phi with || j phi - phi || > 1e-12 (j-real means real coefficients
// in the occupation basis).
JRealCheckResult jreal_generalization_check(const ops::HermitianOperator& H_P,
                                            const sym::AntiunitaryOperator& theta, FunctionSpec f,
                                            const Eigen::VectorXcd& phi,
                                            std::uint64_t seed = 0x0a11ce, int n_random = 10);

// || e^{-(s+t)H} - e^{-sH} e^{-tH} ||_max.
double semigroup_law_residual(const ops::HermitianOperator& H, double s, double t);

} // namespace pflab::semi
