#include "pflab/symmetry.hpp"

#include <stdexcept>
#include <string>
#include <utility>

#include <unsupported/Eigen/KroneckerProduct>

namespace pflab::sym {

Involution::Involution(std::vector<std::size_t> perm) : perm_(std::move(perm)) {
    for (std::size_t i = 0; i < perm_.size(); ++i) {
        if (perm_[i] >= perm_.size() || perm_[perm_[i]] != i) {
            throw std::invalid_argument("Involution: permutation is not an involution");
        }
    }
}

Involution Involution::identity(std::size_t dim) {
    std::vector<std::size_t> p(dim);
    for (std::size_t i = 0; i < dim; ++i) p[i] = i;
    return Involution(std::move(p));
}

Involution Involution::grid_flip(std::size_t grid_points, std::size_t fock_dim) {
    std::vector<std::size_t> p(grid_points * fock_dim);
    for (std::size_t g = 0; g < grid_points; ++g) {
        for (std::size_t f = 0; f < fock_dim; ++f) {
            p[g * fock_dim + f] = (grid_points - 1 - g) * fock_dim + f;
        }
    }
    return Involution(std::move(p));
}

SparseCd Involution::matrix() const {
    const Eigen::Index n = static_cast<Eigen::Index>(perm_.size());
    SparseCd P(n, n);
    std::vector<Eigen::Triplet<cplx>> tr;
    tr.reserve(perm_.size());
    for (std::size_t i = 0; i < perm_.size(); ++i) {
        tr.emplace_back(static_cast<int>(i), static_cast<int>(perm_[i]), cplx(1.0, 0.0));
    }
    P.setFromTriplets(tr.begin(), tr.end());
    return P;
}

Eigen::VectorXcd Involution::apply(const Eigen::VectorXcd& v) const {
    if (static_cast<std::size_t>(v.size()) != perm_.size()) {
        throw std::invalid_argument("Involution: dimension mismatch");
    }
    Eigen::VectorXcd out(v.size());
    for (std::size_t i = 0; i < perm_.size(); ++i) {
        out[static_cast<Eigen::Index>(i)] = std::conj(v[static_cast<Eigen::Index>(perm_[i])]);
    }
    return out;
}

AntiunitaryOperator::AntiunitaryOperator(SparseCd U) : U_(std::move(U)), sign_(0) {
    if (U_.rows() != U_.cols()) {
        throw std::invalid_argument("AntiunitaryOperator: U must be square");
    }
    const SparseCd id = ops::sparse_identity(static_cast<std::size_t>(U_.rows()));
    const double unitary_defect = max_abs(SparseCd(SparseCd(SparseCd(U_.adjoint()) * U_) - id));
    if (!(unitary_defect <= kUnitaryTol)) {
        throw std::invalid_argument("AntiunitaryOperator: U is not unitary (defect " +
                                    std::to_string(unitary_defect) + ")");
    }
    // theta^2 = U conj(U) must be a sign times the identity.
    const SparseCd square = SparseCd(U_ * SparseCd(U_.conjugate()));
    for (const int s : {+1, -1}) {
        if (max_abs(SparseCd(square - SparseCd(static_cast<double>(s) * id))) <= kUnitaryTol) {
            sign_ = s;
            break;
        }
    }
    if (sign_ == 0) {
        throw std::invalid_argument("AntiunitaryOperator: theta^2 is not +1 or -1");
    }
}

Eigen::VectorXcd AntiunitaryOperator::apply(const Eigen::VectorXcd& v) const {
    if (v.size() != U_.rows()) {
        throw std::invalid_argument("AntiunitaryOperator: dimension mismatch");
    }
    return U_ * v.conjugate();
}

AntiunitaryOperator make_theta(const Involution& j, int spin_factors) {
    if (spin_factors < 1) {
        throw std::invalid_argument("make_theta: need at least one spin factor");
    }
    SparseCd spin_part = ops::pauli(2);
    for (int l = 1; l < spin_factors; ++l) {
        spin_part = kroneckerProduct(spin_part, ops::pauli(2)).eval();
    }
    SparseCd U = kroneckerProduct(spin_part, j.matrix()).eval();
    return AntiunitaryOperator(std::move(U));
}

double reality_residual(const SparseCd& op, const Involution& j) {
    if (static_cast<std::size_t>(op.rows()) != j.dim()) {
        throw std::invalid_argument("reality_residual: dimension mismatch");
    }
    const SparseCd P = j.matrix();
    return max_abs(SparseCd(SparseCd(op * P) - SparseCd(P * SparseCd(op.conjugate()))));
}

double reality_residual(const ops::HermitianOperator& op, const Involution& j) {
    return reality_residual(op.sparse(), j);
}

double anti_reality_residual(const SparseCd& op, const Involution& j) {
    if (static_cast<std::size_t>(op.rows()) != j.dim()) {
        throw std::invalid_argument("anti_reality_residual: dimension mismatch");
    }
    const SparseCd P = j.matrix();
    return max_abs(SparseCd(SparseCd(op * P) + SparseCd(P * SparseCd(op.conjugate()))));
}

double anti_reality_residual(const ops::HermitianOperator& op, const Involution& j) {
    return anti_reality_residual(op.sparse(), j);
}

bool is_reality_preserving(const ops::HermitianOperator& op, const Involution& j, double tol) {
    return reality_residual(op, j) <= tol;
}

double commutation_residual(const ops::HermitianOperator& H, const AntiunitaryOperator& theta) {
    if (H.dim() != theta.dim()) {
        throw std::invalid_argument("commutation_residual: dimension mismatch");
    }
    const SparseCd& U = theta.unitary();
    const SparseCd& h = H.sparse();
    return max_abs(SparseCd(SparseCd(h * U) - SparseCd(U * SparseCd(h.conjugate()))));
}

ClosureResult algebra_closure_test(const ops::HermitianOperator& a,
                                   const ops::HermitianOperator& b, double alpha, double beta,
                                   const Involution& j, double tol) {
    if (!is_reality_preserving(a, j, tol) || !is_reality_preserving(b, j, tol)) {
        throw std::invalid_argument("algebra_closure_test: inputs must be reality preserving");
    }
    const SparseCd combo = SparseCd(alpha * a.sparse()) + SparseCd(beta * b.sparse());
    const SparseCd prod = SparseCd(a.sparse() * b.sparse());
    ClosureResult r{};
    r.combo_residual = reality_residual(combo, j);
    r.product_residual = reality_residual(prod, j);
    r.pass = r.combo_residual <= tol && r.product_residual <= tol;
    return r;
}

ops::HermitianOperator symmetry_breaking_probe(const ops::HermitianOperator& H) {
    if (H.space().spin_factors < 1) {
        throw std::invalid_argument("symmetry_breaking_probe: operator has no spin factor");
    }
    const std::size_t dim = H.dim();
    const std::size_t half = dim / 2;
    SparseCd s3(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    std::vector<Eigen::Triplet<cplx>> tr;
    tr.reserve(dim);
    for (std::size_t i = 0; i < dim; ++i) {
        tr.emplace_back(static_cast<int>(i), static_cast<int>(i),
                        cplx(i < half ? 1.0 : -1.0, 0.0));
    }
    s3.setFromTriplets(tr.begin(), tr.end());
    return ops::HermitianOperator(H.space(), H.sparse() + s3);
}

} // namespace pflab::sym
