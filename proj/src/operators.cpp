#include "pflab/operators.hpp"

#include <cmath>
#include <iostream>
#include <stdexcept>
#include <string>

#include <unsupported/Eigen/KroneckerProduct>

namespace pflab::ops {

using Triplet = Eigen::Triplet<cplx>;

std::string SpaceTag::label() const {
    const bool has_grid = grid_dim > 1;
    if (spin_factors == 0) return has_grid ? "grid_fock" : "fock";
    if (spin_factors == 1) return has_grid ? "grid_spin_fock" : "spin_fock";
    return has_grid ? "grid_nspin_fock" : "nspin_fock";
}

HermitianOperator::HermitianOperator(SpaceTag space, SparseCd mat)
    : space_(space), mat_(std::move(mat)) {
    if (mat_.rows() != mat_.cols()) {
        throw std::invalid_argument("HermitianOperator: matrix must be square");
    }
    if (static_cast<std::size_t>(mat_.rows()) != space_.dim()) {
        throw std::invalid_argument("HermitianOperator: dimension does not match space tag " +
                                    space_.label());
    }
    mat_.makeCompressed();
    const double defect = hermiticity_residual();
    if (!(defect <= kHermiticityTol)) {
        throw std::invalid_argument("HermitianOperator: Hermiticity defect " +
                                    std::to_string(defect) + " exceeds gate");
    }
}

double HermitianOperator::hermiticity_residual() const {
    return max_abs(SparseCd(mat_ - SparseCd(mat_.adjoint())));
}

SparseCd pauli(int i) {
    SparseCd s(2, 2);
    switch (i) {
    case 1:
        s.insert(0, 1) = 1.0;
        s.insert(1, 0) = 1.0;
        break;
    case 2:
        s.insert(0, 1) = cplx(0.0, -1.0);
        s.insert(1, 0) = cplx(0.0, 1.0);
        break;
    case 3:
        s.insert(0, 0) = 1.0;
        s.insert(1, 1) = -1.0;
        break;
    default:
        throw std::invalid_argument("pauli: index must be 1, 2 or 3");
    }
    s.makeCompressed();
    return s;
}

SparseCd sparse_identity(std::size_t n) {
    SparseCd id(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    id.setIdentity();
    return id;
}

SparseCd pauli_chain(int n_spins, int slot, int i) {
    if (slot < 1 || slot > n_spins) {
        throw std::invalid_argument("pauli_chain: slot out of range");
    }
    const std::size_t left = std::size_t{1} << (slot - 1);
    const std::size_t right = std::size_t{1} << (n_spins - slot);
    SparseCd m = kroneckerProduct(sparse_identity(left), pauli(i)).eval();
    return kroneckerProduct(m, sparse_identity(right)).eval();
}

FieldOperators build_field_operators(const fock::FockBasis& basis, const fock::ModeSet& modes) {
    if (basis.mode_count() != modes.size()) {
        throw std::invalid_argument("build_field_operators: basis and mode set disagree on mode count");
    }
    const std::size_t D = basis.dim();
    const std::size_t M = modes.size();
    const Eigen::Index d = static_cast<Eigen::Index>(D);

    FieldOperators F;
    F.fock_dim = D;
    F.mode_count = M;
    F.a.reserve(M);
    F.adag.reserve(M);

    // a_m |n> = sqrt(n_m) |n - e_m>; adag_m is its transpose (real entries).
    for (std::size_t m = 0; m < M; ++m) {
        std::vector<Triplet> low, raise;
        for (std::size_t i = 0; i < D; ++i) {
            const fock::Occupation& n = basis.state(i);
            if (n[m] == 0) continue;
            fock::Occupation lowered = n;
            --lowered[m];
            const std::size_t tgt = basis.index_of(lowered);
            const double v = std::sqrt(static_cast<double>(n[m]));
            low.emplace_back(static_cast<int>(tgt), static_cast<int>(i), cplx(v, 0.0));
            raise.emplace_back(static_cast<int>(i), static_cast<int>(tgt), cplx(v, 0.0));
        }
        SparseCd am(d, d), adm(d, d);
        am.setFromTriplets(low.begin(), low.end());
        adm.setFromTriplets(raise.begin(), raise.end());
        F.a.push_back(std::move(am));
        F.adag.push_back(std::move(adm));
    }

    const SpaceTag tag = SpaceTag::fock(D);

    // Number-weighted diagonals: Hf with weights |k_m|, Pf with weights (k_m)_a.
    auto weighted_number_diag = [&](auto&& weight_of) {
        SparseCd m(d, d);
        std::vector<Triplet> tr;
        tr.reserve(D);
        for (std::size_t i = 0; i < D; ++i) {
            double v = 0.0;
            const fock::Occupation& n = basis.state(i);
            for (std::size_t mm = 0; mm < M; ++mm) {
                if (n[mm] != 0) v += n[mm] * weight_of(mm);
            }
            tr.emplace_back(static_cast<int>(i), static_cast<int>(i), cplx(v, 0.0));
        }
        m.setFromTriplets(tr.begin(), tr.end());
        return m;
    };

    F.Hf.emplace_back(tag, weighted_number_diag([&](std::size_t m) { return modes.mode(m).k.norm(); }));
    for (int axis = 0; axis < 3; ++axis) {
        F.Pf.emplace_back(tag, weighted_number_diag([&](std::size_t m) { return modes.mode(m).k(axis); }));
    }

    // A0_a = sum_m g_m eps_ma (a_m + adag_m): real symmetric.
    // B0_a = i sum_m g_m (k_m x eps_m)_a (a_m - adag_m): purely imaginary Hermitian.
    for (int axis = 0; axis < 3; ++axis) {
        std::vector<Triplet> ta, tb;
        for (std::size_t m = 0; m < M; ++m) {
            const double ca = modes.coupling(m) * modes.mode(m).eps(axis);
            const double cb = modes.coupling(m) * modes.mode(m).k.cross(modes.mode(m).eps)(axis);
            for (std::size_t i = 0; i < D; ++i) {
                const fock::Occupation& n = basis.state(i);
                if (n[m] == 0) continue;
                fock::Occupation lowered = n;
                --lowered[m];
                const std::size_t tgt = basis.index_of(lowered);
                const double v = std::sqrt(static_cast<double>(n[m]));
                ta.emplace_back(static_cast<int>(tgt), static_cast<int>(i), cplx(ca * v, 0.0));
                ta.emplace_back(static_cast<int>(i), static_cast<int>(tgt), cplx(ca * v, 0.0));
                tb.emplace_back(static_cast<int>(tgt), static_cast<int>(i), cplx(0.0, cb * v));
                tb.emplace_back(static_cast<int>(i), static_cast<int>(tgt), cplx(0.0, -cb * v));
            }
        }
        SparseCd ma(d, d), mb(d, d);
        ma.setFromTriplets(ta.begin(), ta.end());
        mb.setFromTriplets(tb.begin(), tb.end());
        F.A0.emplace_back(tag, std::move(ma));
        F.B0.emplace_back(tag, std::move(mb));
    }

    return F;
}

HermitianOperator build_spin_block(const SpinBlockSpec& spec, double g_spin) {
    const SpaceTag base = spec.A.space();
    if (spec.B1.space() != base || spec.B2.space() != base || spec.B3.space() != base) {
        throw std::invalid_argument("build_spin_block: A and B_i must share dimension and space");
    }
    SparseCd h = kroneckerProduct(sparse_identity(2), spec.A.sparse()).eval();
    h = h + SparseCd(g_spin * kroneckerProduct(pauli(1), spec.B1.sparse()).eval());
    h = h + SparseCd(g_spin * kroneckerProduct(pauli(2), spec.B2.sparse()).eval());
    h = h + SparseCd(g_spin * kroneckerProduct(pauli(3), spec.B3.sparse()).eval());

    SpaceTag tag = base;
    tag.spin_factors += 1;
    return HermitianOperator(tag, std::move(h));
}

HermitianOperator build_spinless_fiber(const FieldOperators& F, const Eigen::Vector3d& P,
                                       double e) {
    const std::size_t D = F.fock_dim;
    const SpaceTag tag = SpaceTag::fock(D);
    SparseCd sum(static_cast<Eigen::Index>(D), static_cast<Eigen::Index>(D));
    for (int axis = 0; axis < 3; ++axis) {
        SparseCd m = SparseCd(P(axis) * sparse_identity(D)) - F.Pf[axis].sparse() +
                     SparseCd(e * F.A0[axis].sparse());
        sum = sum + SparseCd(m * m);
    }
    SparseCd h = SparseCd(0.5 * sum) + F.field_energy().sparse();
    return HermitianOperator(tag, std::move(h));
}

HermitianOperator build_HP(const FieldOperators& F, const Eigen::Vector3d& P, double e,
                           std::optional<double> g_spin) {
    SpinBlockSpec spec{build_spinless_fiber(F, P, e), F.B0[0], F.B0[1], F.B0[2]};
    return build_spin_block(spec, g_spin.value_or(e / 2.0));
}

HermitianOperator build_HP(const fock::FockBasis& basis, const fock::ModeSet& modes,
                           const Eigen::Vector3d& P, double e, std::optional<double> g_spin) {
    return build_HP(build_field_operators(basis, modes), P, e, g_spin);
}

bool potential_is_even(const std::vector<double>& V, double tol) {
    const std::size_t G = V.size();
    for (std::size_t i = 0; i < G; ++i) {
        const double scale = std::max(1.0, std::abs(V[i]));
        if (std::abs(V[i] - V[G - 1 - i]) > tol * scale) return false;
    }
    return true;
}

HermitianOperator build_HPF_grid(const fock::FockBasis& basis, const fock::ModeSet& modes,
                                 const GridSpec& grid, const std::vector<double>& V, double e,
                                 std::optional<double> g_spin) {
    if (grid.half_width < 0) {
        throw std::invalid_argument("build_HPF_grid: half_width must be >= 0");
    }
    if (!(grid.spacing > 0.0)) {
        throw std::invalid_argument("build_HPF_grid: spacing must be positive");
    }
    const std::size_t G = grid.points();
    if (V.size() != G) {
        throw std::invalid_argument("build_HPF_grid: potential table has " +
                                    std::to_string(V.size()) + " entries, grid has " +
                                    std::to_string(G) + " points");
    }
    if (!potential_is_even(V)) {
        std::cerr << "pflab: warning: potential is not even about 0; "
                     "time-reversal commutation will fail\n";
    }

    const FieldOperators F = build_field_operators(basis, modes);
    const std::size_t D = basis.dim();
    const std::size_t M = modes.size();
    const Eigen::Index gd = static_cast<Eigen::Index>(G * D);
    const SpaceTag base_tag = SpaceTag::grid_fock(G, D);

    // Position-dependent mode sums on grid (x) Fock, block-diagonal over grid
    // points. Plane-wave phase at x_g uses the z component of k. The adag term
    // is entered as the exact conjugate of the a term, so the assembled matrix
    // is Hermitian to the bit.
    auto phase_field = [&](int axis, bool magnetic) {
        std::vector<Triplet> tr;
        for (std::size_t g = 0; g < G; ++g) {
            const double x = grid.coordinate(g);
            const std::size_t off = g * D;
            for (std::size_t m = 0; m < M; ++m) {
                const Eigen::Vector3d& k = modes.mode(m).k;
                const Eigen::Vector3d& eps = modes.mode(m).eps;
                const double c = magnetic ? modes.coupling(m) * k.cross(eps)(axis)
                                          : modes.coupling(m) * eps(axis);
                if (c == 0.0) continue;
                const double arg = k(2) * x;
                const cplx phase(std::cos(arg), std::sin(arg));
                const cplx coeff = magnetic ? cplx(0.0, 1.0) * c * phase : c * phase;
                for (std::size_t i = 0; i < D; ++i) {
                    const fock::Occupation& n = basis.state(i);
                    if (n[m] == 0) continue;
                    fock::Occupation lowered = n;
                    --lowered[m];
                    const std::size_t tgt = basis.index_of(lowered);
                    const cplx v = coeff * std::sqrt(static_cast<double>(n[m]));
                    tr.emplace_back(static_cast<int>(off + tgt), static_cast<int>(off + i), v);
                    tr.emplace_back(static_cast<int>(off + i), static_cast<int>(off + tgt),
                                    std::conj(v));
                }
            }
        }
        SparseCd out(gd, gd);
        out.setFromTriplets(tr.begin(), tr.end());
        return out;
    };

    const SparseCd Ax = phase_field(0, false);
    const SparseCd Ay = phase_field(1, false);
    const SparseCd Az = phase_field(2, false);

    // -i d/dx as the central-difference antisymmetric stencil, tensored with
    // the Fock identity; rows at the ends simply truncate.
    SparseCd Dz(gd, gd);
    {
        std::vector<Triplet> tr;
        const cplx up(0.0, -1.0 / (2.0 * grid.spacing));
        const cplx dn(0.0, 1.0 / (2.0 * grid.spacing));
        for (std::size_t g = 0; g < G; ++g) {
            for (std::size_t f = 0; f < D; ++f) {
                const std::size_t row = g * D + f;
                if (g + 1 < G) tr.emplace_back(static_cast<int>(row), static_cast<int>(row + D), up);
                if (g >= 1) tr.emplace_back(static_cast<int>(row), static_cast<int>(row - D), dn);
            }
        }
        Dz.setFromTriplets(tr.begin(), tr.end());
    }

    SparseCd Vdiag(gd, gd);
    {
        std::vector<Triplet> tr;
        for (std::size_t g = 0; g < G; ++g) {
            for (std::size_t f = 0; f < D; ++f) {
                const std::size_t row = g * D + f;
                tr.emplace_back(static_cast<int>(row), static_cast<int>(row), cplx(V[g], 0.0));
            }
        }
        Vdiag.setFromTriplets(tr.begin(), tr.end());
    }

    const SparseCd Mx = SparseCd(e * Ax);
    const SparseCd My = SparseCd(e * Ay);
    const SparseCd Mz = Dz + SparseCd(e * Az);

    SparseCd hsp = SparseCd(0.5 * SparseCd(SparseCd(Mx * Mx) + SparseCd(My * My) + SparseCd(Mz * Mz)));
    hsp = hsp + Vdiag;
    hsp = hsp + SparseCd(kroneckerProduct(sparse_identity(G), F.field_energy().sparse()).eval());

    HermitianOperator A(base_tag, std::move(hsp));
    auto lift_B = [&](int axis) {
        return HermitianOperator(base_tag, phase_field(axis, true));
    };
    SpinBlockSpec spec{std::move(A), lift_B(0), lift_B(1), lift_B(2)};
    return build_spin_block(spec, g_spin.value_or(e / 2.0));
}

HermitianOperator build_HN_toy(const fock::FockBasis& basis, const fock::ModeSet& modes,
                               int n_spins, double e, std::size_t dim_cap) {
    if (n_spins < 1) {
        throw std::invalid_argument("build_HN_toy: n_spins must be >= 1");
    }
    const std::size_t D = basis.dim();
    const std::size_t spin_dim = std::size_t{1} << n_spins;
    if (spin_dim * D > dim_cap) {
        throw std::invalid_argument("build_HN_toy: dimension " + std::to_string(spin_dim * D) +
                                    " exceeds cap of " + std::to_string(dim_cap));
    }
    const FieldOperators F = build_field_operators(basis, modes);

    SparseCd diamag(static_cast<Eigen::Index>(D), static_cast<Eigen::Index>(D));
    for (int axis = 0; axis < 3; ++axis) {
        const SparseCd& a0 = F.A0[axis].sparse();
        diamag = diamag + SparseCd(a0 * a0);
    }
    SparseCd hfock = F.field_energy().sparse() + SparseCd(0.5 * e * e * diamag);

    SparseCd h = kroneckerProduct(sparse_identity(spin_dim), hfock).eval();
    for (int slot = 1; slot <= n_spins; ++slot) {
        for (int i = 1; i <= 3; ++i) {
            h = h + SparseCd((e / 2.0) *
                             kroneckerProduct(pauli_chain(n_spins, slot, i), F.B0[i - 1].sparse())
                                 .eval());
        }
    }
    return HermitianOperator(SpaceTag::nspin_fock(n_spins, D), std::move(h));
}

} // namespace pflab::ops
