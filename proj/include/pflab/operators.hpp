// operators.hpp — second-quantized field operators and Hamiltonian assembly
//
// Index layout on every tensor-product space: spin factors are slowest,
// then grid, then Fock:  i = ((s * grid_dim + x) * fock_dim + f).
// For N spin factors, factor l = 1 is the slowest of the spin group.
#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pflab/fock.hpp"
#include "pflab/types.hpp"

namespace pflab::ops {

// Shape of the space an operator acts on; the label is derived from which
// tensor factors are present.
struct SpaceTag {
    std::size_t fock_dim{1};
    std::size_t grid_dim{1};
    int spin_factors{0};

    std::size_t dim() const {
        return (std::size_t{1} << spin_factors) * grid_dim * fock_dim;
    }
    std::string label() const;

    static SpaceTag fock(std::size_t d) { return {d, 1, 0}; }
    static SpaceTag grid_fock(std::size_t g, std::size_t d) { return {d, g, 0}; }
    static SpaceTag spin_fock(std::size_t d) { return {d, 1, 1}; }
    static SpaceTag grid_spin_fock(std::size_t g, std::size_t d) { return {d, g, 1}; }
    static SpaceTag nspin_fock(int n, std::size_t d) { return {d, 1, n}; }

    bool operator==(const SpaceTag&) const = default;
};

// A complex Hermitian matrix tagged with the space it acts on. Construction
// enforces the Hermiticity gate; a failure signals an assembly bug.
class HermitianOperator {
public:
    static constexpr double kHermiticityTol = 1e-12;

    HermitianOperator(SpaceTag space, SparseCd mat);

    std::size_t dim() const { return static_cast<std::size_t>(mat_.rows()); }
    const SpaceTag& space() const { return space_; }
    const SparseCd& sparse() const { return mat_; }
    Eigen::MatrixXcd dense() const { return Eigen::MatrixXcd(mat_); }
    std::size_t nonzeros() const { return static_cast<std::size_t>(mat_.nonZeros()); }
    double hermiticity_residual() const;

private:
    SpaceTag space_;
    SparseCd mat_;
};

// Per-mode ladder matrices and the derived field operators, all on the bare
// Fock truncation. a and adag are mutually adjoint; creation out of the top
// occupation shell maps to zero.
struct FieldOperators {
    std::size_t fock_dim{0};
    std::size_t mode_count{0};
    std::vector<SparseCd> a;
    std::vector<SparseCd> adag;
    std::vector<HermitianOperator> Hf;          // single element; field energy
    std::vector<HermitianOperator> Pf;          // 3 components, diagonal real
    std::vector<HermitianOperator> A0;          // 3 components, real entries
    std::vector<HermitianOperator> B0;          // 3 components, purely imaginary entries

    const HermitianOperator& field_energy() const { return Hf.front(); }
};

FieldOperators build_field_operators(const fock::FockBasis& basis, const fock::ModeSet& modes);

// Generic 2x2 spin-block data: diagonal A and the three coupling operators.
struct SpinBlockSpec {
    HermitianOperator A;
    HermitianOperator B1;
    HermitianOperator B2;
    HermitianOperator B3;
};

// [[A + g B3, g (B1 - i B2)], [g (B1 + i B2), A - g B3]] with the spin-up
// block first; adds one spin factor to the space tag.
HermitianOperator build_spin_block(const SpinBlockSpec& spec, double g_spin);

// Spinless fixed-momentum fiber: 1/2 sum_a (P_a - Pf_a + e A0_a)^2 + Hf.
HermitianOperator build_spinless_fiber(const FieldOperators& F, const Eigen::Vector3d& P,
                                       double e);

// Fixed total momentum Hamiltonian on spin (x) Fock. g_spin defaults to e/2.
HermitianOperator build_HP(const FieldOperators& F, const Eigen::Vector3d& P, double e,
                           std::optional<double> g_spin = std::nullopt);
HermitianOperator build_HP(const fock::FockBasis& basis, const fock::ModeSet& modes,
                           const Eigen::Vector3d& P, double e,
                           std::optional<double> g_spin = std::nullopt);

// Symmetric 1-D lattice {-L h, ..., -h, 0, h, ..., L h}.
struct GridSpec {
    int half_width{0};
    double spacing{1.0};

    std::size_t points() const { return static_cast<std::size_t>(2 * half_width + 1); }
    double coordinate(std::size_t i) const {
        return (static_cast<double>(i) - half_width) * spacing;
    }
};

bool potential_is_even(const std::vector<double>& V, double tol = 1e-12);

// Electron-on-a-line Pauli-Fierz variant on grid (x) spin (x) Fock. The
// electron moves along the third axis; plane-wave phases use k_z * x. The
// free momentum enters only the z component; the x,y kinetic terms carry
// e A_{x,y}(x) alone. Warns (does not reject) when V is not even, since
// time-reversal commutation then fails by construction.
HermitianOperator build_HPF_grid(const fock::FockBasis& basis, const fock::ModeSet& modes,
                                 const GridSpec& grid, const std::vector<double>& V, double e,
                                 std::optional<double> g_spin = std::nullopt);

// N-spin toy Hamiltonian on (C^2)^(x)N (x) Fock:
//   sum_l (e/2) sigma^(l) . B(0) + Hf + 1/2 sum_a (e A0_a)^2.
HermitianOperator build_HN_toy(const fock::FockBasis& basis, const fock::ModeSet& modes,
                               int n_spins, double e, std::size_t dim_cap = kDefaultDimCap);

// Pauli matrices as sparse 2x2 blocks; i = 1, 2, 3.
SparseCd pauli(int i);
// 1 (x) ... (x) sigma_i at slot l (1-based, slowest first) (x) ... (x) 1 on (C^2)^(x)n.
SparseCd pauli_chain(int n_spins, int slot, int i);
SparseCd sparse_identity(std::size_t n);

} // namespace pflab::ops
