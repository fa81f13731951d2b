// fock.hpp — discretized photon modes and the truncated occupation-number basis
#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "pflab/types.hpp"

namespace pflab::fock {

// One photon mode: wave vector k, polarization slot, quadrature weight, and a
// real polarization vector orthogonal to k.
struct Mode {
    Eigen::Vector3d k;
    int lambda{1}; // 1 or 2
    double weight{1.0};
    Eigen::Vector3d eps;
};

// Deterministic transverse pair for a wave vector:
//   eps1 = (k x z)/|k x z|,  eps2 = khat x eps1,
// and ((1,0,0),(0,1,0)) when k is parallel to +-z.
std::pair<Eigen::Vector3d, Eigen::Vector3d> polarization_pair(const Eigen::Vector3d& k);

// A finite set of modes together with the per-mode coupling
//   g_m = sqrt(w_m / (2 (2pi)^3 |k_m|)),
// the discretized measure factor of the transverse mode expansion.
class ModeSet {
public:
    // Two modes (lambda = 1, 2) per k-point, polarizations from polarization_pair.
    static ModeSet from_kpoints(const std::vector<std::pair<Eigen::Vector3d, double>>& kpoints);

    // Explicit mode list; validates |k| > 0, weight > 0, eps real unit and
    // transverse, but does not require (k,1),(k,2) pairing.
    static ModeSet from_modes(std::vector<Mode> modes);

    std::size_t size() const { return modes_.size(); }
    const Mode& mode(std::size_t m) const { return modes_[m]; }
    const std::vector<Mode>& modes() const { return modes_; }
    double coupling(std::size_t m) const { return couplings_[m]; }
    const std::vector<double>& couplings() const { return couplings_; }

private:
    ModeSet() = default;
    std::vector<Mode> modes_;
    std::vector<double> couplings_;
};

// Occupation numbers, one entry per mode.
using Occupation = std::vector<int>;

// Number of occupation states with mode_count modes and total occupation
// <= n_max: C(mode_count + n_max, mode_count). Throws when above dim_cap.
std::size_t basis_dimension(std::size_t mode_count, int n_max,
                            std::size_t dim_cap = kDefaultDimCap);

// Enumerated basis of the truncated Fock space, graded-lexicographic order:
// ascending total occupation, then lexicographic within each total. The
// vacuum (0,...,0) is always state 0.
class FockBasis {
public:
    FockBasis(std::size_t mode_count, int n_max, std::size_t dim_cap = kDefaultDimCap);

    std::size_t dim() const { return states_.size(); }
    std::size_t mode_count() const { return mode_count_; }
    int n_max() const { return n_max_; }

    const Occupation& state(std::size_t i) const { return states_[i]; }
    const std::vector<Occupation>& states() const { return states_; }

    int total_occupation(std::size_t i) const;

    // Index of an enumerated state; throws std::out_of_range if absent.
    std::size_t index_of(const Occupation& n) const;
    std::optional<std::size_t> find(const Occupation& n) const;

private:
    std::size_t mode_count_;
    int n_max_;
    std::vector<Occupation> states_;
    std::map<Occupation, std::size_t> index_;
};

} // namespace pflab::fock
