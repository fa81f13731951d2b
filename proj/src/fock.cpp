#include "pflab/fock.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace pflab::fock {

namespace {

constexpr double kGeomTol = 1e-12;

double coupling_for(const Eigen::Vector3d& k, double weight) {
    const double two_pi_cubed = std::pow(2.0 * std::numbers::pi, 3);
    return std::sqrt(weight / (2.0 * two_pi_cubed * k.norm()));
}

} // namespace

std::pair<Eigen::Vector3d, Eigen::Vector3d> polarization_pair(const Eigen::Vector3d& k) {
    const Eigen::Vector3d zhat(0.0, 0.0, 1.0);
    const Eigen::Vector3d cross = k.cross(zhat);
    if (cross.norm() <= kGeomTol * k.norm()) {
        // k parallel to +-z: fixed tie-break frame
        return {Eigen::Vector3d(1.0, 0.0, 0.0), Eigen::Vector3d(0.0, 1.0, 0.0)};
    }
    const Eigen::Vector3d eps1 = cross.normalized();
    const Eigen::Vector3d eps2 = k.normalized().cross(eps1);
    return {eps1, eps2};
}

ModeSet ModeSet::from_kpoints(const std::vector<std::pair<Eigen::Vector3d, double>>& kpoints) {
    ModeSet ms;
    ms.modes_.reserve(2 * kpoints.size());
    ms.couplings_.reserve(2 * kpoints.size());
    for (std::size_t i = 0; i < kpoints.size(); ++i) {
        const auto& [k, w] = kpoints[i];
        if (!(k.norm() > 0.0)) {
            throw std::invalid_argument("ModeSet: k-point " + std::to_string(i) +
                                        " has |k| = 0");
        }
        if (!(w > 0.0)) {
            throw std::invalid_argument("ModeSet: k-point " + std::to_string(i) +
                                        " has non-positive weight");
        }
        const auto [eps1, eps2] = polarization_pair(k);
        ms.modes_.push_back(Mode{k, 1, w, eps1});
        ms.modes_.push_back(Mode{k, 2, w, eps2});
        const double g = coupling_for(k, w);
        ms.couplings_.push_back(g);
        ms.couplings_.push_back(g);
    }
    return ms;
}

ModeSet ModeSet::from_modes(std::vector<Mode> modes) {
    ModeSet ms;
    ms.couplings_.reserve(modes.size());
    for (std::size_t m = 0; m < modes.size(); ++m) {
        const Mode& mode = modes[m];
        const double kn = mode.k.norm();
        if (!(kn > 0.0)) {
            throw std::invalid_argument("ModeSet: mode " + std::to_string(m) + " has |k| = 0");
        }
        if (!(mode.weight > 0.0)) {
            throw std::invalid_argument("ModeSet: mode " + std::to_string(m) +
                                        " has non-positive weight");
        }
        if (mode.lambda != 1 && mode.lambda != 2) {
            throw std::invalid_argument("ModeSet: mode " + std::to_string(m) +
                                        " has polarization index outside {1,2}");
        }
        if (std::abs(mode.eps.dot(mode.k)) > kGeomTol * kn) {
            throw std::invalid_argument("ModeSet: mode " + std::to_string(m) +
                                        " polarization not transverse");
        }
        if (std::abs(mode.eps.norm() - 1.0) > kGeomTol) {
            throw std::invalid_argument("ModeSet: mode " + std::to_string(m) +
                                        " polarization not unit length");
        }
        ms.couplings_.push_back(coupling_for(mode.k, mode.weight));
    }
    ms.modes_ = std::move(modes);
    return ms;
}

std::size_t basis_dimension(std::size_t mode_count, int n_max, std::size_t dim_cap) {
    if (mode_count < 1) {
        throw std::invalid_argument("basis_dimension: mode_count must be >= 1");
    }
    if (n_max < 0) {
        throw std::invalid_argument("basis_dimension: n_max must be >= 0");
    }
    // C(M + N, M) built as an exact integer product; monotone, so the cap can
    // be checked per step.
    unsigned __int128 c = 1;
    for (std::size_t i = 1; i <= mode_count; ++i) {
        c = c * (static_cast<unsigned __int128>(n_max) + i) / i;
        if (c > static_cast<unsigned __int128>(dim_cap)) {
            throw std::invalid_argument(
                "basis_dimension: dimension exceeds cap of " + std::to_string(dim_cap) +
                " (mode_count=" + std::to_string(mode_count) +
                ", n_max=" + std::to_string(n_max) + ")");
        }
    }
    return static_cast<std::size_t>(c);
}

FockBasis::FockBasis(std::size_t mode_count, int n_max, std::size_t dim_cap)
    : mode_count_(mode_count), n_max_(n_max) {
    const std::size_t dim = basis_dimension(mode_count, n_max, dim_cap);
    states_.reserve(dim);

    Occupation current(mode_count, 0);
    // Graded order: total occupation t = 0..n_max; within each t the states
    // are generated in ascending lexicographic order.
    for (int total = 0; total <= n_max; ++total) {
        auto fill = [&](auto&& self, std::size_t pos, int remaining) -> void {
            if (pos + 1 == mode_count) {
                current[pos] = remaining;
                states_.push_back(current);
                return;
            }
            for (int v = 0; v <= remaining; ++v) {
                current[pos] = v;
                self(self, pos + 1, remaining - v);
            }
        };
        fill(fill, 0, total);
    }

    for (std::size_t i = 0; i < states_.size(); ++i) {
        index_.emplace(states_[i], i);
    }
}

int FockBasis::total_occupation(std::size_t i) const {
    int t = 0;
    for (int n : states_[i]) t += n;
    return t;
}

std::size_t FockBasis::index_of(const Occupation& n) const {
    const auto it = index_.find(n);
    if (it == index_.end()) {
        throw std::out_of_range("FockBasis: state not in truncated basis");
    }
    return it->second;
}

std::optional<std::size_t> FockBasis::find(const Occupation& n) const {
    const auto it = index_.find(n);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

} // namespace pflab::fock
