// spectral.hpp — Hermitian eigensolvers, eigenvalue clustering, and the
// Kramers degeneracy report
#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "pflab/operators.hpp"
#include "pflab/symmetry.hpp"
#include "pflab/types.hpp"

namespace pflab::spectral {

enum class Method { Auto, Dense, Iterative };

struct SolverOptions {
    Method method{Method::Auto};
    // Number of lowest eigenpairs for the iterative path; -1 means all
    // (dense only).
    int k_lowest{-1};
    int block_size{2};
    int max_iterations{500};
    double tol{1e-9};
    std::uint64_t seed{0x5eed5eedULL};
    std::size_t dense_dim_limit{4096};
};

struct SpectralResult {
    Eigen::VectorXd eigenvalues;   // ascending
    Eigen::MatrixXcd eigenvectors; // orthonormal columns, one per eigenvalue
    Method method_used{Method::Dense};
};

// Dense for dim <= dense_dim_limit (all pairs), block Lanczos with full
// reorthogonalization otherwise (k_lowest pairs). Per-pair residuals are
// held to tol*(1+|lambda|); non-convergence raises, never returns partial
// results.
SpectralResult diagonalize(const ops::HermitianOperator& H, SolverOptions opts = {});

struct ClusterInfo {
    std::size_t begin; // index range [begin, end) into the ascending spectrum
    std::size_t end;
    double mean;
    double spread; // max - min within the cluster

    int multiplicity() const { return static_cast<int>(end - begin); }
};

// Maximal runs with consecutive gaps <= gap, merged transitively; the cluster
// value is the mean.
std::vector<ClusterInfo> cluster(const Eigen::VectorXd& eigs_ascending, double gap);

struct ClusterReport {
    double mean;
    int multiplicity;
    double spread;
    double max_pairing;          // max |<phi, theta phi>| over the cluster
    double max_partner_residual; // max dist of theta phi from the cluster eigenspace
    bool even;
    bool well_separated; // surrounding spectral gap >= 10x the cluster spread
};

struct DegeneracyReport {
    std::size_t dim{0};
    double gap{0.0};
    double commutator_residual{0.0};
    double commutator_tol{sym::kCommuteTol};
    int theta_sign{0};
    // True when the preconditions for the degeneracy assertion hold
    // (commutator within tolerance and theta^2 = -1); otherwise the cluster
    // data below is diagnostic only.
    bool degeneracy_asserted{false};
    bool all_even{false};
    double max_pairing{0.0};
    double max_partner_residual{0.0};
    std::vector<ClusterReport> clusters;

    std::vector<std::size_t> odd_cluster_indices() const;
};

// Dense diagonalization, clustering at `gap`, and per-cluster pairing and
// partner diagnostics. Refuses to assert degeneracy when the commutator
// residual exceeds its tolerance or theta^2 = +1; diagnostics are still
// reported.
DegeneracyReport kramers_report(const ops::HermitianOperator& H,
                                const sym::AntiunitaryOperator& theta, double gap,
                                double commutator_tol = sym::kCommuteTol);

} // namespace pflab::spectral
