#include "pflab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

namespace pflab::spectral {

namespace {

bool is_real_matrix(const SparseCd& m) {
    for (int o = 0; o < m.outerSize(); ++o) {
        for (SparseCd::InnerIterator it(m, o); it; ++it) {
            if (it.value().imag() != 0.0) return false;
        }
    }
    return true;
}

// Contract checks on a sample of columns; full checks are O(n^3) and are
// exercised at small dimension by the unit tests.
void validate_pairs(const SparseCd& h, const SpectralResult& r, double tol) {
    const Eigen::Index n = r.eigenvectors.rows();
    const Eigen::Index k = r.eigenvectors.cols();
    std::vector<Eigen::Index> sample;
    if (k <= 64) {
        for (Eigen::Index i = 0; i < k; ++i) sample.push_back(i);
    } else {
        for (Eigen::Index i = 0; i < 32; ++i) sample.push_back(i);
        const Eigen::Index stride = (k - 32) / 32;
        for (Eigen::Index i = 32; i < k; i += std::max<Eigen::Index>(1, stride)) sample.push_back(i);
    }
    for (const Eigen::Index i : sample) {
        const double lambda = r.eigenvalues[i];
        const Eigen::VectorXcd v = r.eigenvectors.col(i);
        const double res = (h * v - lambda * v).norm();
        if (!(res <= tol * (1.0 + std::abs(lambda)))) {
            throw std::runtime_error("diagonalize: eigenpair residual " + std::to_string(res) +
                                     " out of contract at index " + std::to_string(i));
        }
    }
    Eigen::MatrixXcd sub(n, static_cast<Eigen::Index>(sample.size()));
    for (std::size_t c = 0; c < sample.size(); ++c) sub.col(static_cast<Eigen::Index>(c)) = r.eigenvectors.col(sample[c]);
    const Eigen::MatrixXcd gram = sub.adjoint() * sub;
    const double defect = max_abs(Eigen::MatrixXcd(
        gram - Eigen::MatrixXcd::Identity(gram.rows(), gram.cols())));
    if (!(defect <= 1e-10)) {
        throw std::runtime_error("diagonalize: orthonormality defect " + std::to_string(defect));
    }
}

SpectralResult dense_solve(const ops::HermitianOperator& H) {
    SpectralResult r;
    r.method_used = Method::Dense;
    if (is_real_matrix(H.sparse())) {
        // Real symmetric path: same spectrum, considerably faster.
        Eigen::MatrixXd hr = Eigen::MatrixXcd(H.sparse()).real();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hr);
        if (es.info() != Eigen::Success) {
            throw std::runtime_error("diagonalize: dense real solver failed");
        }
        r.eigenvalues = es.eigenvalues();
        r.eigenvectors = es.eigenvectors().cast<cplx>();
    } else {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H.dense());
        if (es.info() != Eigen::Success) {
            throw std::runtime_error("diagonalize: dense complex solver failed");
        }
        r.eigenvalues = es.eigenvalues();
        r.eigenvectors = es.eigenvectors();
    }
    return r;
}

// Block Lanczos with full two-pass reorthogonalization. Kramers pairs are
// exactly degenerate, so single-vector Krylov iterations resolve multiplicity
// unreliably; a block of >= 2 is required.
SpectralResult lanczos_solve(const ops::HermitianOperator& H, const SolverOptions& opts) {
    const SparseCd& h = H.sparse();
    const Eigen::Index n = static_cast<Eigen::Index>(H.dim());
    const int k = opts.k_lowest;
    if (k < 1) {
        throw std::invalid_argument("diagonalize: iterative path needs k_lowest >= 1");
    }
    if (static_cast<Eigen::Index>(k) > n) {
        throw std::invalid_argument("diagonalize: k_lowest exceeds dimension");
    }
    const int b = std::max(2, opts.block_size);

    std::mt19937_64 rng(opts.seed);
    std::normal_distribution<double> gauss;
    auto random_block = [&](Eigen::Index cols) {
        Eigen::MatrixXcd m(n, cols);
        for (Eigen::Index j = 0; j < cols; ++j) {
            for (Eigen::Index i = 0; i < n; ++i) m(i, j) = cplx(gauss(rng), gauss(rng));
        }
        return m;
    };

    std::vector<Eigen::MatrixXcd> Q;     // orthonormal blocks
    std::vector<Eigen::MatrixXcd> alpha; // diagonal blocks of T
    std::vector<Eigen::MatrixXcd> beta;  // subdiagonal blocks of T

    auto reorthogonalize = [&](Eigen::MatrixXcd& W) {
        for (int pass = 0; pass < 2; ++pass) {
            for (const auto& Qi : Q) {
                W.noalias() -= Qi * (Qi.adjoint() * W);
            }
        }
    };

    // Thin QR; rank-deficient columns are replaced with fresh random
    // directions so the iteration can leave an invariant subspace.
    auto orthonormalize = [&](Eigen::MatrixXcd W, Eigen::MatrixXcd* R_out) {
        Eigen::MatrixXcd R = Eigen::MatrixXcd::Zero(W.cols(), W.cols());
        for (Eigen::Index j = 0; j < W.cols(); ++j) {
            for (Eigen::Index i = 0; i < j; ++i) {
                const cplx r = W.col(i).dot(W.col(j));
                R(i, j) = r;
                W.col(j) -= r * W.col(i);
            }
            double nrm = W.col(j).norm();
            if (nrm <= 1e-12) {
                W.col(j) = random_block(1);
                reorthogonalize(W);
                for (Eigen::Index i = 0; i < j; ++i) {
                    W.col(j) -= W.col(i).dot(W.col(j)) * W.col(i);
                }
                nrm = W.col(j).norm();
                R(j, j) = 0.0; // genuine breakdown: no coupling through T
            } else {
                R(j, j) = nrm;
            }
            W.col(j) /= nrm;
        }
        if (R_out) *R_out = R;
        return W;
    };

    Eigen::MatrixXcd Q0 = orthonormalize(random_block(b), nullptr);
    {
        Eigen::MatrixXcd dummy;
        reorthogonalize(Q0);
        Q0 = orthonormalize(std::move(Q0), &dummy);
    }
    Q.push_back(Q0);

    const Eigen::Index max_blocks =
        std::min<Eigen::Index>(opts.max_iterations, (n + b - 1) / b);

    for (Eigen::Index step = 0; step < max_blocks; ++step) {
        Eigen::MatrixXcd W = h * Q[step];
        if (step > 0) W.noalias() -= Q[step - 1] * beta[step - 1].adjoint();
        Eigen::MatrixXcd A = Q[step].adjoint() * W;
        A = ((A + A.adjoint()) / 2.0).eval();
        W.noalias() -= Q[step] * A;
        reorthogonalize(W);
        alpha.push_back(A);

        Eigen::MatrixXcd R;
        Eigen::MatrixXcd Qn = orthonormalize(std::move(W), &R);
        beta.push_back(R);

        const Eigen::Index m = static_cast<Eigen::Index>(alpha.size()) * b;
        if (m < k + b && step + 1 < max_blocks) {
            Q.push_back(std::move(Qn));
            continue;
        }

        // Ritz values of the block tridiagonal T.
        Eigen::MatrixXcd T = Eigen::MatrixXcd::Zero(m, m);
        for (std::size_t i = 0; i < alpha.size(); ++i) {
            T.block(static_cast<Eigen::Index>(i) * b, static_cast<Eigen::Index>(i) * b, b, b) =
                alpha[i];
            if (i + 1 < alpha.size()) {
                T.block(static_cast<Eigen::Index>(i) * b, static_cast<Eigen::Index>(i + 1) * b, b,
                        b) = beta[i].adjoint();
                T.block(static_cast<Eigen::Index>(i + 1) * b, static_cast<Eigen::Index>(i) * b, b,
                        b) = beta[i];
            }
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(T);
        if (es.info() != Eigen::Success) {
            throw std::runtime_error("diagonalize: projected eigensolve failed");
        }

        bool converged = m >= k;
        if (converged) {
            for (int i = 0; i < k; ++i) {
                const double lambda = es.eigenvalues()[i];
                const double bound =
                    (R * es.eigenvectors().col(i).tail(b)).norm();
                if (!(bound <= opts.tol * (1.0 + std::abs(lambda)))) {
                    converged = false;
                    break;
                }
            }
        }
        if (converged || step + 1 == max_blocks || m + b > n) {
            if (!converged) {
                throw std::runtime_error(
                    "diagonalize: block Lanczos did not converge within " +
                    std::to_string(max_blocks) + " block steps");
            }
            SpectralResult r;
            r.method_used = Method::Iterative;
            r.eigenvalues = es.eigenvalues().head(k);
            r.eigenvectors = Eigen::MatrixXcd::Zero(n, k);
            for (int c = 0; c < k; ++c) {
                for (std::size_t i = 0; i < Q.size(); ++i) {
                    r.eigenvectors.col(c).noalias() +=
                        Q[i] * es.eigenvectors().col(c).segment(static_cast<Eigen::Index>(i) * b, b);
                }
            }
            validate_pairs(h, r, opts.tol);
            return r;
        }
        Q.push_back(std::move(Qn));
    }
    throw std::runtime_error("diagonalize: block Lanczos did not converge");
}

} // namespace

SpectralResult diagonalize(const ops::HermitianOperator& H, SolverOptions opts) {
    Method m = opts.method;
    if (m == Method::Auto) {
        m = H.dim() <= opts.dense_dim_limit ? Method::Dense : Method::Iterative;
    }
    if (m == Method::Dense) {
        SpectralResult r = dense_solve(H);
        validate_pairs(H.sparse(), r, opts.tol);
        return r;
    }
    return lanczos_solve(H, opts);
}

std::vector<ClusterInfo> cluster(const Eigen::VectorXd& eigs, double gap) {
    if (!(gap > 0.0)) {
        throw std::invalid_argument("cluster: gap must be positive");
    }
    std::vector<ClusterInfo> out;
    const std::size_t n = static_cast<std::size_t>(eigs.size());
    std::size_t begin = 0;
    for (std::size_t i = 1; i <= n; ++i) {
        if (i == n || eigs[static_cast<Eigen::Index>(i)] -
                              eigs[static_cast<Eigen::Index>(i - 1)] >
                          gap) {
            ClusterInfo c{};
            c.begin = begin;
            c.end = i;
            c.mean = 0.0;
            for (std::size_t j = begin; j < i; ++j) c.mean += eigs[static_cast<Eigen::Index>(j)];
            c.mean /= static_cast<double>(i - begin);
            c.spread = eigs[static_cast<Eigen::Index>(i - 1)] - eigs[static_cast<Eigen::Index>(begin)];
            out.push_back(c);
            begin = i;
        }
    }
    return out;
}

std::vector<std::size_t> DegeneracyReport::odd_cluster_indices() const {
    std::vector<std::size_t> odd;
    for (std::size_t i = 0; i < clusters.size(); ++i) {
        if (clusters[i].multiplicity % 2 != 0) odd.push_back(i);
    }
    return odd;
}

DegeneracyReport kramers_report(const ops::HermitianOperator& H,
                                const sym::AntiunitaryOperator& theta, double gap,
                                double commutator_tol) {
    if (H.dim() != theta.dim()) {
        throw std::invalid_argument("kramers_report: dimension mismatch");
    }
    SolverOptions opts;
    if (H.dim() > opts.dense_dim_limit) {
        throw std::invalid_argument("kramers_report: needs the dense solver (dim <= " +
                                    std::to_string(opts.dense_dim_limit) + ")");
    }

    DegeneracyReport rep;
    rep.dim = H.dim();
    rep.gap = gap;
    rep.commutator_tol = commutator_tol;
    rep.commutator_residual = sym::commutation_residual(H, theta);
    rep.theta_sign = theta.sign();
    rep.degeneracy_asserted =
        rep.commutator_residual <= commutator_tol && rep.theta_sign == -1;

    const SpectralResult sr = diagonalize(H, opts);
    const std::vector<ClusterInfo> cl = cluster(sr.eigenvalues, gap);

    rep.all_even = true;
    for (std::size_t ci = 0; ci < cl.size(); ++ci) {
        const ClusterInfo& c = cl[ci];
        ClusterReport cr{};
        cr.mean = c.mean;
        cr.multiplicity = c.multiplicity();
        cr.spread = c.spread;
        cr.even = cr.multiplicity % 2 == 0;
        if (!cr.even) rep.all_even = false;

        const Eigen::Index cols = static_cast<Eigen::Index>(c.end - c.begin);
        const Eigen::MatrixXcd V =
            sr.eigenvectors.middleCols(static_cast<Eigen::Index>(c.begin), cols);
        cr.max_pairing = 0.0;
        cr.max_partner_residual = 0.0;
        for (Eigen::Index j = 0; j < cols; ++j) {
            const Eigen::VectorXcd phi = V.col(j);
            const Eigen::VectorXcd tphi = theta.apply(phi);
            cr.max_pairing = std::max(cr.max_pairing, std::abs(phi.dot(tphi)));
            const Eigen::VectorXcd proj = V * (V.adjoint() * tphi);
            cr.max_partner_residual = std::max(cr.max_partner_residual, (tphi - proj).norm());
        }
        rep.max_pairing = std::max(rep.max_pairing, cr.max_pairing);
        rep.max_partner_residual = std::max(rep.max_partner_residual, cr.max_partner_residual);

        const double gap_before =
            ci == 0 ? std::numeric_limits<double>::infinity()
                    : sr.eigenvalues[static_cast<Eigen::Index>(c.begin)] -
                          sr.eigenvalues[static_cast<Eigen::Index>(cl[ci - 1].end - 1)];
        const double gap_after =
            ci + 1 == cl.size() ? std::numeric_limits<double>::infinity()
                                : sr.eigenvalues[static_cast<Eigen::Index>(cl[ci + 1].begin)] -
                                      sr.eigenvalues[static_cast<Eigen::Index>(c.end - 1)];
        cr.well_separated = std::min(gap_before, gap_after) >= 10.0 * cr.spread;
        rep.clusters.push_back(cr);
    }
    return rep;
}

} // namespace pflab::spectral
