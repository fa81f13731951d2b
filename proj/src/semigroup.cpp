#include "pflab/semigroup.hpp"

#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include "pflab/spectral.hpp"

namespace pflab::semi {

namespace {

constexpr double kJRealTol = 1e-12;

Eigen::VectorXd function_values(const Eigen::VectorXd& eigs, FunctionSpec f) {
    Eigen::VectorXd out(eigs.size());
    switch (f.kind) {
    case FunctionSpec::Kind::ExpNegT:
        if (f.param < 0.0) {
            throw std::invalid_argument("apply_function: exp_neg_t needs t >= 0");
        }
        for (Eigen::Index i = 0; i < eigs.size(); ++i) out[i] = std::exp(-f.param * eigs[i]);
        break;
    case FunctionSpec::Kind::ResolventShift: {
        const double floor = eigs.size() ? eigs[0] + f.param : f.param;
        if (floor <= 1e-10) {
            throw std::invalid_argument("apply_function: shift leaves H + c near-singular "
                                        "(min eigenvalue + c <= 1e-10)");
        }
        for (Eigen::Index i = 0; i < eigs.size(); ++i) out[i] = 1.0 / (eigs[i] + f.param);
        break;
    }
    case FunctionSpec::Kind::IndicatorBelow:
        for (Eigen::Index i = 0; i < eigs.size(); ++i) out[i] = eigs[i] < f.param ? 1.0 : 0.0;
        break;
    }
    return out;
}

} // namespace

std::string FunctionSpec::label() const {
    std::ostringstream os;
    switch (kind) {
    case Kind::ExpNegT:
        os << "exp_neg_t(t=" << param << ")";
        break;
    case Kind::ResolventShift:
        os << "resolvent_shift(c=" << param << ")";
        break;
    case Kind::IndicatorBelow:
        os << "indicator_below(" << param << ")";
        break;
    }
    return os.str();
}

FunctionOfOperator apply_function(const ops::HermitianOperator& H, FunctionSpec f) {
    spectral::SolverOptions opts;
    if (H.dim() > opts.dense_dim_limit) {
        throw std::invalid_argument("apply_function: needs dense-diagonalizable dimension");
    }
    const spectral::SpectralResult sr = spectral::diagonalize(H, opts);
    const Eigen::VectorXd fvals = function_values(sr.eigenvalues, f);

    FunctionOfOperator out{f, Eigen::MatrixXcd()};
    if (fvals.size() > 0 && fvals.minCoeff() == fvals.maxCoeff()) {
        // f is constant on the spectrum: f(H) = c 1 exactly.
        out.matrix = fvals[0] * Eigen::MatrixXcd::Identity(static_cast<Eigen::Index>(H.dim()),
                                                           static_cast<Eigen::Index>(H.dim()));
    } else {
        out.matrix = sr.eigenvectors * fvals.asDiagonal() * sr.eigenvectors.adjoint();
    }

    const double herm = max_abs(Eigen::MatrixXcd(out.matrix - out.matrix.adjoint()));
    if (!(herm <= 1e-11)) {
        throw std::runtime_error("apply_function: f(H) Hermiticity defect " +
                                 std::to_string(herm));
    }
    const Eigen::MatrixXcd hd = H.dense();
    const double scale = (1.0 + std::max(std::abs(sr.eigenvalues[0]),
                                         std::abs(sr.eigenvalues[sr.eigenvalues.size() - 1]))) *
                         (1.0 + (fvals.size() ? fvals.cwiseAbs().maxCoeff() : 0.0));
    const double comm = max_abs(Eigen::MatrixXcd(out.matrix * hd - hd * out.matrix)) / scale;
    if (!(comm <= 1e-10)) {
        throw std::runtime_error("apply_function: f(H) does not commute with H (scaled residual " +
                                 std::to_string(comm) + ")");
    }
    return out;
}

double theta_function_commutes(const ops::HermitianOperator& H,
                               const sym::AntiunitaryOperator& theta, FunctionSpec f) {
    if (H.dim() != theta.dim()) {
        throw std::invalid_argument("theta_function_commutes: dimension mismatch");
    }
    const Eigen::MatrixXcd fh = apply_function(H, f).matrix;
    const Eigen::MatrixXcd u = Eigen::MatrixXcd(theta.unitary());
    return max_abs(Eigen::MatrixXcd(fh * u - u * fh.conjugate()));
}

VacuumSemigroupResult hiroshima_spohn_check(const ops::HermitianOperator& H_P,
                                            const fock::FockBasis& basis, double t,
                                            std::uint64_t seed, int n_random) {
    const std::size_t D = basis.dim();
    if (H_P.dim() != 2 * D || H_P.space().spin_factors != 1 || H_P.space().grid_dim != 1) {
        throw std::invalid_argument("hiroshima_spohn_check: operator must act on spin (x) Fock");
    }
    if (t < 0.0) {
        throw std::invalid_argument("hiroshima_spohn_check: t must be >= 0");
    }
    const Eigen::MatrixXcd E = apply_function(H_P, FunctionSpec::exp_neg_t(t)).matrix;
    const Eigen::Index up = 0;                            // e1 (x) vacuum
    const Eigen::Index dn = static_cast<Eigen::Index>(D); // e2 (x) vacuum

    VacuumSemigroupResult r{};
    r.t = t;
    r.offdiag = std::abs(E(up, dn));
    const double d1 = E(up, up).real();
    const double d2 = E(dn, dn).real();
    r.diag_gap = std::abs(E(up, up) - E(dn, dn));
    r.a_t = (d1 + d2) / 2.0;

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    r.max_quadratic_gap = 0.0;
    for (int i = 0; i < n_random; ++i) {
        const cplx x0(gauss(rng), gauss(rng));
        const cplx x1(gauss(rng), gauss(rng));
        const double norm2 = std::norm(x0) + std::norm(x1);
        const cplx q = std::conj(x0) * (E(up, up) * x0 + E(up, dn) * x1) +
                       std::conj(x1) * (E(dn, up) * x0 + E(dn, dn) * x1);
        r.max_quadratic_gap = std::max(r.max_quadratic_gap, std::abs(q - r.a_t * norm2));
    }
    return r;
}

JRealCheckResult jreal_generalization_check(const ops::HermitianOperator& H_P,
                                            const sym::AntiunitaryOperator& theta, FunctionSpec f,
                                            const Eigen::VectorXcd& phi, std::uint64_t seed,
                                            int n_random) {
    const std::size_t dim = H_P.dim();
    if (dim % 2 != 0 || H_P.space().spin_factors != 1 || H_P.space().grid_dim != 1) {
        throw std::invalid_argument("jreal_generalization_check: operator must act on spin (x) Fock");
    }
    const std::size_t D = dim / 2;
    if (static_cast<std::size_t>(phi.size()) != D) {
        throw std::invalid_argument("jreal_generalization_check: phi must live on the Fock factor");
    }
    // j is plain conjugation in the occupation basis, so j phi = conj(phi).
    const double jdist = (phi.conjugate() - phi).norm();
    if (!(jdist <= kJRealTol)) {
        throw std::invalid_argument("jreal_generalization_check: phi is not j-real (|| j phi - phi || = " +
                                    std::to_string(jdist) + ")");
    }
    const double comm = sym::commutation_residual(H_P, theta);
    if (!(comm <= sym::kCommuteTol)) {
        throw std::invalid_argument("jreal_generalization_check: H does not commute with theta");
    }

    const Eigen::MatrixXcd F = apply_function(H_P, f).matrix;
    const Eigen::Index d = static_cast<Eigen::Index>(D);
    auto embed = [&](const cplx& x0, const cplx& x1) {
        Eigen::VectorXcd v = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(dim));
        v.head(d) = x0 * phi;
        v.tail(d) = x1 * phi;
        return v;
    };
    const Eigen::VectorXcd v_up = embed(1.0, 0.0);
    const Eigen::VectorXcd v_dn = embed(0.0, 1.0);
    const double a_up = std::real(v_up.dot(F * v_up));
    const double a_dn = std::real(v_dn.dot(F * v_dn));

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    JRealCheckResult r{0.0, 0.0};
    for (int i = 0; i < n_random; ++i) {
        const cplx x0(gauss(rng), gauss(rng));
        const cplx x1(gauss(rng), gauss(rng));
        const double norm2 = std::norm(x0) + std::norm(x1);
        const Eigen::VectorXcd v = embed(x0, x1);
        const cplx q = v.dot(F * v);
        r.gap_up = std::max(r.gap_up, std::abs(q - a_up * norm2));
        r.gap_down = std::max(r.gap_down, std::abs(q - a_dn * norm2));
    }
    return r;
}

double semigroup_law_residual(const ops::HermitianOperator& H, double s, double t) {
    const Eigen::MatrixXcd Es = apply_function(H, FunctionSpec::exp_neg_t(s)).matrix;
    const Eigen::MatrixXcd Et = apply_function(H, FunctionSpec::exp_neg_t(t)).matrix;
    const Eigen::MatrixXcd Est = apply_function(H, FunctionSpec::exp_neg_t(s + t)).matrix;
    return max_abs(Eigen::MatrixXcd(Est - Es * Et));
}

} // namespace pflab::semi
