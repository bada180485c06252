#include "bvs/regularized_prior.hpp"

#include <fmt/format.h>

#include <cmath>
#include <random>

#include "bvs/error.hpp"

namespace bvs {

namespace {

constexpr const char* kModule = "regularized_prior";
constexpr int kMaxRegularizerAttempts = 10;
constexpr double kResidualTolerance = 1e-8;

Eigen::LLT<Eigen::MatrixXd> factor_spd(const Eigen::MatrixXd& M, const char* what) {
    Eigen::LLT<Eigen::MatrixXd> llt(M);
    if (llt.info() != Eigen::Success || numerical_rank(M) != static_cast<std::size_t>(M.rows()))
        throw Error(ErrorKind::InvariantViolation, kModule, fmt::format("{} is singular", what));
    return llt;
}

double log_det_llt(const Eigen::LLT<Eigen::MatrixXd>& llt) {
    return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

Eigen::MatrixXd posterior_precision(const Eigen::MatrixXd& Vg, const Regularizer& reg, double t) {
    if (!(t > 0.0)) throw Error(ErrorKind::Validation, kModule, "t must be positive");
    Eigen::MatrixXd M = (Vg.transpose() * Vg) * (1.0 + 1.0 / t);
    if (reg.T.size() > 0) M += reg.T / t;
    return M;
}

// A square root C with C^t C = T: the stored rows when present, otherwise
// from the eigendecomposition of T (for regularizers given only through T).
Eigen::MatrixXd regularizer_root(const Regularizer& reg, Eigen::Index k) {
    if (reg.C.rows() > 0 || reg.T.size() == 0 || reg.T.isZero(0.0)) {
        if (reg.C.rows() > 0) return reg.C;
        return Eigen::MatrixXd::Zero(0, k);
    }
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(reg.T);
    const Eigen::VectorXd vals = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return vals.asDiagonal() * eig.eigenvectors().transpose();
}

// Z = V (w V^t V + T)^{-1/2} in the sense Z Z^t = V (w V^t V + T)^{-1} V^t,
// computed from a pivoted QR of [sqrt(w) V; C] rather than the normal equations.
struct Whitened {
    Eigen::MatrixXd Z;
    double log_det = 0.0;  // log det(w V^t V + T)
};

Whitened whiten(const Eigen::MatrixXd& Vg, const Regularizer& reg, double weight, const char* what) {
    const auto k = Vg.cols();
    const Eigen::MatrixXd C = regularizer_root(reg, k);
    Eigen::MatrixXd W(Vg.rows() + C.rows(), k);
    W << std::sqrt(weight) * Vg, C;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(W);
    if (W.rows() < k || numerical_rank(W) != static_cast<std::size_t>(k))
        throw Error(ErrorKind::InvariantViolation, kModule, fmt::format("{} is singular", what));
    const Eigen::MatrixXd R = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
    const Eigen::MatrixXd VP = Vg * qr.colsPermutation();
    Whitened out;
    out.Z = R.transpose().triangularView<Eigen::Lower>().solve(VP.transpose()).transpose();
    out.log_det = 2.0 * R.diagonal().array().abs().log().sum();
    return out;
}

}  // namespace

Regularizer build_regularizer(const CenteredDesign& cd, const ModelIndicator& m, int k0, std::uint64_t seed) {
    const auto n = static_cast<std::size_t>(cd.V.rows());
    const auto k = static_cast<Eigen::Index>(m.k());
    Regularizer reg;
    if (classify(m, n, k0) != RankClass::Singular) {
        reg.C = Eigen::MatrixXd::Zero(0, k);
        reg.T = Eigen::MatrixXd::Zero(k, k);
        return reg;
    }
    const auto rows = static_cast<Eigen::Index>(m.k() + static_cast<std::size_t>(k0) - n);
    const Eigen::MatrixXd Vg = select_columns(cd.V, m);
    const Eigen::MatrixXd A = Vg.transpose() * Vg;
    for (int attempt = 0; attempt < kMaxRegularizerAttempts; ++attempt) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(attempt)};
        std::mt19937_64 rng(seq);
        std::normal_distribution<double> normal;
        reg.C.resize(rows, k);
        for (Eigen::Index i = 0; i < rows; ++i)
            for (Eigen::Index j = 0; j < k; ++j) reg.C(i, j) = normal(rng);
        reg.T = reg.C.transpose() * reg.C;
        if (numerical_rank(reg.C) == static_cast<std::size_t>(rows) &&
            numerical_rank(A + reg.T) == static_cast<std::size_t>(k))
            return reg;
    }
    throw Error(ErrorKind::Construction, kModule,
                fmt::format("could not complete the row space of model 0x{} after {} draws", m.to_hex(),
                            kMaxRegularizerAttempts));
}

ResidualCheck verify_generalized_inverse(const CenteredDesign& cd, const ModelIndicator& m, const Regularizer& reg) {
    const Eigen::MatrixXd Vg = select_columns(cd.V, m);
    const Eigen::MatrixXd A = Vg.transpose() * Vg;
    ResidualCheck out;
    if (A.size() == 0) {
        out.passed = true;
        return out;
    }
    // A G A = V^t Z Z^t V with G = (A + T)^{-1}.
    const Whitened w = whiten(Vg, reg, 1.0, "V^t V + T");
    const Eigen::MatrixXd ZtV = w.Z.transpose() * Vg;
    out.reference_norm = A.cwiseAbs().maxCoeff();
    out.max_residual = (ZtV.transpose() * ZtV - A).cwiseAbs().maxCoeff();
    out.passed = out.max_residual <= kResidualTolerance * out.reference_norm;
    return out;
}

ConditionalPosterior conditional_posterior(const CenteredDesign& cd, const ModelIndicator& m, const Regularizer& reg,
                                           double t, const Eigen::VectorXd& y_net) {
    const Eigen::MatrixXd Vg = select_columns(cd.V, m);
    const auto llt = factor_spd(posterior_precision(Vg, reg, t), "posterior precision");
    ConditionalPosterior post;
    post.t = t;
    post.scale = llt.solve(Eigen::MatrixXd::Identity(Vg.cols(), Vg.cols()));
    post.mean = llt.solve(Vg.transpose() * y_net);
    return post;
}

Eigen::MatrixXd hat_matrix(const CenteredDesign& cd, const ModelIndicator& m, const Regularizer& reg, double t) {
    const Eigen::MatrixXd Vg = select_columns(cd.V, m);
    if (Vg.cols() == 0) return Eigen::MatrixXd::Zero(Vg.rows(), Vg.rows());
    if (!(t > 0.0)) throw Error(ErrorKind::Validation, kModule, "t must be positive");
    // [V^t V (1 + 1/t) + T/t]^{-1} = t [(1 + t) V^t V + T]^{-1}.
    const Whitened w = whiten(Vg, reg, 1.0 + t, "posterior precision");
    return t * (w.Z * w.Z.transpose());
}

EstimablePosterior estimable_posterior(const CenteredDesign& cd, const ModelIndicator& m, const Regularizer& reg,
                                       double t, const Eigen::VectorXd& y_net, const Eigen::VectorXd& contrast) {
    const Eigen::MatrixXd H = hat_matrix(cd, m, reg, t);
    const Eigen::VectorXd Hc = H.transpose() * contrast;
    return {Hc.dot(y_net), contrast.dot(H * contrast)};
}

double marginal_ratio_fixed_t(const Dataset& d, const CenteredDesign& cd, const ModelIndicator& m,
                              const Regularizer& reg, double t) {
    const auto n = static_cast<Eigen::Index>(d.n());
    const double sse0 = null_sse(d);
    if (!(sse0 > 0.0))
        throw Error(ErrorKind::DegenerateResponse, kModule, "null-model SSE is zero; the response is degenerate");
    if (!(t > 0.0)) throw Error(ErrorKind::Validation, kModule, "t must be positive");

    // Marginally over beta, y | alpha, sigma ~ N(alpha 1, sigma^2 (I + t V G V^t)).
    const Eigen::MatrixXd Vg = select_columns(cd.V, m);
    Eigen::MatrixXd cov = Eigen::MatrixXd::Identity(n, n);
    if (Vg.cols() > 0) {
        const Whitened w = whiten(Vg, reg, 1.0, "V^t V + T");
        cov += t * (w.Z * w.Z.transpose());
    }
    const auto llt = factor_spd(cov, "marginal covariance");
    const double log_det = log_det_llt(llt);
    const double nk = static_cast<double>(d.n()) - d.k0;

    // Flat prior on alpha integrates to a generalized least squares profile;
    // 1/sigma integrates the remaining quadratic form.
    const Eigen::VectorXd wy = llt.solve(d.y);
    double quad = d.y.dot(wy);
    double log_alpha_term = 0.0;
    if (d.k0 == 1) {
        const Eigen::VectorXd one = Eigen::VectorXd::Ones(n);
        const Eigen::VectorXd w1 = llt.solve(one);
        const double one_w_one = one.dot(w1);
        const double one_w_y = one.dot(wy);
        quad -= one_w_y * one_w_y / one_w_one;
        log_alpha_term = -0.5 * std::log(one_w_one / static_cast<double>(n));
    }
    if (!(quad > 0.0))
        throw Error(ErrorKind::DegenerateResponse, kModule, "marginal quadratic form is not positive");
    return std::exp(-0.5 * log_det + log_alpha_term - 0.5 * nk * std::log(quad / sse0));
}

double log_determinant_identity(const CenteredDesign& cd, const ModelIndicator& m, const Regularizer& reg,
                                const FullRankFactors& factors) {
    const Eigen::MatrixXd Vg = select_columns(cd.V, m);
    Eigen::MatrixXd L = factors.L;
    if (cd.k0 == 1) L = L.rowwise() - L.colwise().mean();
    const double ld_l = log_det_llt(factor_spd(L.transpose() * L, "L^t (I - P_n) L"));
    const double ld_vt = whiten(Vg, reg, 1.0, "V^t V + T").log_det;

    Eigen::MatrixXd W(factors.R.rows() + reg.C.rows(), factors.R.cols());
    W << factors.R, reg.C;
    if (W.rows() != W.cols())
        throw Error(ErrorKind::InvariantViolation, kModule,
                    fmt::format("[R; C] is {}x{}, expected square", W.rows(), W.cols()));
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(W);
    const double ld_w = lu.matrixLU().diagonal().array().abs().log().sum();
    return -0.5 * ld_l + 0.5 * ld_vt - ld_w;
}

ReparameterizationCheck check_saturated_reparameterization(const Dataset& d, const CenteredDesign& cd,
                                                           const ModelIndicator& m, const FullRankFactors& factors) {
    const Eigen::MatrixXd Vg = select_columns(cd.V, m);
    const auto n = factors.L.rows();
    Eigen::MatrixXd design(n, factors.L.cols() + d.k0);
    if (d.k0 == 1)
        design << Eigen::VectorXd::Ones(n), factors.L;
    else
        design = factors.L;
    const Eigen::VectorXd fitted = design * design.colPivHouseholderQr().solve(d.y);

    Eigen::MatrixXd joint(n, factors.L.cols() + Vg.cols());
    joint << factors.L, Vg;

    ReparameterizationCheck out;
    out.sse = (d.y - fitted).squaredNorm();
    out.rank_l = numerical_rank(factors.L);
    out.rank_joint = numerical_rank(joint);
    out.rank_v = numerical_rank(Vg);
    return out;
}

}  // namespace bvs
