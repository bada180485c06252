#pragma once

#include <Eigen/Dense>

#include <cstdint>

#include "bvs/model_indicator.hpp"
#include "bvs/model_space.hpp"

namespace bvs {

/// T = C^t C completing the row space of V_gamma^t V_gamma to R^k.
/// C is empty (0 x k) for regular and saturated models, where T = 0.
struct Regularizer {
    Eigen::MatrixXd C;
    Eigen::MatrixXd T;
};

/// Conditional law of beta_gamma given alpha, sigma = 1 and t.
struct ConditionalPosterior {
    Eigen::VectorXd mean;
    Eigen::MatrixXd scale;
    double t = 1.0;
};

struct ResidualCheck {
    bool passed = false;
    double max_residual = 0.0;
    double reference_norm = 0.0;  // ||A||_max the tolerance is scaled by
};

struct EstimablePosterior {
    double mean = 0.0;
    double variance = 0.0;
};

/// Draws the k - n + k0 rows of C from a seeded standard normal and verifies
/// rank(V^t V + T) = k, resampling up to 10 times before giving up.
Regularizer build_regularizer(const CenteredDesign& cd, const ModelIndicator& m, int k0, std::uint64_t seed);

/// A G A = A with A = V^t V and G = (V^t V + T)^{-1}; passes iff the max
/// residual is <= 1e-8 * ||A||_max. Throws when V^t V + T is singular.
ResidualCheck verify_generalized_inverse(const CenteredDesign& cd, const ModelIndicator& m, const Regularizer& reg);

ConditionalPosterior conditional_posterior(const CenteredDesign& cd, const ModelIndicator& m, const Regularizer& reg,
                                           double t, const Eigen::VectorXd& y_net);

/// H = V [V^t V (1 + 1/t) + T / t]^{-1} V^t.
Eigen::MatrixXd hat_matrix(const CenteredDesign& cd, const ModelIndicator& m, const Regularizer& reg, double t);

/// Posterior mean and variance of theta = contrast^t V beta (sigma^2 = 1).
/// `y_net` is the response net of the intercept.
EstimablePosterior estimable_posterior(const CenteredDesign& cd, const ModelIndicator& m, const Regularizer& reg,
                                       double t, const Eigen::VectorXd& y_net, const Eigen::VectorXd& contrast);

/// m_gamma(y) / m_0(y) under the regularized prior with the mixing density a
/// point mass at t, obtained by integrating beta, alpha and sigma exactly.
double marginal_ratio_fixed_t(const Dataset& d, const CenteredDesign& cd, const ModelIndicator& m,
                              const Regularizer& reg, double t);

/// det(L^t (I - P_n) L)^{-1/2} det(V^t V + T)^{1/2} |det [R; C]|^{-1}, computed in logs.
/// P_n is dropped when k0 = 0.
double log_determinant_identity(const CenteredDesign& cd, const ModelIndicator& m, const Regularizer& reg,
                                const FullRankFactors& factors);

struct ReparameterizationCheck {
    double sse = 0.0;            // residual of y on (1, L) or on L
    std::size_t rank_l = 0;
    std::size_t rank_joint = 0;  // rank of [L V_gamma]
    std::size_t rank_v = 0;
};

/// Fits the saturated reparameterization y = alpha 1 + L beta* + e.
ReparameterizationCheck check_saturated_reparameterization(const Dataset& d, const CenteredDesign& cd,
                                                           const ModelIndicator& m, const FullRankFactors& factors);

}  // namespace bvs
