#pragma once

#include <cstddef>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "bvs/bayes_factor.hpp"
#include "bvs/model_indicator.hpp"
#include "bvs/model_prior.hpp"
#include "bvs/model_space.hpp"

namespace bvs {

struct ChainConfig {
    enum class Start { Null, RandomRegular };

    std::size_t iterations = 11000;
    std::size_t burnin = 1000;
    std::size_t chains = 2;
    std::uint64_t seed = 1;
    Start start = Start::Null;

    void validate() const;
};

struct Visit {
    ModelIndicator model;
    double log_posterior = 0.0;  // log B + log prior, unnormalized
};

struct VisitedModel {
    std::size_t count = 0;
    double log_bf = 0.0;
    double log_prior = 0.0;
};

using ModelTable = std::unordered_map<ModelIndicator, VisitedModel, ModelIndicatorHash>;

/// Post-burnin output of one chain; one visit per full scan.
struct ChainSample {
    std::size_t first_iteration = 0;  // iteration number of visits.front(), 1-based
    std::vector<Visit> visits;
    ModelTable distinct_models;
    std::size_t bayes_factor_evaluations = 0;
};

/// Caches log B_gamma so every distinct model is evaluated at most once.
class ModelEvaluator {
public:
    ModelEvaluator(const RegressionProblem& problem, const MixingDensity& mix, const ModelPrior& prior);

    double log_bayes_factor(const ModelIndicator& m);
    double log_prior(std::size_t k) const { return log_prior_by_k_[k]; }
    double log_posterior(const ModelIndicator& m) { return log_bayes_factor(m) + log_prior(m.k()); }
    bool is_regular(std::size_t k) const noexcept { return classify(k, n_, k0_) == RankClass::Regular; }
    std::size_t evaluations() const noexcept { return evaluations_; }

private:
    const RegressionProblem& problem_;
    const MixingDensity& mix_;
    std::size_t n_;
    int k0_;
    std::vector<double> log_prior_by_k_;
    std::unordered_map<ModelIndicator, double, ModelIndicatorHash> cache_;
    std::size_t evaluations_ = 0;
};

/// Systematic-scan Gibbs over the regular block; one worker thread per chain.
std::vector<ChainSample> gibbs_run(const RegressionProblem& problem, const MixingDensity& mix,
                                   const ModelPrior& prior, const ChainConfig& cfg);

struct ConvergenceReport {
    std::vector<std::vector<double>> inclusion_by_chain;
    double max_discrepancy = 0.0;
    std::size_t worst_covariate = 0;
    double threshold = 0.05;
    bool converged = true;
};

ConvergenceReport convergence_check(const std::vector<ChainSample>& samples, double threshold = 0.05);

struct CEstimate {
    double log_c = 0.0;
    double c = 0.0;
    double log_numerator = 0.0;
    double hit_fraction = 0.0;
    std::size_t reference_set_size = 0;
};

/// Regular-block evidence C(n,p) from the set A of models visited by the
/// reference chain and the frequency with which the other chains fall in A.
CEstimate estimate_c(const std::vector<ChainSample>& samples, const ModelPrior& prior, std::size_t n, std::size_t p,
                     int k0, std::size_t reference_chain = 0);

struct ExactModel {
    ModelIndicator model;
    RankClass rank_class = RankClass::Regular;
    double log_bf = 0.0;
    double log_prior = 0.0;
};

/// Every one of the 2^p models with its Bayes factor and prior, plus the
/// quantities derived from the regular block alone.
struct ExactPosterior {
    std::vector<ExactModel> models;
    std::vector<double> regular_posterior;  // Pr(gamma | y, M^R), aligned with models; 0 off the block
    double log_c = 0.0;
    std::vector<double> q_regular;
    std::vector<double> regular_dimension;  // Pr(k | y, M^R)
    // Direct sums over the full model space.
    double p_singular = 0.0;
    std::vector<double> q;
    std::vector<double> dimension;
};

ExactPosterior enumerate_exact(const RegressionProblem& problem, const MixingDensity& mix, const ModelPrior& prior,
                               std::size_t p_max = 20);

}  // namespace bvs
