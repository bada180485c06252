#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "bvs/gibbs.hpp"
#include "bvs/model_indicator.hpp"
#include "bvs/model_prior.hpp"

namespace bvs {

struct HpmChoice {
    ModelIndicator model;       // best regular model
    double log_posterior = 0.0; // log B + log prior of `model`
    bool singular_block = false;  // a single singular model outweighs every regular one
};

struct PosteriorSummary {
    double p_singular = 0.0;
    double log_c_estimate = 0.0;
    double c_estimate = 0.0;
    std::vector<double> q;
    std::vector<double> q_regular;
    double q_singular_value = 0.0;
    HpmChoice hpm;
    std::vector<double> dim_posterior;  // k = 0..p
};

/// P^S from C(n,p). Scott-Berger uses (p-n+k0+1) / (p-n+k0+1 + (n-k0) C);
/// other priors Pr(M^S) / (Pr(M^S) + Pr(M^R) C). Zero when M^S is empty.
double p_singular(double c, const ModelPrior& prior, std::size_t n, std::size_t p, int k0);
double p_singular_from_log_c(double log_c, const ModelPrior& prior, std::size_t n, std::size_t p, int k0);

/// Visit-weighted inclusion frequencies over all chains merged.
std::vector<double> regular_inclusion(const std::vector<ChainSample>& samples);

/// q_i = q_i^R (1 - P^S) + q^S P^S.
std::vector<double> blend_inclusion(const std::vector<double>& q_regular, double q_singular_value, double p_s);

/// Best visited model by log B + log prior; ties go to smaller k, then
/// lexicographically smaller gamma.
HpmChoice hpm(const std::vector<ChainSample>& samples, const ModelPrior& prior, std::size_t n, std::size_t p, int k0);
HpmChoice hpm(const ExactPosterior& exact, const ModelPrior& prior, std::size_t n, std::size_t p, int k0);

/// Posterior over k = 0..p from the regular-block dimension distribution
/// (indexed by k, only k < n - k0 used) and the analytic singular conditional.
std::vector<double> dimension_posterior(const std::vector<double>& regular_dimension, double p_s,
                                        const ModelPrior& prior, std::size_t n, std::size_t p, int k0);
std::vector<double> sampled_regular_dimension(const std::vector<ChainSample>& samples, std::size_t p);

struct SpuriousStats {
    double mean = 0.0;
    double max = 0.0;
};

/// Mean and max of q over covariates outside `true_set`; undefined (throws) if that set is empty.
SpuriousStats spurious_stats(const std::vector<double>& q, const std::vector<std::size_t>& true_set);

PosteriorSummary summarize(const std::vector<ChainSample>& samples, const CEstimate& c, const ModelPrior& prior,
                           std::size_t n, std::size_t p, int k0);
PosteriorSummary summarize_exact(const ExactPosterior& exact, const ModelPrior& prior, std::size_t n, std::size_t p,
                                 int k0);

}  // namespace bvs
