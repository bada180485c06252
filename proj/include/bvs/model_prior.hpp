#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "bvs/model_indicator.hpp"

namespace bvs {

/// Prior over the 2^p models. Every supported prior depends on gamma only
/// through k, so each is described by its dimension masses.
struct ModelPrior {
    enum class Kind { ScottBerger, Uniform, BetaBinomial };

    Kind kind = Kind::ScottBerger;
    double a = 1.0;
    double b = 1.0;

    static ModelPrior scott_berger() { return {}; }
    static ModelPrior uniform() { return {Kind::Uniform, 1.0, 1.0}; }
    static ModelPrior beta_binomial(double a, double b);

    std::string describe() const;
};

/// "scott-berger", "uniform" or "beta-binomial:a,b".
ModelPrior parse_prior(const std::string& spec);

double log_binomial(std::size_t p, std::size_t k);

/// log P(M_gamma) for a model of dimension k.
double log_model_prior(const ModelPrior& prior, std::size_t k, std::size_t p);
double model_prior_prob(const ModelPrior& prior, const ModelIndicator& m, std::size_t p);

/// log of the prior mass of all models of dimension k.
double log_dimension_mass(const ModelPrior& prior, std::size_t k, std::size_t p);

/// First dimension of the singular/saturated block, n - k0 (clamped at 0).
std::size_t first_singular_dimension(std::size_t n, int k0);

/// Prior mass of the saturated + singular block (k >= n - k0).
double prior_mass_singular(const ModelPrior& prior, std::size_t n, std::size_t p, int k0);
/// Prior mass of the regular block, summed independently over k < n - k0.
double prior_mass_regular(const ModelPrior& prior, std::size_t n, std::size_t p, int k0);
double log_prior_mass_singular(const ModelPrior& prior, std::size_t n, std::size_t p, int k0);
double log_prior_mass_regular(const ModelPrior& prior, std::size_t n, std::size_t p, int k0);

/// Pr(k | M^S) for k = n - k0, ..., p. Empty when the block is empty.
std::vector<double> singular_dimension_conditional(const ModelPrior& prior, std::size_t n, std::size_t p, int k0);

/// Inclusion probability of any covariate conditional on the singular block.
/// Throws when the block is empty (p < n - k0).
double q_singular(const ModelPrior& prior, std::size_t n, std::size_t p, int k0);

}  // namespace bvs
