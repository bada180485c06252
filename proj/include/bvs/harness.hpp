#pragma once

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bvs/gibbs.hpp"
#include "bvs/model_prior.hpp"
#include "bvs/model_space.hpp"
#include "bvs/summaries.hpp"

namespace bvs {

/// Synthetic regression: exchangeable Gaussian design, sparse truth, Gaussian noise.
struct ExperimentSpec {
    std::size_t n = 41;
    std::size_t p = 300;
    /// Zero-based covariate index and coefficient.
    std::vector<std::pair<std::size_t, double>> true_coefficients = {{0, 1.3}, {1, 0.3}, {2, -1.2}, {3, -0.5}};
    double noise_scale = 0.5;
    bool noise_as_sd = false;  // default: noise_scale is the variance
    double design_correlation = 0.3;
    std::uint64_t seed = 2013;
    int k0 = 0;

    void validate() const;
    std::vector<std::size_t> true_support() const;
};

Dataset simulate(const ExperimentSpec& spec);

struct AnalysisOptions {
    ModelPrior prior = ModelPrior::scott_berger();
    std::string mixing = "hyper-g:3";
    ChainConfig chains;
    bool exact = false;
    std::size_t exact_p_max = 20;
};

struct AnalysisResult {
    PosteriorSummary summary;
    std::optional<ConvergenceReport> convergence;
    std::optional<CEstimate> c;
    std::vector<ChainSample> samples;
    std::optional<ExactPosterior> exact;
    std::string mixing_description;
};

/// Gibbs chains, convergence report, C(n,p), P^S and the blended summaries;
/// with `exact` set, full enumeration replaces sampling.
AnalysisResult analyze(const Dataset& d, const AnalysisOptions& options);

struct OutputOptions {
    std::filesystem::path out_dir = "bvs-out";
    bool trace = false;
    std::size_t dim_plot_max = 60;
    std::vector<std::size_t> true_set;  // optional, enables spurious-variable statistics
};

/// summary.json, inclusion.csv, dimension.csv, convergence.json and
/// optionally trace-<chain>.csv under out_dir.
void write_analysis(const AnalysisResult& result, const Dataset& d, const AnalysisOptions& options,
                    const OutputOptions& output);

struct VerifyOptions {
    std::uint64_t seed = 7;
    std::size_t cases = 60;
    std::size_t min_n = 3;
    std::size_t max_n = 8;
    std::size_t extra_k = 4;  // k ranges over n - k0 .. n + extra_k
    bool sabotage = false;    // replace the second regularizer by a ridge term
};

/// Randomized battery over saturated and singular models: generalized
/// inverse, hat-matrix and estimable-function invariance, unitary marginal
/// ratio, determinant identity and saturated reparameterization.
nlohmann::json verify_battery(const VerifyOptions& options);

}  // namespace bvs
