#pragma once

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

#include "bvs/gibbs.hpp"
#include "bvs/model_space.hpp"
#include "bvs/summaries.hpp"

namespace bvs {

/// %.17g; non-finite values become "nan", "inf" or "-inf".
std::string format_double(double v);

/// Deterministic JSON text: keys sorted, floats at 17 significant digits,
/// non-finite floats written as null.
std::string dump_json(const nlohmann::json& j, int indent = 2);

void write_text(const std::filesystem::path& path, const std::string& text);

nlohmann::json summary_to_json(const PosteriorSummary& s, const std::vector<std::string>& names);
nlohmann::json convergence_to_json(const ConvergenceReport& r);

/// covariate,index,q,q_regular sorted by q descending (index breaks ties).
void write_inclusion_csv(const std::filesystem::path& path, const PosteriorSummary& s,
                         const std::vector<std::string>& names);
/// k,probability for k = 0..min(p, max_k).
void write_dimension_csv(const std::filesystem::path& path, const std::vector<double>& dim_posterior,
                         std::size_t max_k);
/// iteration,k,log_posterior,gamma_hex
void write_trace_csv(const std::filesystem::path& path, const ChainSample& chain);
/// Response first, then covariates in order.
void write_dataset_csv(const std::filesystem::path& path, const Dataset& d);

}  // namespace bvs
