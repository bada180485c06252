#include "bvs/summaries.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bvs/error.hpp"

namespace bvs {

namespace {

constexpr const char* kModule = "posterior_summaries";

// Singular models all have B = 1, so the best one is the one with the largest prior.
double best_singular_log_prior(const ModelPrior& prior, std::size_t n, std::size_t p, int k0) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t k = first_singular_dimension(n, k0); k <= p; ++k) best = std::max(best, log_model_prior(prior, k, p));
    return best;
}

bool better(double lp, const ModelIndicator& m, const HpmChoice& current, bool have) {
    if (!have) return true;
    if (lp != current.log_posterior) return lp > current.log_posterior;
    if (m.k() != current.model.k()) return m.k() < current.model.k();
    return m < current.model;
}

double logistic_of_negative(double x) {
    // 1 / (1 + exp(x)) without overflow.
    if (x > 0.0) {
        const double e = std::exp(-x);
        return e / (1.0 + e);
    }
    return 1.0 / (1.0 + std::exp(x));
}

}  // namespace

double p_singular_from_log_c(double log_c, const ModelPrior& prior, std::size_t n, std::size_t p, int k0) {
    const std::size_t k_lo = first_singular_dimension(n, k0);
    if (k_lo > p) return 0.0;
    if (prior.kind == ModelPrior::Kind::ScottBerger) {
        const double singular_dims = static_cast<double>(p - k_lo + 1);
        const double regular_dims = static_cast<double>(k_lo);
        if (regular_dims == 0.0) return 1.0;
        return logistic_of_negative(std::log(regular_dims) + log_c - std::log(singular_dims));
    }
    return logistic_of_negative(log_prior_mass_regular(prior, n, p, k0) + log_c -
                                log_prior_mass_singular(prior, n, p, k0));
}

double p_singular(double c, const ModelPrior& prior, std::size_t n, std::size_t p, int k0) {
    return p_singular_from_log_c(std::log(c), prior, n, p, k0);
}

std::vector<double> regular_inclusion(const std::vector<ChainSample>& samples) {
    std::vector<double> q;
    std::size_t total = 0;
    for (const auto& s : samples) {
        for (const auto& v : s.visits) {
            if (q.empty()) q.assign(v.model.size(), 0.0);
            for (auto j : v.model.indices()) q[j] += 1.0;
        }
        total += s.visits.size();
    }
    for (auto& x : q) x /= static_cast<double>(total);
    return q;
}

std::vector<double> blend_inclusion(const std::vector<double>& q_regular, double q_singular_value, double p_s) {
    std::vector<double> q(q_regular.size());
    for (std::size_t i = 0; i < q.size(); ++i) q[i] = q_regular[i] * (1.0 - p_s) + q_singular_value * p_s;
    return q;
}

HpmChoice hpm(const std::vector<ChainSample>& samples, const ModelPrior& prior, std::size_t n, std::size_t p, int k0) {
    HpmChoice best;
    bool have = false;
    for (const auto& s : samples)
        for (const auto& [model, entry] : s.distinct_models) {
            const double lp = entry.log_bf + entry.log_prior;
            if (better(lp, model, best, have)) {
                best.model = model;
                best.log_posterior = lp;
                have = true;
            }
        }
    if (!have) throw Error(ErrorKind::Undefined, kModule, "no visited models");
    best.singular_block = best_singular_log_prior(prior, n, p, k0) > best.log_posterior;
    return best;
}

HpmChoice hpm(const ExactPosterior& exact, const ModelPrior& prior, std::size_t n, std::size_t p, int k0) {
    HpmChoice best;
    bool have = false;
    for (const auto& em : exact.models) {
        if (em.rank_class != RankClass::Regular) continue;
        const double lp = em.log_bf + em.log_prior;
        if (better(lp, em.model, best, have)) {
            best.model = em.model;
            best.log_posterior = lp;
            have = true;
        }
    }
    if (!have) throw Error(ErrorKind::Undefined, kModule, "no regular models");
    best.singular_block = best_singular_log_prior(prior, n, p, k0) > best.log_posterior;
    return best;
}

std::vector<double> sampled_regular_dimension(const std::vector<ChainSample>& samples, std::size_t p) {
    std::vector<double> dims(p + 1, 0.0);
    std::size_t total = 0;
    for (const auto& s : samples) {
        for (const auto& v : s.visits) dims[v.model.k()] += 1.0;
        total += s.visits.size();
    }
    for (auto& d : dims) d /= static_cast<double>(std::max<std::size_t>(total, 1));
    return dims;
}

std::vector<double> dimension_posterior(const std::vector<double>& regular_dimension, double p_s,
                                        const ModelPrior& prior, std::size_t n, std::size_t p, int k0) {
    std::vector<double> out(p + 1, 0.0);
    const std::size_t k_lo = first_singular_dimension(n, k0);
    for (std::size_t k = 0; k < std::min(k_lo, p + 1); ++k)
        out[k] = (1.0 - p_s) * (k < regular_dimension.size() ? regular_dimension[k] : 0.0);
    const auto cond = singular_dimension_conditional(prior, n, p, k0);
    for (std::size_t i = 0; i < cond.size(); ++i) out[k_lo + i] = p_s * cond[i];
    return out;
}

SpuriousStats spurious_stats(const std::vector<double>& q, const std::vector<std::size_t>& true_set) {
    std::vector<bool> is_true(q.size(), false);
    for (auto i : true_set) {
        if (i >= q.size()) throw Error(ErrorKind::Validation, kModule, "true covariate index out of range");
        is_true[i] = true;
    }
    SpuriousStats out;
    std::size_t count = 0;
    for (std::size_t i = 0; i < q.size(); ++i) {
        if (is_true[i]) continue;
        out.mean += q[i];
        out.max = count == 0 ? q[i] : std::max(out.max, q[i]);
        ++count;
    }
    if (count == 0) throw Error(ErrorKind::Undefined, kModule, "no spurious covariates: complement of the true set is empty");
    out.mean /= static_cast<double>(count);
    return out;
}

namespace {

PosteriorSummary finish(double log_c, std::vector<double> q_regular, const std::vector<double>& regular_dimension,
                        HpmChoice best, const ModelPrior& prior, std::size_t n, std::size_t p, int k0) {
    PosteriorSummary s;
    s.log_c_estimate = log_c;
    s.c_estimate = std::exp(log_c);
    s.p_singular = p_singular_from_log_c(log_c, prior, n, p, k0);
    s.q_singular_value = first_singular_dimension(n, k0) <= p ? q_singular(prior, n, p, k0) : 0.0;
    s.q_regular = std::move(q_regular);
    s.q = blend_inclusion(s.q_regular, s.q_singular_value, s.p_singular);
    s.hpm = std::move(best);
    s.dim_posterior = dimension_posterior(regular_dimension, s.p_singular, prior, n, p, k0);
    return s;
}

}  // namespace

PosteriorSummary summarize(const std::vector<ChainSample>& samples, const CEstimate& c, const ModelPrior& prior,
                           std::size_t n, std::size_t p, int k0) {
    return finish(c.log_c, regular_inclusion(samples), sampled_regular_dimension(samples, p),
                  hpm(samples, prior, n, p, k0), prior, n, p, k0);
}

PosteriorSummary summarize_exact(const ExactPosterior& exact, const ModelPrior& prior, std::size_t n, std::size_t p,
                                 int k0) {
    return finish(exact.log_c, exact.q_regular, exact.regular_dimension, hpm(exact, prior, n, p, k0), prior, n, p, k0);
}

}  // namespace bvs
