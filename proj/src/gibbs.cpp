#include "bvs/gibbs.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <random>
#include <thread>

#include "bvs/error.hpp"

namespace bvs {

namespace {

constexpr const char* kModule = "gibbs_sampler";
constexpr std::size_t kCacheLimit = std::size_t{1} << 19;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_sum_exp(const std::vector<double>& v) {
    double m = kNegInf;
    for (double x : v) m = std::max(m, x);
    if (!std::isfinite(m)) return m;
    long double acc = 0.0L;
    for (double x : v) acc += std::exp(static_cast<long double>(x - m));
    return m + static_cast<double>(std::log(acc));
}

std::mt19937_64 chain_rng(std::uint64_t seed, std::size_t chain) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(chain), 0x6a09e667u};
    return std::mt19937_64(seq);
}

ModelIndicator starting_model(std::size_t p, std::size_t n, int k0, ChainConfig::Start start,
                              std::mt19937_64& rng) {
    ModelIndicator m(p);
    if (start == ChainConfig::Start::Null) return m;
    const std::size_t k_max = std::min(p, n - static_cast<std::size_t>(k0) - 1);
    std::uniform_int_distribution<std::size_t> dim(0, k_max);
    const std::size_t k = dim(rng);
    std::vector<std::size_t> idx(p);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = 0; i < k; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, p - 1);
        std::swap(idx[i], idx[pick(rng)]);
        m.set(idx[i], true);
    }
    return m;
}

ChainSample run_chain(const RegressionProblem& problem, const MixingDensity& mix, const ModelPrior& prior,
                      const ChainConfig& cfg, std::size_t chain) {
    const std::size_t p = problem.p();
    ModelEvaluator eval(problem, mix, prior);
    auto rng = chain_rng(cfg.seed, chain);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    ModelIndicator state = starting_model(p, problem.n(), problem.k0(), cfg.start, rng);
    double current = eval.log_posterior(state);

    ChainSample sample;
    sample.first_iteration = cfg.burnin + 1;
    sample.visits.reserve(cfg.iterations - cfg.burnin);
    for (std::size_t it = 0; it < cfg.iterations; ++it) {
        for (std::size_t j = 0; j < p; ++j) {
            state.flip(j);
            // Flips leaving the regular block have conditional probability zero.
            if (!eval.is_regular(state.k())) {
                state.flip(j);
                continue;
            }
            const double alternative = eval.log_posterior(state);
            const double prob_alt = 1.0 / (1.0 + std::exp(current - alternative));
            if (unif(rng) < prob_alt)
                current = alternative;
            else
                state.flip(j);
        }
        if (it >= cfg.burnin) {
            sample.visits.push_back({state, current});
            auto [entry, inserted] = sample.distinct_models.try_emplace(state);
            if (inserted) {
                entry->second.log_bf = eval.log_bayes_factor(state);
                entry->second.log_prior = eval.log_prior(state.k());
            }
            ++entry->second.count;
        }
    }
    sample.bayes_factor_evaluations = eval.evaluations();
    return sample;
}

}  // namespace

void ChainConfig::validate() const {
    if (iterations == 0) throw Error(ErrorKind::Validation, kModule, "iterations must be positive");
    if (burnin >= iterations) throw Error(ErrorKind::Validation, kModule, "burnin must be smaller than iterations");
    if (chains < 2) throw Error(ErrorKind::Validation, kModule, "at least two chains are required");
}

ModelEvaluator::ModelEvaluator(const RegressionProblem& problem, const MixingDensity& mix, const ModelPrior& prior)
    : problem_(problem), mix_(mix), n_(problem.n()), k0_(problem.k0()) {
    log_prior_by_k_.resize(problem.p() + 1);
    for (std::size_t k = 0; k <= problem.p(); ++k) log_prior_by_k_[k] = bvs::log_model_prior(prior, k, problem.p());
}

double ModelEvaluator::log_bayes_factor(const ModelIndicator& m) {
    if (const auto it = cache_.find(m); it != cache_.end()) return it->second;
    const ModelStats stats = problem_.stats(m);
    const double value = bayes_factor(stats, mix_, n_, k0_, &m).log_value;
    ++evaluations_;
    // Bayes factors are pure functions of the model, so dropping the cache
    // only costs recomputation; it keeps memory flat on long runs.
    if (cache_.size() >= kCacheLimit) cache_.clear();
    cache_.emplace(m, value);
    return value;
}

std::vector<ChainSample> gibbs_run(const RegressionProblem& problem, const MixingDensity& mix,
                                   const ModelPrior& prior, const ChainConfig& cfg) {
    cfg.validate();
    if (problem.n() <= static_cast<std::size_t>(problem.k0()))
        throw Error(ErrorKind::Initialization, kModule, "no regular model exists (n <= k0)");

    std::vector<ChainSample> samples(cfg.chains);
    std::vector<std::exception_ptr> failures(cfg.chains);
    std::vector<std::thread> workers;
    workers.reserve(cfg.chains);
    for (std::size_t c = 0; c < cfg.chains; ++c) {
        workers.emplace_back([&, c] {
            try {
                samples[c] = run_chain(problem, mix, prior, cfg, c);
            } catch (...) {
                failures[c] = std::current_exception();
            }
        });
    }
    for (auto& w : workers) w.join();
    for (const auto& f : failures)
        if (f) std::rethrow_exception(f);
    return samples;
}

ConvergenceReport convergence_check(const std::vector<ChainSample>& samples, double threshold) {
    ConvergenceReport report;
    report.threshold = threshold;
    for (const auto& s : samples) {
        std::vector<double> freq(s.visits.empty() ? 0 : s.visits.front().model.size(), 0.0);
        for (const auto& v : s.visits)
            for (auto j : v.model.indices()) freq[j] += 1.0;
        for (auto& f : freq) f /= static_cast<double>(std::max<std::size_t>(1, s.visits.size()));
        report.inclusion_by_chain.push_back(std::move(freq));
    }
    const auto& chains = report.inclusion_by_chain;
    for (std::size_t a = 0; a < chains.size(); ++a)
        for (std::size_t b = a + 1; b < chains.size(); ++b)
            for (std::size_t j = 0; j < std::min(chains[a].size(), chains[b].size()); ++j) {
                const double d = std::abs(chains[a][j] - chains[b][j]);
                if (d > report.max_discrepancy) {
                    report.max_discrepancy = d;
                    report.worst_covariate = j;
                }
            }
    report.converged = report.max_discrepancy <= threshold;
    return report;
}

CEstimate estimate_c(const std::vector<ChainSample>& samples, const ModelPrior& prior, std::size_t n, std::size_t p,
                     int k0, std::size_t reference_chain) {
    if (samples.size() < 2) throw Error(ErrorKind::Estimation, kModule, "C(n,p) needs at least two chains");
    if (reference_chain >= samples.size()) throw Error(ErrorKind::Estimation, kModule, "reference chain out of range");

    const auto& reference = samples[reference_chain].distinct_models;
    const double log_regular_mass = log_prior_mass_regular(prior, n, p, k0);
    std::vector<double> terms;
    terms.reserve(reference.size());
    for (const auto& [model, entry] : reference) terms.push_back(entry.log_bf + entry.log_prior - log_regular_mass);

    std::size_t hits = 0, total = 0;
    for (std::size_t c = 0; c < samples.size(); ++c) {
        if (c == reference_chain) continue;
        for (const auto& v : samples[c].visits) {
            ++total;
            if (reference.contains(v.model)) ++hits;
        }
    }
    if (hits == 0)
        throw Error(ErrorKind::Estimation, kModule,
                    "the second chain never visited a model seen by the reference chain; run longer chains");

    CEstimate est;
    est.reference_set_size = reference.size();
    est.log_numerator = log_sum_exp(terms);
    est.hit_fraction = static_cast<double>(hits) / static_cast<double>(total);
    est.log_c = est.log_numerator - std::log(est.hit_fraction);
    est.c = std::exp(est.log_c);
    return est;
}

ExactPosterior enumerate_exact(const RegressionProblem& problem, const MixingDensity& mix, const ModelPrior& prior,
                               std::size_t p_max) {
    const std::size_t p = problem.p();
    if (p > p_max || p > 30)
        throw Error(ErrorKind::Refusal, kModule,
                    fmt::format("exact enumeration refused for p = {} (limit {})", p, std::min<std::size_t>(p_max, 30)));
    const std::size_t n = problem.n();
    const int k0 = problem.k0();
    const std::size_t count = std::size_t{1} << p;

    ExactPosterior out;
    out.models.reserve(count);
    std::vector<double> log_w(count), log_w_regular;
    for (std::size_t bits = 0; bits < count; ++bits) {
        ExactModel em;
        em.model = ModelIndicator::from_bits(p, bits);
        const ModelStats stats = problem.stats(em.model);
        em.rank_class = stats.rank_class;
        em.log_bf = bayes_factor(stats, mix, n, k0, &em.model).log_value;
        em.log_prior = log_model_prior(prior, em.model.k(), p);
        log_w[bits] = em.log_bf + em.log_prior;
        if (em.rank_class == RankClass::Regular) log_w_regular.push_back(log_w[bits]);
        out.models.push_back(std::move(em));
    }

    const double log_total = log_sum_exp(log_w);
    const double log_regular = log_sum_exp(log_w_regular);
    out.log_c = log_regular - log_prior_mass_regular(prior, n, p, k0);

    out.regular_posterior.assign(count, 0.0);
    out.q_regular.assign(p, 0.0);
    out.q.assign(p, 0.0);
    out.regular_dimension.assign(p + 1, 0.0);
    out.dimension.assign(p + 1, 0.0);
    long double singular_mass = 0.0L;
    for (std::size_t bits = 0; bits < count; ++bits) {
        const auto& em = out.models[bits];
        const double w = std::exp(log_w[bits] - log_total);
        out.dimension[em.model.k()] += w;
        for (auto j : em.model.indices()) out.q[j] += w;
        if (em.rank_class != RankClass::Regular) {
            singular_mass += w;
            continue;
        }
        const double wr = std::exp(log_w[bits] - log_regular);
        out.regular_posterior[bits] = wr;
        out.regular_dimension[em.model.k()] += wr;
        for (auto j : em.model.indices()) out.q_regular[j] += wr;
    }
    out.p_singular = static_cast<double>(singular_mass);
    return out;
}

}  // namespace bvs
