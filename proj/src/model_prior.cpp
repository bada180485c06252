#include "bvs/model_prior.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "bvs/error.hpp"

namespace bvs {

namespace {

constexpr const char* kModule = "priors_bayes_factors";

double log_beta(double a, double b) { return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b); }

// Normalized log dimension masses for k = 0..p built from the ratio
// m(k+1)/m(k) in long double. Direct log-gamma differences lose about 1e-11
// at p in the thousands; the recurrence keeps block sums near 1e-15.
std::vector<long double> log_dimension_table(const ModelPrior& prior, std::size_t p) {
    std::vector<long double> w(p + 1, 0.0L);
    const long double pl = static_cast<long double>(p);
    for (std::size_t k = 0; k < p; ++k) {
        const long double kl = static_cast<long double>(k);
        long double r = std::log(pl - kl) - std::log(kl + 1.0L);
        if (prior.kind == ModelPrior::Kind::BetaBinomial)
            r += std::log(kl + prior.a) - std::log(pl - kl - 1.0L + prior.b);
        w[k + 1] = w[k] + r;
    }
    const long double top = *std::max_element(w.begin(), w.end());
    long double acc = 0.0L;
    for (long double v : w) acc += std::exp(v - top);
    const long double log_total = top + std::log(acc);
    for (auto& v : w) v -= log_total;
    return w;
}

// log(sum of dimension masses) over [k_lo, k_hi].
double log_sum_dimension_mass(const ModelPrior& prior, std::size_t k_lo, std::size_t k_hi, std::size_t p) {
    if (k_lo > k_hi) return -std::numeric_limits<double>::infinity();
    if (prior.kind == ModelPrior::Kind::ScottBerger)
        return std::log(static_cast<double>(k_hi - k_lo + 1)) - std::log(static_cast<double>(p) + 1.0);
    const auto w = log_dimension_table(prior, p);
    const long double top = *std::max_element(w.begin() + static_cast<std::ptrdiff_t>(k_lo),
                                              w.begin() + static_cast<std::ptrdiff_t>(k_hi) + 1);
    long double acc = 0.0L;
    for (std::size_t k = k_lo; k <= k_hi; ++k) acc += std::exp(w[k] - top);
    return static_cast<double>(top + std::log(acc));
}

}  // namespace

ModelPrior ModelPrior::beta_binomial(double a, double b) {
    if (!(a > 0.0) || !(b > 0.0)) throw Error(ErrorKind::Validation, kModule, "beta-binomial needs a, b > 0");
    return {Kind::BetaBinomial, a, b};
}

std::string ModelPrior::describe() const {
    switch (kind) {
        case Kind::ScottBerger: return "scott-berger";
        case Kind::Uniform: return "uniform";
        case Kind::BetaBinomial: return fmt::format("beta-binomial:{},{}", a, b);
    }
    return "unknown";
}

ModelPrior parse_prior(const std::string& spec) {
    if (spec == "scott-berger") return ModelPrior::scott_berger();
    if (spec == "uniform") return ModelPrior::uniform();
    const std::string tag = "beta-binomial:";
    if (spec.rfind(tag, 0) == 0) {
        const auto rest = spec.substr(tag.size());
        const auto comma = rest.find(',');
        if (comma != std::string::npos) {
            try {
                std::size_t ua = 0, ub = 0;
                const auto sa = rest.substr(0, comma), sb = rest.substr(comma + 1);
                const double a = std::stod(sa, &ua);
                const double b = std::stod(sb, &ub);
                if (ua == sa.size() && ub == sb.size()) return ModelPrior::beta_binomial(a, b);
            } catch (const std::invalid_argument&) {
            } catch (const std::out_of_range&) {
            }
        }
    }
    throw Error(ErrorKind::Parse, kModule, fmt::format("unrecognised model prior '{}'", spec));
}

double log_binomial(std::size_t p, std::size_t k) {
    const auto pd = static_cast<double>(p), kd = static_cast<double>(k);
    return std::lgamma(pd + 1.0) - std::lgamma(kd + 1.0) - std::lgamma(pd - kd + 1.0);
}

double log_model_prior(const ModelPrior& prior, std::size_t k, std::size_t p) {
    const auto pd = static_cast<double>(p), kd = static_cast<double>(k);
    switch (prior.kind) {
        case ModelPrior::Kind::ScottBerger: return -std::log(pd + 1.0) - log_binomial(p, k);
        case ModelPrior::Kind::Uniform: return -pd * std::numbers::ln2;
        case ModelPrior::Kind::BetaBinomial:
            return log_beta(kd + prior.a, pd - kd + prior.b) - log_beta(prior.a, prior.b);
    }
    return -std::numeric_limits<double>::infinity();
}

double model_prior_prob(const ModelPrior& prior, const ModelIndicator& m, std::size_t p) {
    return std::exp(log_model_prior(prior, m.k(), p));
}

double log_dimension_mass(const ModelPrior& prior, std::size_t k, std::size_t p) {
    if (prior.kind == ModelPrior::Kind::ScottBerger) return -std::log(static_cast<double>(p) + 1.0);
    return log_binomial(p, k) + log_model_prior(prior, k, p);
}

std::size_t first_singular_dimension(std::size_t n, int k0) {
    const auto k0u = static_cast<std::size_t>(k0);
    return n > k0u ? n - k0u : 0;
}

double log_prior_mass_singular(const ModelPrior& prior, std::size_t n, std::size_t p, int k0) {
    const std::size_t k_lo = first_singular_dimension(n, k0);
    if (k_lo > p) return -std::numeric_limits<double>::infinity();
    if (prior.kind == ModelPrior::Kind::ScottBerger)
        return std::log(static_cast<double>(p - k_lo + 1)) - std::log(static_cast<double>(p) + 1.0);
    return log_sum_dimension_mass(prior, k_lo, p, p);
}

double log_prior_mass_regular(const ModelPrior& prior, std::size_t n, std::size_t p, int k0) {
    const std::size_t k_lo = first_singular_dimension(n, k0);
    if (k_lo == 0) return -std::numeric_limits<double>::infinity();
    return log_sum_dimension_mass(prior, 0, std::min(k_lo - 1, p), p);
}

double prior_mass_singular(const ModelPrior& prior, std::size_t n, std::size_t p, int k0) {
    return std::clamp(std::exp(log_prior_mass_singular(prior, n, p, k0)), 0.0, 1.0);
}

double prior_mass_regular(const ModelPrior& prior, std::size_t n, std::size_t p, int k0) {
    return std::clamp(std::exp(log_prior_mass_regular(prior, n, p, k0)), 0.0, 1.0);
}

std::vector<double> singular_dimension_conditional(const ModelPrior& prior, std::size_t n, std::size_t p, int k0) {
    const std::size_t k_lo = first_singular_dimension(n, k0);
    if (k_lo > p) return {};
    std::vector<double> out(p - k_lo + 1);
    if (prior.kind == ModelPrior::Kind::ScottBerger) {
        std::fill(out.begin(), out.end(), 1.0 / static_cast<double>(out.size()));
        return out;
    }
    const auto w = log_dimension_table(prior, p);
    const long double log_total = log_sum_dimension_mass(prior, k_lo, p, p);
    for (std::size_t k = k_lo; k <= p; ++k) out[k - k_lo] = static_cast<double>(std::exp(w[k] - log_total));
    return out;
}

double q_singular(const ModelPrior& prior, std::size_t n, std::size_t p, int k0) {
    const std::size_t k_lo = first_singular_dimension(n, k0);
    if (k_lo > p)
        throw Error(ErrorKind::Undefined, kModule,
                    fmt::format("singular block is empty (p = {} < n - k0 = {})", p, k_lo));
    if (prior.kind == ModelPrior::Kind::ScottBerger) {
        const auto pd = static_cast<double>(p), m = static_cast<double>(k_lo);
        return 0.5 * (pd * (pd + 1.0) - m * (m - 1.0)) / (pd * (pd - m + 1.0));
    }
    const auto cond = singular_dimension_conditional(prior, n, p, k0);
    long double acc = 0.0L;
    for (std::size_t k = k_lo; k <= p; ++k)
        acc += static_cast<long double>(cond[k - k_lo]) * static_cast<long double>(k);
    return static_cast<double>(acc / static_cast<long double>(p));
}

}  // namespace bvs
