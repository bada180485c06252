// Acceptance gate. Each criterion prints one PASS/FAIL line; with no
// argument all criteria run, otherwise only the named ones.

#include <fmt/format.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <algorithm>
#include <functional>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "bvs/bayes_factor.hpp"
#include "bvs/gibbs.hpp"
#include "bvs/harness.hpp"
#include "bvs/model_prior.hpp"
#include "bvs/regularized_prior.hpp"
#include "bvs/summaries.hpp"

using namespace bvs;

namespace {

// Tolerances and budgets.
constexpr double kIdentityTol = 1e-8;
constexpr double kClosedFormTol = 1e-12;
constexpr double kLimitTol = 1e-3;
constexpr double kOracleTv = 0.02;
constexpr double kOracleC = 0.05;
constexpr double kOraclePs = 1e-3;
constexpr double kDualTol = 1e-8;
constexpr double kPriorSumTol = 1e-10;
constexpr double kPriorSplitTol = 1e-12;

struct Outcome {
    bool passed = false;
    std::string detail;
};

struct Criterion {
    const char* name;
    double budget_seconds;
    std::function<Outcome()> run;
};

Eigen::MatrixXd gaussian(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
    std::normal_distribution<double> z;
    Eigen::MatrixXd M(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) M(i, j) = z(rng);
    return M;
}

double check_residual(const nlohmann::json& report, const char* name) {
    return report.at("checks").at(name).at("max_residual").get<double>();
}

Outcome unitary_bayes_factor() {
    VerifyOptions opts;
    opts.cases = 60;
    const auto report = verify_battery(opts);
    const double worst = check_residual(report, "unitary_marginal_ratio");
    const auto evals = report.at("checks").at("unitary_marginal_ratio").at("evaluations").get<std::size_t>();
    return {worst <= kIdentityTol && opts.cases >= 50,
            fmt::format("cases={} ratio evaluations={} max|ratio-1|={:.3g} tol={:g}", opts.cases, evals, worst,
                        kIdentityTol)};
}

Outcome saturated_matching() {
    std::mt19937_64 rng(31);
    std::size_t models = 0;
    double worst_q = 0.0, worst_integral = 0.0;
    bool exact_one = true;
    for (int k0 = 0; k0 <= 1; ++k0) {
        for (std::size_t n : {3u, 5u, 8u, 12u}) {
            const std::size_t p = n + 3;
            Eigen::MatrixXd X = gaussian(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p), rng);
            Eigen::VectorXd y = gaussian(static_cast<Eigen::Index>(n), 1, rng).col(0);
            const RegressionProblem prob(make_dataset(y, X, k0));
            const std::vector<MixingDensity> mixes{MixingDensity::point_mass(static_cast<double>(n)),
                                                   MixingDensity::hyper_g(3.0),
                                                   parse_mixing("quadrature:zellner-siow", n)};
            for (std::size_t start = 0; start < 3; ++start) {
                std::vector<std::size_t> idx;
                for (std::size_t j = 0; j < n - static_cast<std::size_t>(k0); ++j) idx.push_back(start + j);
                const auto m = ModelIndicator::from_indices(p, idx);
                const auto s = prob.stats(m);
                worst_q = std::max(worst_q, s.q_ratio);
                for (const auto& mix : mixes) {
                    exact_one = exact_one && bayes_factor(s, mix, n, k0, &m).value == 1.0 &&
                                s.rank_class == RankClass::Saturated;
                    // The integral itself, evaluated without the shortcut.
                    worst_integral = std::max(
                        worst_integral, std::abs(std::expm1(log_conventional_integral(s.q_ratio, s.k, n, k0, mix))));
                }
                ++models;
            }
        }
    }
    const bool ok = exact_one && worst_q <= kIdentityTol && worst_integral <= kIdentityTol;
    return {ok, fmt::format("models={} mixings=3 B==1 exactly: {} max Q={:.3g} max|integral-1|={:.3g}", models,
                            exact_one ? "yes" : "no", worst_q, worst_integral)};
}

Outcome generalized_inverse_invariance() {
    VerifyOptions opts;
    opts.cases = 60;
    const auto report = verify_battery(opts);
    const double gi = check_residual(report, "generalized_inverse");
    const double hat = check_residual(report, "hat_matrix_invariance");
    const double est = check_residual(report, "estimable_invariance");
    const bool ok = gi <= kIdentityTol && hat <= kIdentityTol && est <= kIdentityTol;
    return {ok, fmt::format("cases={} AGA-A={:.3g} hat={:.3g} estimable={:.3g} tol={:g}", opts.cases, gi, hat, est,
                            kIdentityTol)};
}

Outcome singular_inclusion_limits() {
    const auto sb = ModelPrior::scott_berger();
    double worst_closed = 0.0;
    for (auto [p, n, k0] : {std::tuple<std::size_t, std::size_t, int>{20, 7, 1}, {50, 10, 0}, {8408, 41, 0}}) {
        // Every singular dimension carries the same prior mass 1/(p+1).
        long double num = 0.0L, den = 0.0L;
        for (std::size_t k = n - static_cast<std::size_t>(k0); k <= p; ++k) {
            num += static_cast<long double>(k) / static_cast<long double>(p);
            den += 1.0L;
        }
        worst_closed = std::max(worst_closed, std::abs(q_singular(sb, n, p, k0) - static_cast<double>(num / den)));
    }
    const double q_fixed_n = q_singular(sb, 41, 1000000, 0);
    const double q_half = q_singular(sb, 5000, 10000, 0);
    const bool ok = worst_closed <= kClosedFormTol && std::abs(q_fixed_n - 0.5) < kLimitTol &&
                    std::abs(q_half - 0.375) < kLimitTol;
    return {ok, fmt::format("closed-vs-sum={:.3g} (tol {:g}); q^S(p=1e6,n=41)={:.6f} target 0.5; "
                            "q^S(p=1e4,n=5000)={:.6f} target 0.375 (tol {:g})",
                            worst_closed, kClosedFormTol, q_fixed_n, q_half, kLimitTol)};
}

struct OracleCase {
    std::size_t n, p;
    std::uint64_t data_seed, chain_seed;
};

Outcome exact_oracle() {
    const auto prior = ModelPrior::scott_berger();
    const auto mix = MixingDensity::hyper_g(3.0);
    bool ok = true;
    std::string detail;
    for (const OracleCase oc : {OracleCase{4, 6, 101, 1}, OracleCase{6, 10, 102, 2}}) {
        ExperimentSpec spec;
        spec.n = oc.n;
        spec.p = oc.p;
        spec.k0 = 1;
        spec.true_coefficients = {{0, 1.3}, {1, -1.2}};
        spec.seed = oc.data_seed;
        const RegressionProblem prob(simulate(spec));
        const auto ex = enumerate_exact(prob, mix, prior);
        const auto exact_summary = summarize_exact(ex, prior, oc.n, oc.p, 1);

        ChainConfig cfg;
        cfg.iterations = 55000;
        cfg.burnin = 5000;  // 50000 retained scans per chain
        cfg.seed = oc.chain_seed;
        const auto samples = gibbs_run(prob, mix, prior, cfg);
        const auto c = estimate_c(samples, prior, oc.n, oc.p, 1);
        const auto summary = summarize(samples, c, prior, oc.n, oc.p, 1);

        std::unordered_map<ModelIndicator, double, ModelIndicatorHash> freq;
        double total = 0.0;
        for (const auto& ch : samples)
            for (const auto& v : ch.visits) {
                freq[v.model] += 1.0;
                total += 1.0;
            }
        double tv = 0.0;
        for (std::size_t i = 0; i < ex.models.size(); ++i) {
            const auto it = freq.find(ex.models[i].model);
            tv += std::abs((it == freq.end() ? 0.0 : it->second / total) - ex.regular_posterior[i]);
        }
        tv *= 0.5;
        double q_gap = 0.0;
        for (std::size_t i = 0; i < oc.p; ++i)
            q_gap = std::max(q_gap, std::abs(summary.q_regular[i] - ex.q_regular[i]));
        const double c_rel = std::abs(c.c / std::exp(ex.log_c) - 1.0);
        const double ps_rel = std::abs(summary.p_singular / ex.p_singular - 1.0);
        const bool same_hpm = summary.hpm.model == exact_summary.hpm.model;
        const bool case_ok =
            tv < kOracleTv && q_gap < kOracleTv && c_rel < kOracleC && ps_rel < kOraclePs && same_hpm;
        ok = ok && case_ok;
        detail += fmt::format("[p={} n={}: TV={:.4f} max|dq|={:.4f} C rel={:.4f} P^S={:.6f} vs {:.6f} rel={:.2e} "
                              "HPM {}] ",
                              oc.p, oc.n, tv, q_gap, c_rel, summary.p_singular, ex.p_singular, ps_rel,
                              same_hpm ? "same" : "differs");
    }
    detail += fmt::format("tol TV {:g}, C {:g}, P^S {:g}", kOracleTv, kOracleC, kOraclePs);
    return {ok, detail};
}

Outcome simulated_p300_experiment() {
    const ExperimentSpec spec;  // p = 300, n = 41, k0 = 0, fixed seed
    const auto data = simulate(spec);
    AnalysisOptions opts;
    const auto full = analyze(data, opts);
    const auto& s = full.summary;
    const auto truth = spec.true_support();
    std::vector<std::size_t> strong;
    for (const auto& [j, beta] : spec.true_coefficients)
        if (std::abs(beta) >= 1.2) strong.push_back(j);
    double strong_min = 1.0;
    for (auto j : strong) strong_min = std::min(strong_min, s.q[j]);
    const auto spurious = spurious_stats(s.q, truth);
    const bool hpm_in_truth =
        !s.hpm.singular_block && s.hpm.model.is_subset_of(ModelIndicator::from_indices(spec.p, truth));
    const bool ok41 = s.p_singular < 0.05 && strong_min > 0.5 && spurious.max < 0.15 && hpm_in_truth;

    const auto small = head_rows(data, 10);
    const auto run10 = analyze(small, opts);
    const auto& s10 = run10.summary;
    double gap10 = 0.0;
    for (double q : s10.q) gap10 = std::max(gap10, std::abs(q - s10.q_singular_value));
    const bool ok10 = s10.p_singular > 0.9 && gap10 < 0.05;

    return {ok41 && ok10,
            fmt::format("n=41: P^S={:.3g} (<0.05) min strong q={:.3f} (>0.5) max spurious q={:.3f} (<0.15) "
                        "HPM={{{}}} within truth: {}; n=10: P^S={:.4f} (>0.9) q^S={:.4f} max|q-q^S|={:.4f} (<0.05)",
                        s.p_singular, strong_min, spurious.max, fmt::join(s.hpm.model.indices(), ","),
                        hpm_in_truth ? "yes" : "no", s10.p_singular, s10.q_singular_value, gap10)};
}

Outcome dual_path() {
    const ExperimentSpec spec;
    const RegressionProblem prob(simulate(spec));
    const std::size_t n = prob.n();
    std::mt19937_64 rng(77);
    double worst = 0.0;
    std::size_t models = 0;
    for (const char* mspec : {"hyper-g:3", "quadrature:zellner-siow"}) {
        const auto mix = parse_mixing(mspec, n);
        const auto star = rescale_mixing(mix, static_cast<double>(n));
        for (int rep = 0; rep < 50; ++rep) {
            const std::size_t k = 1 + rng() % (n - 2);
            std::vector<std::size_t> idx;
            std::vector<std::size_t> pool(prob.p());
            std::iota(pool.begin(), pool.end(), std::size_t{0});
            std::shuffle(pool.begin(), pool.end(), rng);
            idx.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k));
            const auto m = ModelIndicator::from_indices(prob.p(), idx);
            const auto s = prob.stats(m);
            const double a = bayes_factor(s, mix, n, prob.k0(), &m).log_value;
            const double b = bayes_factor_rescaled(s, star, n, prob.k0(), &m).log_value;
            worst = std::max(worst, std::abs(std::expm1(a - b)));
            ++models;
        }
    }
    return {worst <= kDualTol && models >= 100,
            fmt::format("models={} max relative difference={:.3g} tol={:g}", models, worst, kDualTol)};
}

Outcome prior_normalization() {
    double worst_sum = 0.0;
    for (const auto& prior : {ModelPrior::scott_berger(), ModelPrior::beta_binomial(1, 1),
                              ModelPrior::beta_binomial(0.5, 3)}) {
        for (std::size_t p = 1; p <= 12; ++p) {
            long double total = 0.0L;
            for (std::uint64_t bits = 0; bits < (1ull << p); ++bits)
                total += model_prior_prob(prior, ModelIndicator::from_bits(p, bits), p);
            worst_sum = std::max(worst_sum, std::abs(static_cast<double>(total) - 1.0));
        }
    }
    double worst_split = 0.0;
    for (const auto& prior : {ModelPrior::scott_berger(), ModelPrior::beta_binomial(1, 1),
                              ModelPrior::beta_binomial(0.5, 3)}) {
        const double split = prior_mass_singular(prior, 41, 8408, 0) + prior_mass_regular(prior, 41, 8408, 0);
        worst_split = std::max(worst_split, std::abs(split - 1.0));
    }
    return {worst_sum <= kPriorSumTol && worst_split <= kPriorSplitTol,
            fmt::format("max|sum-1| over p<=12: {:.3g} (tol {:g}); max|S+R-1| at p=8408,n=41: {:.3g} (tol {:g})",
                        worst_sum, kPriorSumTol, worst_split, kPriorSplitTol)};
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> criteria{
        {"unitary_bayes_factor", 10.0, unitary_bayes_factor},
        {"saturated_matching", 1.0, saturated_matching},
        {"generalized_inverse_invariance", 10.0, generalized_inverse_invariance},
        {"singular_inclusion_limits", 5.0, singular_inclusion_limits},
        {"exact_oracle", 120.0, exact_oracle},
        {"simulated_p300_experiment", 600.0, simulated_p300_experiment},
        {"dual_path", 5.0, dual_path},
        {"prior_normalization", 5.0, prior_normalization},
    };
    std::vector<std::string> wanted(argv + 1, argv + argc);
    int failures = 0, ran = 0;
    for (const auto& c : criteria) {
        if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), c.name) == wanted.end()) continue;
        ++ran;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = c.run();
        } catch (const std::exception& e) {
            out = {false, fmt::format("error: {}", e.what())};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_time = secs < c.budget_seconds;
        const bool passed = out.passed && in_time;
        failures += passed ? 0 : 1;
        std::printf("%s %s: %s; %.2fs (limit %gs)\n", passed ? "PASS" : "FAIL", c.name, out.detail.c_str(), secs,
                    c.budget_seconds);
        std::fflush(stdout);
    }
    if (ran == 0) {
        std::fprintf(stderr, "no criterion matched\n");
        return 2;
    }
    return failures == 0 ? 0 : 1;
}
