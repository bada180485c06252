// Command-line front end: analyze, simulate, verify, enumerate.

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include <cstdlib>
#include <iostream>
#include <string>

#include "bvs/error.hpp"
#include "bvs/harness.hpp"
#include "bvs/report.hpp"

namespace {

enum ExitCode : int {
    kOk = 0,
    kFailure = 1,
    kUsage = 2,
    kIoError = 3,
    kInputError = 4,
    kRefused = 5,
    kNumericalError = 6,
    kVerificationFailed = 7,
};

int exit_code_for(bvs::ErrorKind kind) {
    using bvs::ErrorKind;
    switch (kind) {
        case ErrorKind::Io: return kIoError;
        case ErrorKind::Parse:
        case ErrorKind::Validation: return kInputError;
        case ErrorKind::Refusal: return kRefused;
        default: return kNumericalError;
    }
}

void report_error(const std::string& kind, const std::string& module, const std::string& message,
                  const std::filesystem::path* out_dir) {
    nlohmann::json body;
    body["error"] = {{"kind", kind}, {"module", module}, {"message", message}};
    const std::string text = bvs::dump_json(body);
    std::cerr << text;
    if (out_dir) {
        std::error_code ec;
        std::filesystem::create_directories(*out_dir, ec);
        if (!ec) {
            try {
                bvs::write_text(*out_dir / "error.json", text);
            } catch (const bvs::Error&) {
            }
        }
    }
}

std::vector<std::string> hpm_names(const bvs::AnalysisResult& result, const bvs::Dataset& data) {
    std::vector<std::string> names;
    for (auto j : result.summary.hpm.model.indices()) names.push_back(data.covariate_names.at(j));
    return names;
}

bvs::ResponseColumn parse_response(const std::string& text) {
    if (!text.empty() && text.find_first_not_of("0123456789") == std::string::npos)
        return static_cast<std::size_t>(std::stoull(text));
    return text;
}

std::vector<std::size_t> parse_index_list(const std::string& text) {
    // 1-based covariate numbers, comma separated.
    std::vector<std::size_t> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        const auto v = std::stoull(item);
        if (v == 0) throw bvs::Error(bvs::ErrorKind::Parse, "cli_harness", "covariate numbers are 1-based");
        out.push_back(static_cast<std::size_t>(v - 1));
    }
    return out;
}

std::vector<std::pair<std::size_t, double>> parse_coefficients(const std::string& text) {
    // "1:1.3,2:0.3" with 1-based covariate numbers.
    std::vector<std::pair<std::size_t, double>> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto colon = item.find(':');
        if (colon == std::string::npos)
            throw bvs::Error(bvs::ErrorKind::Parse, "cli_harness", fmt::format("bad coefficient '{}'", item));
        const auto idx = std::stoull(item.substr(0, colon));
        if (idx == 0) throw bvs::Error(bvs::ErrorKind::Parse, "cli_harness", "covariate numbers are 1-based");
        out.emplace_back(static_cast<std::size_t>(idx - 1), std::stod(item.substr(colon + 1)));
    }
    return out;
}

std::uint64_t default_seed(std::uint64_t fallback) {
    if (const char* env = std::getenv("BVS_SEED")) {
        try {
            return std::stoull(env);
        } catch (const std::exception&) {
            throw bvs::Error(bvs::ErrorKind::Parse, "cli_harness", fmt::format("BVS_SEED='{}' is not an integer", env));
        }
    }
    return fallback;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bayesian variable selection with unitary Bayes factors for p > n linear models"};
    app.require_subcommand(1);

    // analyze / enumerate share their options.
    std::string data_path;
    std::string response = "0";
    bool no_intercept = false;
    std::string prior_spec = "scott-berger";
    std::string mixing_spec = "hyper-g:3";
    std::size_t iterations = 11000;
    std::optional<std::size_t> burnin;
    std::size_t chains = 2;
    std::optional<std::uint64_t> seed;
    bool exact = false;
    std::string out_dir = "bvs-out";
    bool trace = false;
    std::size_t dim_plot_max = 60;
    std::string true_set;
    std::size_t p_max = 20;

    auto add_analysis_options = [&](CLI::App* sub) {
        sub->add_option("data", data_path, "CSV file with a header row")->required();
        sub->add_option("--response", response, "response column: header name or zero-based index");
        sub->add_flag("--no-intercept", no_intercept, "null model without intercept (k0 = 0)");
        sub->add_option("--prior", prior_spec, "scott-berger | uniform | beta-binomial:a,b");
        sub->add_option("--mixing", mixing_spec, "g-prior:g | hyper-g:a | quadrature:<family>:<params>");
        sub->add_option("--out-dir", out_dir, "output directory");
        sub->add_option("--dim-plot-max", dim_plot_max, "largest dimension written to dimension.csv");
        sub->add_option("--true-set", true_set, "1-based true covariates, enables spurious-variable statistics");
    };

    auto* analyze_cmd = app.add_subcommand("analyze", "posterior summaries by Gibbs sampling over regular models");
    add_analysis_options(analyze_cmd);
    analyze_cmd->add_option("--iterations", iterations, "iterations per chain (full scans)");
    analyze_cmd->add_option("--burnin", burnin, "discarded iterations (default 10%)");
    analyze_cmd->add_option("--chains", chains, "number of chains (>= 2)");
    analyze_cmd->add_option("--seed", seed, "random seed (BVS_SEED overrides the default)");
    analyze_cmd->add_flag("--exact", exact, "enumerate all 2^p models instead of sampling");
    analyze_cmd->add_flag("--trace", trace, "write trace-<chain>.csv");
    analyze_cmd->add_option("--p-max", p_max, "largest p accepted by --exact");

    auto* enumerate_cmd = app.add_subcommand("enumerate", "exact posterior by enumerating all 2^p models");
    add_analysis_options(enumerate_cmd);
    enumerate_cmd->add_option("--p-max", p_max, "largest p accepted");

    bvs::ExperimentSpec sim;
    std::string coefficients;
    std::string sim_out = "simulated.csv";
    bool noise_as_sd = false;
    bool sim_intercept = false;
    std::optional<std::uint64_t> sim_seed;
    auto* simulate_cmd = app.add_subcommand("simulate", "synthetic dataset with a sparse true model");
    simulate_cmd->add_option("--n", sim.n, "observations");
    simulate_cmd->add_option("--p", sim.p, "candidate covariates");
    simulate_cmd->add_option("--coefficients", coefficients, "true coefficients as i:beta pairs, 1-based");
    simulate_cmd->add_option("--noise", sim.noise_scale, "noise variance (standard deviation with --noise-as-sd)");
    simulate_cmd->add_flag("--noise-as-sd", noise_as_sd, "interpret --noise as a standard deviation");
    simulate_cmd->add_option("--correlation", sim.design_correlation, "pairwise design correlation");
    simulate_cmd->add_option("--seed", sim_seed, "random seed");
    simulate_cmd->add_flag("--intercept", sim_intercept, "validate the dataset for an intercept null model");
    simulate_cmd->add_option("--out", sim_out, "output CSV");

    bvs::VerifyOptions verify_opts;
    std::optional<std::uint64_t> verify_seed;
    std::string verify_out;
    auto* verify_cmd = app.add_subcommand("verify", "randomized checks of the regularized prior identities");
    verify_cmd->add_option("--seed", verify_seed, "random seed");
    verify_cmd->add_option("--cases", verify_opts.cases, "number of random cases");
    verify_cmd->add_option("--min-n", verify_opts.min_n, "smallest sample size");
    verify_cmd->add_option("--max-n", verify_opts.max_n, "largest sample size");
    verify_cmd->add_flag("--sabotage", verify_opts.sabotage, "use a ridge term as second regularizer (must fail)");
    verify_cmd->add_option("--out", verify_out, "also write the report to this file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kOk : kUsage;
    }

    const std::filesystem::path out_path(out_dir);
    const bool writes_out_dir = analyze_cmd->parsed() || enumerate_cmd->parsed();
    try {
        if (analyze_cmd->parsed() || enumerate_cmd->parsed()) {
            const auto data = bvs::load_dataset(data_path, parse_response(response), !no_intercept);
            bvs::AnalysisOptions opts;
            opts.prior = bvs::parse_prior(prior_spec);
            opts.mixing = mixing_spec;
            opts.exact = exact || enumerate_cmd->parsed();
            opts.exact_p_max = p_max;
            opts.chains.iterations = iterations;
            opts.chains.burnin = burnin.value_or(iterations / 10);
            opts.chains.chains = chains;
            opts.chains.seed = seed.value_or(default_seed(1));
            bvs::OutputOptions out;
            out.out_dir = out_path;
            out.trace = trace;
            out.dim_plot_max = dim_plot_max;
            out.true_set = parse_index_list(true_set);
            const auto result = bvs::analyze(data, opts);
            bvs::write_analysis(result, data, opts, out);
            std::cout << fmt::format("P^S = {:.6g}, C = {:.6g}, HPM = {}\n", result.summary.p_singular,
                                     result.summary.c_estimate,
                                     result.summary.hpm.singular_block
                                         ? std::string("singular block")
                                         : fmt::format("{{{}}}", fmt::join(hpm_names(result, data), ",")));
            return kOk;
        }
        if (simulate_cmd->parsed()) {
            if (!coefficients.empty()) sim.true_coefficients = parse_coefficients(coefficients);
            sim.noise_as_sd = noise_as_sd;
            sim.k0 = sim_intercept ? 1 : 0;
            sim.seed = sim_seed.value_or(default_seed(sim.seed));
            bvs::write_dataset_csv(sim_out, bvs::simulate(sim));
            return kOk;
        }
        if (verify_cmd->parsed()) {
            verify_opts.seed = verify_seed.value_or(default_seed(verify_opts.seed));
            const auto report = bvs::verify_battery(verify_opts);
            const auto text = bvs::dump_json(report);
            std::cout << text;
            if (!verify_out.empty()) bvs::write_text(verify_out, text);
            return report.at("passed").get<bool>() ? kOk : kVerificationFailed;
        }
    } catch (const bvs::Error& e) {
        report_error(std::string(bvs::to_string(e.kind())), e.module(), e.what(), writes_out_dir ? &out_path : nullptr);
        return exit_code_for(e.kind());
    } catch (const std::exception& e) {
        report_error("internal", "cli_harness", e.what(), writes_out_dir ? &out_path : nullptr);
        return kFailure;
    }
    return kFailure;
}
