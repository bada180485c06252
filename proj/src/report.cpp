#include "bvs/report.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "bvs/error.hpp"

namespace bvs {

namespace {

constexpr const char* kModule = "cli_harness";

void dump(const nlohmann::json& j, int indent, int depth, std::string& out) {
    const std::string pad = indent > 0 ? std::string(static_cast<std::size_t>(indent * (depth + 1)), ' ') : "";
    const std::string pad_close = indent > 0 ? std::string(static_cast<std::size_t>(indent * depth), ' ') : "";
    const char* nl = indent > 0 ? "\n" : "";
    switch (j.type()) {
        case nlohmann::json::value_t::number_float: {
            const double v = j.get<double>();
            out += std::isfinite(v) ? format_double(v) : "null";
            return;
        }
        case nlohmann::json::value_t::array: {
            if (j.empty()) {
                out += "[]";
                return;
            }
            out += "[";
            out += nl;
            bool first = true;
            for (const auto& item : j) {
                if (!first) out += std::string(",") + nl;
                first = false;
                out += pad;
                dump(item, indent, depth + 1, out);
            }
            out += nl + pad_close + "]";
            return;
        }
        case nlohmann::json::value_t::object: {
            if (j.empty()) {
                out += "{}";
                return;
            }
            out += "{";
            out += nl;
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!first) out += std::string(",") + nl;
                first = false;
                out += pad + nlohmann::json(it.key()).dump() + (indent > 0 ? ": " : ":");
                dump(it.value(), indent, depth + 1, out);
            }
            out += nl + pad_close + "}";
            return;
        }
        default: out += j.dump(); return;
    }
}

std::ofstream open_for_write(const std::filesystem::path& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorKind::Io, kModule, fmt::format("cannot write '{}'", path.string()));
    return f;
}

}  // namespace

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return fmt::format("{:.17g}", v);
}

std::string dump_json(const nlohmann::json& j, int indent) {
    std::string out;
    dump(j, indent, 0, out);
    out += "\n";
    return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    auto f = open_for_write(path);
    f << text;
    if (!f) throw Error(ErrorKind::Io, kModule, fmt::format("failed writing '{}'", path.string()));
}

nlohmann::json summary_to_json(const PosteriorSummary& s, const std::vector<std::string>& names) {
    nlohmann::json j;
    j["p_singular"] = s.p_singular;
    j["c_estimate"] = s.c_estimate;
    j["log_c_estimate"] = s.log_c_estimate;
    j["q"] = s.q;
    j["q_regular"] = s.q_regular;
    j["q_singular"] = s.q_singular_value;
    j["dim_posterior"] = s.dim_posterior;
    j["hpm_block"] = s.hpm.singular_block ? "singular" : "regular";
    j["hpm_log_posterior"] = s.hpm.log_posterior;
    if (s.hpm.singular_block) {
        j["hpm"] = nullptr;
        j["hpm_names"] = nullptr;
    } else {
        const auto idx = s.hpm.model.indices();
        j["hpm"] = idx;
        nlohmann::json hpm_names = nlohmann::json::array();
        for (auto i : idx) hpm_names.push_back(i < names.size() ? names[i] : fmt::format("x{}", i + 1));
        j["hpm_names"] = hpm_names;
    }
    return j;
}

nlohmann::json convergence_to_json(const ConvergenceReport& r) {
    nlohmann::json j;
    j["converged"] = r.converged;
    j["threshold"] = r.threshold;
    j["max_discrepancy"] = r.max_discrepancy;
    j["worst_covariate"] = r.worst_covariate;
    j["inclusion_by_chain"] = r.inclusion_by_chain;
    return j;
}

void write_inclusion_csv(const std::filesystem::path& path, const PosteriorSummary& s,
                         const std::vector<std::string>& names) {
    std::vector<std::size_t> order(s.q.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return s.q[a] > s.q[b]; });
    auto f = open_for_write(path);
    f << "covariate,index,q,q_regular\n";
    for (auto i : order)
        f << (i < names.size() ? names[i] : fmt::format("x{}", i + 1)) << ',' << i << ',' << format_double(s.q[i])
          << ',' << format_double(s.q_regular[i]) << '\n';
}

void write_dimension_csv(const std::filesystem::path& path, const std::vector<double>& dim_posterior,
                         std::size_t max_k) {
    auto f = open_for_write(path);
    f << "k,probability\n";
    for (std::size_t k = 0; k < dim_posterior.size() && k <= max_k; ++k)
        f << k << ',' << format_double(dim_posterior[k]) << '\n';
}

void write_trace_csv(const std::filesystem::path& path, const ChainSample& chain) {
    auto f = open_for_write(path);
    f << "iteration,k,log_posterior,gamma\n";
    std::size_t it = chain.first_iteration;
    for (const auto& v : chain.visits)
        f << it++ << ',' << v.model.k() << ',' << format_double(v.log_posterior) << ",0x" << v.model.to_hex() << '\n';
}

void write_dataset_csv(const std::filesystem::path& path, const Dataset& d) {
    auto f = open_for_write(path);
    f << d.response_name;
    for (const auto& name : d.covariate_names) f << ',' << name;
    f << '\n';
    for (Eigen::Index i = 0; i < d.y.size(); ++i) {
        f << format_double(d.y(i));
        for (Eigen::Index j = 0; j < d.X.cols(); ++j) f << ',' << format_double(d.X(i, j));
        f << '\n';
    }
}

}  // namespace bvs
