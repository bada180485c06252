#include "bvs/bayes_factor.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/sinh_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "bvs/error.hpp"

namespace bvs {

namespace {

constexpr const char* kModule = "priors_bayes_factors";
constexpr double kInf = std::numeric_limits<double>::infinity();
// Target accuracy of the tanh-sinh rule and the error bound above which an
// integral is reported as non-converged.
constexpr double kQuadratureTolerance = 1e-12;
constexpr double kAcceptedRelativeError = 1e-8;
constexpr double kFastPathTolerance = 1e-10;

double parse_number(const std::string& token, std::size_t n, const std::string& spec) {
    if (token == "n") return static_cast<double>(n);
    try {
        std::size_t used = 0;
        const double v = std::stod(token, &used);
        if (used != token.size()) throw std::invalid_argument(token);
        return v;
    } catch (const std::exception&) {
        throw Error(ErrorKind::Parse, kModule, fmt::format("bad number '{}' in mixing spec '{}'", token, spec));
    }
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) out.push_back(item);
    return out;
}


}  // namespace

MixingDensity MixingDensity::point_mass(double g) {
    if (!(g > 0.0) || !std::isfinite(g)) throw Error(ErrorKind::Validation, kModule, "point mass requires g > 0");
    return MixingDensity(PointMass{g});
}

MixingDensity MixingDensity::hyper_g(double a) {
    if (!(a > 2.0) || !std::isfinite(a)) throw Error(ErrorKind::Validation, kModule, "hyper-g requires a > 2");
    return MixingDensity(HyperG{a});
}

MixingDensity MixingDensity::quadrature(std::function<double(double)> density, double lower, double upper,
                                        std::string label) {
    if (!(lower >= 0.0) || !(upper > lower))
        throw Error(ErrorKind::Validation, kModule, "quadrature density needs a support 0 <= lower < upper");
    MixingDensity mix(Quadrature{std::move(density), lower, upper, std::move(label)});
    double rel_err = 0.0;
    const double log_mass = log_integrate([&](double t) { return mix.log_density(t); }, lower, upper, &rel_err);
    const double mass = std::exp(log_mass);
    if (!(std::abs(mass - 1.0) <= 1e-6))
        throw Error(ErrorKind::Validation, kModule,
                    fmt::format("mixing density '{}' integrates to {:.10g}, not 1", mix.describe(), mass));
    return mix;
}

double MixingDensity::atom() const {
    if (const auto* pm = std::get_if<PointMass>(&base_)) return pm->g / scale_;
    throw Error(ErrorKind::Validation, kModule, "atom() requested on a continuous mixing density");
}

double MixingDensity::log_density(double t) const {
    const double s = scale_ * t;
    return std::visit(
        [&](const auto& b) -> double {
            using T = std::decay_t<decltype(b)>;
            if constexpr (std::is_same_v<T, PointMass>) {
                throw Error(ErrorKind::Validation, kModule, "point mass has no density");
            } else if constexpr (std::is_same_v<T, HyperG>) {
                if (!(s > 0.0)) return -kInf;
                return std::log(scale_) + std::log((b.a - 2.0) / 2.0) - 0.5 * b.a * std::log1p(s);
            } else {
                if (s < b.lower || s > b.upper) return -kInf;
                const double v = b.density(s);
                if (!(v > 0.0)) return -kInf;
                return std::log(scale_) + std::log(v);
            }
        },
        base_);
}

double MixingDensity::density(double t) const { return std::exp(log_density(t)); }

double MixingDensity::support_lower() const noexcept {
    if (const auto* q = std::get_if<Quadrature>(&base_)) return q->lower / scale_;
    return 0.0;
}

double MixingDensity::support_upper() const noexcept {
    if (const auto* q = std::get_if<Quadrature>(&base_)) return q->upper / scale_;
    return kInf;
}

std::string MixingDensity::describe() const {
    const std::string base = std::visit(
        [](const auto& b) -> std::string {
            using T = std::decay_t<decltype(b)>;
            if constexpr (std::is_same_v<T, PointMass>)
                return fmt::format("g-prior:{}", b.g);
            else if constexpr (std::is_same_v<T, HyperG>)
                return fmt::format("hyper-g:{}", b.a);
            else
                return fmt::format("quadrature:{}", b.label);
        },
        base_);
    if (scale_ == 1.0) return base;
    return fmt::format("{} (t scaled by {})", base, scale_);
}

MixingDensity rescale_mixing(const MixingDensity& mix, double n) {
    MixingDensity out = mix;
    out.scale_ = mix.scale_ * n;
    return out;
}

MixingDensity parse_mixing(const std::string& spec, std::size_t n) {
    const auto parts = split(spec, ':');
    if (parts.size() == 2 && parts[0] == "g-prior") return MixingDensity::point_mass(parse_number(parts[1], n, spec));
    if (parts.size() == 2 && parts[0] == "hyper-g") return MixingDensity::hyper_g(parse_number(parts[1], n, spec));
    if (parts.size() >= 2 && parts[0] == "quadrature") {
        const auto& family = parts[1];
        const auto params = parts.size() > 2 ? split(parts[2], ',') : std::vector<std::string>{};
        if (family == "hyper-g" && params.size() == 1) {
            const double a = parse_number(params[0], n, spec);
            if (!(a > 2.0)) throw Error(ErrorKind::Validation, kModule, "hyper-g requires a > 2");
            return MixingDensity::quadrature(
                [a](double t) { return 0.5 * (a - 2.0) * std::pow(1.0 + t, -0.5 * a); }, 0.0, kInf, spec);
        }
        if ((family == "inverse-gamma" && params.size() == 2) || (family == "zellner-siow" && params.empty())) {
            const double shape = family == "zellner-siow" ? 0.5 : parse_number(params[0], n, spec);
            const double rate = family == "zellner-siow" ? 0.5 * static_cast<double>(n) : parse_number(params[1], n, spec);
            if (!(shape > 0.0) || !(rate > 0.0))
                throw Error(ErrorKind::Validation, kModule, "inverse-gamma needs positive shape and rate");
            const double log_norm = shape * std::log(rate) - std::lgamma(shape);
            return MixingDensity::quadrature(
                [=](double t) {
                    if (!(t > 0.0)) return 0.0;
                    return std::exp(log_norm - (shape + 1.0) * std::log(t) - rate / t);
                },
                0.0, kInf, spec);
        }
    }
    throw Error(ErrorKind::Parse, kModule, fmt::format("unrecognised mixing density '{}'", spec));
}

double log_integrate(const std::function<double(double)>& log_f, double lower, double upper, double* relative_error) {
    // Integrand in s = log t; power-law tails in t become exponential tails in s.
    auto log_g = [&](double s) {
        const double t = std::exp(s);
        if (!(t > lower) || !(t < upper)) return -kInf;
        const double v = log_f(t);
        return std::isnan(v) ? -kInf : v + s;
    };
    const double s_lo = lower > 0.0 ? std::log(lower) : -kInf;
    const double s_hi = std::isinf(upper) ? kInf : std::log(upper);

    // Locate the mode on a grid in s, then refine by golden section.
    std::vector<double> grid;
    for (int e = -15; e <= 15; ++e) {
        const double s = std::numbers::ln10 * e;
        if (s > s_lo && s < s_hi) grid.push_back(s);
    }
    if (grid.empty()) grid.push_back(std::isinf(s_hi) ? s_lo + 1.0 : (std::isinf(s_lo) ? s_hi - 1.0 : 0.5 * (s_lo + s_hi)));
    // Supports narrower than the grid spacing.
    if (std::isfinite(s_lo) && std::isfinite(s_hi))
        for (int i = 1; i < 16; ++i) grid.push_back(s_lo + (s_hi - s_lo) * i / 16.0);
    std::sort(grid.begin(), grid.end());
    std::size_t best = 0;
    double best_val = -kInf;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double v = log_g(grid[i]);
        if (v > best_val) {
            best_val = v;
            best = i;
        }
    }
    if (!std::isfinite(best_val)) {
        if (relative_error) *relative_error = 0.0;
        return -kInf;
    }
    double a = best > 0 ? grid[best - 1] : std::max(grid[best] - 1.0, s_lo);
    double b = best + 1 < grid.size() ? grid[best + 1] : std::min(grid[best] + 1.0, s_hi);
    constexpr double kGolden = 0.6180339887498949;
    double c = b - kGolden * (b - a), d = a + kGolden * (b - a);
    double fc = log_g(c), fd = log_g(d);
    for (int it = 0; it < 100 && (b - a) > 1e-6; ++it) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - kGolden * (b - a);
            fc = log_g(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + kGolden * (b - a);
            fd = log_g(d);
        }
    }
    double s_mode = grid[best];
    double log_max = best_val;
    if (const double v = log_g(0.5 * (a + b)); v > log_max) {
        log_max = v;
        s_mode = 0.5 * (a + b);
    }

    auto scaled = [&](double s) {
        const double v = log_g(s) - log_max;
        return (std::isnan(v) || v < -745.0) ? 0.0 : std::exp(v);
    };

    // Whole real line in s: center on the mode, scale by the width of the
    // peak and let sinh-sinh compress both tails.
    thread_local boost::math::quadrature::sinh_sinh<double> line;
    if (std::isinf(s_lo) && std::isinf(s_hi)) {
        constexpr double kDelta = 0.05;
        const double curv = (log_g(s_mode + kDelta) - 2.0 * log_max + log_g(s_mode - kDelta)) / (kDelta * kDelta);
        const double width = curv < 0.0 && std::isfinite(curv) ? 1.0 / std::sqrt(-curv) : 1.0;
        double err = 0.0, l1 = 0.0;
        std::size_t levels = 0;
        const double v = line.integrate([&](double x) { return scaled(s_mode + width * x); }, kQuadratureTolerance,
                                        &err, &l1, &levels);
        if (v > 0.0 && err <= kFastPathTolerance * v) {
            if (relative_error) *relative_error = err / v;
            return log_max + std::log(width * v);
        }
        // Plateaus (Q near zero) defeat the single scale; split at the mode instead.
    }
    double total = 0.0;
    double total_err = 0.0;
    auto add = [&](double value, double err) {
        total += value;
        total_err += err;
    };
    double err = 0.0, l1 = 0.0;
    std::size_t levels = 0;
    // Abscissae are computed once per thread.
    thread_local boost::math::quadrature::exp_sinh<double> tail;
    thread_local boost::math::quadrature::tanh_sinh<double> body;
    if (std::isinf(s_lo)) {
        const double v = tail.integrate([&](double x) { return scaled(s_mode - x); }, 0.0, kInf,
                                        kQuadratureTolerance, &err, &l1, &levels);
        add(v, err);
    } else if (s_mode > s_lo) {
        add(body.integrate([&](double x) { return scaled(x); }, s_lo, s_mode, kQuadratureTolerance, &err, &l1, &levels),
            err);
    }
    if (std::isinf(s_hi)) {
        const double v = tail.integrate([&](double x) { return scaled(s_mode + x); }, 0.0, kInf,
                                        kQuadratureTolerance, &err, &l1, &levels);
        add(v, err);
    } else if (s_hi > s_mode) {
        add(body.integrate([&](double x) { return scaled(x); }, s_mode, s_hi, kQuadratureTolerance, &err, &l1, &levels),
            err);
    }
    if (relative_error) *relative_error = total > 0.0 ? total_err / total : kInf;
    if (!(total > 0.0)) return -kInf;
    return log_max + std::log(total);
}

double log_conventional_integral(double q_ratio, std::size_t k, std::size_t n, int k0, const MixingDensity& mix,
                                 double t_multiplier, const ModelIndicator* model) {
    const double a = 0.5 * static_cast<double>(n - static_cast<std::size_t>(k0));
    const double b = 0.5 * (static_cast<double>(n) - static_cast<double>(k) - static_cast<double>(k0));
    if (mix.is_point_mass()) {
        const double g = t_multiplier * mix.atom();
        return b * std::log1p(g) - a * std::log1p(g * q_ratio);
    }
    auto log_f = [&](double t) {
        const double ct = t_multiplier * t;
        return -a * std::log1p(ct * q_ratio) + b * std::log1p(ct) + mix.log_density(t);
    };
    double rel_err = 0.0;
    const double value = log_integrate(log_f, mix.support_lower(), mix.support_upper(), &rel_err);
    if (!std::isfinite(value) || !(rel_err <= kAcceptedRelativeError))
        throw Error(ErrorKind::Integration, kModule,
                    fmt::format("Bayes factor quadrature did not converge for {} (k={}, Q={:.6g}): relative error "
                                "estimate {:.3g}",
                                model ? "0x" + model->to_hex() : std::string("model"), k, q_ratio, rel_err));
    return value;
}

namespace {

BayesFactor bayes_factor_impl(const ModelStats& stats, const MixingDensity& mix, std::size_t n, int k0,
                              double t_multiplier, const ModelIndicator* model) {
    BayesFactor bf;
    if (model) bf.model = *model;
    const RankClass implied = classify(stats.k, n, k0);
    if (implied != stats.rank_class)
        throw Error(ErrorKind::Classification, kModule,
                    fmt::format("model with k={} labelled {} but k + k0 vs n = {} implies {}", stats.k,
                                to_string(stats.rank_class), n, to_string(implied)));
    if (stats.rank_class != RankClass::Regular || stats.k == 0) return bf;
    bf.log_value = log_conventional_integral(stats.q_ratio, stats.k, n, k0, mix, t_multiplier, model);
    bf.value = std::exp(bf.log_value);
    return bf;
}

}  // namespace

BayesFactor bayes_factor(const ModelStats& stats, const MixingDensity& mix, std::size_t n, int k0,
                         const ModelIndicator* model) {
    return bayes_factor_impl(stats, mix, n, k0, 1.0, model);
}

BayesFactor bayes_factor_rescaled(const ModelStats& stats, const MixingDensity& mix_star, std::size_t n, int k0,
                                  const ModelIndicator* model) {
    return bayes_factor_impl(stats, mix_star, n, k0, static_cast<double>(n), model);
}

}  // namespace bvs
