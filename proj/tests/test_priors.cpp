#include <doctest.h>

#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "bvs/bayes_factor.hpp"
#include "bvs/error.hpp"
#include "bvs/model_prior.hpp"
#include "support.hpp"

using namespace bvs;

namespace {

ModelStats regular_stats(std::size_t k, double q) {
    ModelStats s;
    s.k = k;
    s.q_ratio = q;
    s.rank_class = RankClass::Regular;
    return s;
}

// Brute-force q^S: average of k/p over the singular block's dimension masses.
long double q_singular_brute(std::size_t p, std::size_t n, int k0) {
    long double num = 0.0L, den = 0.0L;
    for (std::size_t k = n - static_cast<std::size_t>(k0); k <= p; ++k) {
        num += static_cast<long double>(k) / static_cast<long double>(p);
        den += 1.0L;
    }
    return num / den;
}

}  // namespace

TEST_CASE("point-mass Bayes factor closed form") {
    // (1+g)^{(n-k-k0)/2} (1+gQ)^{-(n-k0)/2} with g=9, n=10, k=2, Q=1/2.
    const auto bf = bayes_factor(regular_stats(2, 0.5), MixingDensity::point_mass(9.0), 10, 1);
    CHECK(bf.value == doctest::Approx(1.4735602485365582).epsilon(1e-13));
    CHECK(bf.log_value == doctest::Approx(std::log(1.4735602485365582)).epsilon(1e-13));
}

TEST_CASE("narrow quadrature density approaches the point mass") {
    const double g = 9.0, half = 1e-3;
    // Raised-cosine bump of half-width 1e-3 around g.
    const auto box = MixingDensity::quadrature(
        [=](double t) {
            const double x = (t - g) / half;
            return std::abs(x) <= 1.0 ? (1.0 + std::cos(std::numbers::pi * x)) / (2.0 * half) : 0.0;
        },
        g - half, g + half, "bump");
    const double closed = log_conventional_integral(0.5, 2, 10, 1, MixingDensity::point_mass(g));
    const double quad = log_conventional_integral(0.5, 2, 10, 1, box);
    CHECK(std::abs(quad - closed) < 1e-6);
}

TEST_CASE("hyper-g integrals against independent values") {
    // Q = 1 collapses the integrand to (a-2)/2 (1+t)^{-(k+a)/2}: B = (a-2)/(k+a-2).
    for (double a : {2.5, 3.0, 4.0}) {
        for (std::size_t k : {1u, 3u, 6u}) {
            const double b = std::exp(log_conventional_integral(1.0, k, 12, 1, MixingDensity::hyper_g(a)));
            CHECK(b == doctest::Approx((a - 2.0) / (k + a - 2.0)).epsilon(1e-10));
        }
    }
    // Frozen from arbitrary-precision quadrature: n=10, k0=1, k=2, Q=0.5, a=3.
    CHECK(bayes_factor(regular_stats(2, 0.5), MixingDensity::hyper_g(3.0), 10, 1).value ==
          doctest::Approx(142.0 / 105.0).epsilon(1e-10));
    const auto zs = parse_mixing("quadrature:zellner-siow", 20);
    CHECK(bayes_factor(regular_stats(3, 0.3), zs, 20, 1).value == doctest::Approx(189.33585010812109).epsilon(1e-9));
    // The same family through the quadrature route.
    const auto hg_quad = parse_mixing("quadrature:hyper-g:3", 10);
    CHECK(bayes_factor(regular_stats(2, 0.5), hg_quad, 10, 1).value == doctest::Approx(142.0 / 105.0).epsilon(1e-10));
}

TEST_CASE("nearly saturated models with a long plateau in the integrand") {
    // Frozen from arbitrary-precision evaluation of the Gauss hypergeometric form.
    const auto hg = MixingDensity::hyper_g(3.0);
    CHECK(bayes_factor(regular_stats(9, 5e-11), hg, 10, 0).value == doctest::Approx(10.817832391387993).epsilon(1e-10));
    CHECK(bayes_factor(regular_stats(9, 1e-3), hg, 10, 0).value == doctest::Approx(2.4263168186671315).epsilon(1e-10));
}

TEST_CASE("saturated integrand integrates to one") {
    for (const auto& mix : {MixingDensity::hyper_g(3.0), parse_mixing("quadrature:zellner-siow", 7),
                            parse_mixing("quadrature:inverse-gamma:2,3", 7)}) {
        CHECK(std::abs(log_conventional_integral(0.0, 6, 7, 1, mix)) < 1e-9);
        CHECK(std::abs(log_conventional_integral(0.0, 7, 7, 0, mix)) < 1e-9);
    }
    ModelStats sat;
    sat.k = 6;
    sat.rank_class = RankClass::Saturated;
    CHECK(bayes_factor(sat, MixingDensity::hyper_g(3.0), 7, 1).value == 1.0);
    ModelStats sing;
    sing.k = 9;
    sing.rank_class = RankClass::Singular;
    CHECK(bayes_factor(sing, MixingDensity::point_mass(7.0), 7, 1).log_value == 0.0);
}

TEST_CASE("classification mismatch is refused") {
    ModelStats s = regular_stats(6, 0.0);  // k + k0 = n but labelled regular
    CHECK_THROWS_AS(bayes_factor(s, MixingDensity::hyper_g(3.0), 7, 1), Error);
}

TEST_CASE("null model has Bayes factor one") {
    CHECK(bayes_factor(regular_stats(0, 1.0), MixingDensity::hyper_g(3.0), 9, 1).value == 1.0);
}

TEST_CASE("rescaled mixing is the same prior on t/n") {
    const auto mix = parse_mixing("quadrature:inverse-gamma:1.5,4", 11);
    const auto star = rescale_mixing(mix, 11.0);
    for (double t : {0.01, 0.3, 2.0, 50.0})
        CHECK(star.density(t) == doctest::Approx(11.0 * mix.density(11.0 * t)).epsilon(1e-13));
    const auto back = rescale_mixing(star, 1.0 / 11.0);
    for (double t : {0.05, 1.0, 30.0}) CHECK(back.density(t) == doctest::Approx(mix.density(t)).epsilon(1e-13));
    const auto pm = rescale_mixing(MixingDensity::point_mass(22.0), 11.0);
    CHECK(pm.atom() == doctest::Approx(2.0));
}

TEST_CASE("both Bayes factor routes agree") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> unif(0.01, 0.99);
    const std::size_t n = 25;
    for (const char* spec : {"hyper-g:3", "quadrature:zellner-siow", "g-prior:n", "quadrature:inverse-gamma:2,5"}) {
        const auto mix = parse_mixing(spec, n);
        const auto star = rescale_mixing(mix, static_cast<double>(n));
        for (int rep = 0; rep < 10; ++rep) {
            const auto s = regular_stats(1 + rng() % 20, unif(rng));
            const double a = bayes_factor(s, mix, n, 1).log_value;
            const double b = bayes_factor_rescaled(s, star, n, 1).log_value;
            CHECK(std::abs(std::expm1(a - b)) < 1e-8);
        }
    }
}

TEST_CASE("mixing density strings") {
    CHECK(parse_mixing("g-prior:n", 30).atom() == 30.0);
    CHECK(parse_mixing("g-prior:4.5", 30).atom() == 4.5);
    CHECK_THROWS_AS(parse_mixing("hyper-g:2", 10), Error);
    CHECK_THROWS_AS(parse_mixing("g-prior:-1", 10), Error);
    CHECK_THROWS_AS(parse_mixing("cauchy", 10), Error);
    CHECK_THROWS_AS(MixingDensity::quadrature([](double) { return 2.0; }, 0.0, 1.0, "bad"), Error);
}

TEST_CASE("model priors sum to one over all models") {
    for (const auto& prior : {ModelPrior::scott_berger(), ModelPrior::uniform(), ModelPrior::beta_binomial(1, 9),
                              ModelPrior::beta_binomial(2.5, 0.7)}) {
        for (std::size_t p : {1u, 5u, 12u}) {
            long double total = 0.0L;
            for (std::uint64_t bits = 0; bits < (1ull << p); ++bits)
                total += model_prior_prob(prior, ModelIndicator::from_bits(p, bits), p);
            CHECK(std::abs(static_cast<double>(total) - 1.0) < 1e-10);
        }
    }
}

TEST_CASE("Scott-Berger dimension masses are uniform") {
    for (std::size_t k : {0u, 3u, 40u})
        CHECK(log_dimension_mass(ModelPrior::scott_berger(), k, 40) == doctest::Approx(-std::log(41.0)).epsilon(1e-14));
    CHECK(model_prior_prob(ModelPrior::scott_berger(), ModelIndicator::from_indices(4, {1, 2}), 4) ==
          doctest::Approx(1.0 / 30.0).epsilon(1e-14));
}

TEST_CASE("singular block masses") {
    const auto sb = ModelPrior::scott_berger();
    CHECK(prior_mass_singular(sb, 41, 8408, 0) == doctest::Approx(8368.0 / 8409.0).epsilon(1e-14));
    CHECK(std::abs(prior_mass_singular(sb, 41, 8408, 0) + prior_mass_regular(sb, 41, 8408, 0) - 1.0) < 1e-12);
    const auto bb = ModelPrior::beta_binomial(1, 9);
    CHECK(prior_mass_singular(bb, 8, 20, 0) == doctest::Approx(0.029348961882695).epsilon(1e-12));
    CHECK(std::abs(prior_mass_singular(bb, 8, 20, 0) + prior_mass_regular(bb, 8, 20, 0) - 1.0) < 1e-12);
    CHECK(prior_mass_singular(sb, 10, 5, 1) == 0.0);
    CHECK(first_singular_dimension(10, 1) == 9);

    const auto cond = singular_dimension_conditional(bb, 8, 20, 0);
    CHECK(cond.size() == 13);
    CHECK(std::accumulate(cond.begin(), cond.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("q^S closed form against summation") {
    const auto sb = ModelPrior::scott_berger();
    CHECK(q_singular(sb, 7, 20, 1) == doctest::Approx(13.0 / 20.0).epsilon(1e-14));
    CHECK(q_singular(sb, 10, 50, 0) == doctest::Approx(3.0 / 5.0).epsilon(1e-14));
    CHECK(q_singular(sb, 41, 8408, 0) == doctest::Approx(8449.0 / 16816.0).epsilon(1e-14));
    for (auto [p, n, k0] : {std::tuple{20u, 7u, 1}, {50u, 10u, 0}, {8408u, 41u, 0}, {31u, 31u, 0}})
        CHECK(std::abs(q_singular(sb, n, p, k0) - static_cast<double>(q_singular_brute(p, n, k0))) < 1e-12);
    CHECK_THROWS_AS(q_singular(sb, 10, 5, 1), Error);
}

TEST_CASE("q^S limits") {
    const auto sb = ModelPrior::scott_berger();
    CHECK(std::abs(q_singular(sb, 41, 1000000, 0) - 0.5) < 1e-3);
    // n = f p with f = 1/2: q^S itself tends to (1+f)/2, while the joint
    // q^S Pr(M^S) tends to (1-f^2)/2.
    const double qs = q_singular(sb, 5000, 10000, 0);
    CHECK(std::abs(qs - 0.75) < 1e-3);
    CHECK(std::abs(qs * prior_mass_singular(sb, 5000, 10000, 0) - 0.375) < 1e-3);
}

TEST_CASE("q^S for a non-uniform dimension prior") {
    const auto bb = ModelPrior::beta_binomial(1, 9);
    const auto cond = singular_dimension_conditional(bb, 8, 20, 0);
    double expect = 0.0;
    for (std::size_t i = 0; i < cond.size(); ++i) expect += cond[i] * static_cast<double>(8 + i) / 20.0;
    CHECK(q_singular(bb, 8, 20, 0) == doctest::Approx(expect).epsilon(1e-13));
}

TEST_CASE("model prior strings") {
    CHECK(parse_prior("scott-berger").kind == ModelPrior::Kind::ScottBerger);
    CHECK(parse_prior("uniform").kind == ModelPrior::Kind::Uniform);
    const auto bb = parse_prior("beta-binomial:2,3");
    CHECK(bb.a == 2.0);
    CHECK(bb.b == 3.0);
    CHECK_THROWS_AS(parse_prior("beta-binomial:0,1"), Error);
    CHECK_THROWS_AS(parse_prior("laplace"), Error);
}
