#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mixls/mixture.hpp"
#include "mixls/random.hpp"
#include "oracles.hpp"

using namespace mixls;

namespace {

MixtureModel two_normals() {
    return MixtureModel(FamilyKind::normal(), MixingDistribution({-2.0, 2.0}, {0.5, 0.5}), 1.0);
}

MixtureModel random_model(std::mt19937_64& rng, int max_atoms = 4) {
    return MixtureModel(oracle::random_family(rng), oracle::random_mixing(rng, max_atoms, 5.0),
                        0.2 + 3.0 * uniform01(rng));
}

}  // namespace

TEST_CASE("mixture density basics") {
    const MixtureModel single(FamilyKind::logistic(), MixingDistribution::point_mass(0.7), 1.4);
    for (double x : {-3.0, 0.0, 2.5})
        CHECK(mixture_density(single, x) ==
              doctest::Approx(density(FamilyKind::logistic(), x, 0.7, 1.4)).epsilon(1e-14));

    const double phi2 = std::exp(-2.0) / std::sqrt(2.0 * M_PI);
    CHECK(mixture_density(two_normals(), 0.0) == doctest::Approx(phi2).epsilon(1e-13));

    const double mass = oracle::integrate([&](double x) { return mixture_density(two_normals(), x); },
                                          -60.0, 60.0, 1e-11);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("log likelihood") {
    const MixtureModel m(FamilyKind::normal(), MixingDistribution::point_mass(1.0), 1.0);
    Dataset one;
    one.observations = {1.0};
    CHECK(log_likelihood(m, one).value ==
          doctest::Approx(-0.5 * std::log(2.0 * M_PI)).epsilon(1e-14));

    // Additivity over concatenation.
    std::mt19937_64 rng(5);
    const MixtureModel model = two_normals();
    Dataset a = sample_mixture(model, 40, std::uint64_t{100});
    Dataset b = sample_mixture(model, 25, std::uint64_t{200});
    Dataset both = a;
    both.observations.insert(both.observations.end(), b.observations.begin(),
                             b.observations.end());
    CHECK(log_likelihood(model, both).value ==
          doctest::Approx(log_likelihood(model, a).value + log_likelihood(model, b).value)
              .epsilon(1e-12));

    CHECK_THROWS_AS(log_likelihood(model, Dataset{}), std::invalid_argument);
}

TEST_CASE("stable evaluation matches the naive sum when it does not underflow") {
    std::mt19937_64 rng(17);
    for (int k = 0; k < 200; ++k) {
        const MixtureModel m = random_model(rng);
        const double x = 12.0 * (uniform01(rng) - 0.5);
        const double naive = mixture_density(m, x);
        if (naive > 1e-290) {
            CHECK(mixture_log_density(m, x) == doctest::Approx(std::log(naive)).epsilon(1e-12));
        }
    }
}

TEST_CASE("underflow is flagged, not silent") {
    // A Gumbel component sees a far-left outlier: density is a true zero.
    const MixtureModel m(FamilyKind::gumbel(), MixingDistribution::point_mass(0.0), 0.01);
    Dataset d;
    d.observations = {0.0, -50.0};
    const LogLik ll = log_likelihood(m, d);
    CHECK(ll.underflow_count == 1);
    CHECK(std::isinf(ll.value));
}

TEST_CASE("likelihood upper bound") {
    std::mt19937_64 rng(23);
    for (int k = 0; k < 1000; ++k) {
        const MixtureModel m = random_model(rng);
        const auto n = static_cast<std::int64_t>(5 + rng() % 40);
        const Dataset d = sample_mixture(m, n, rng);
        const LogLik ll = log_likelihood(m, d);
        if (ll.underflowed()) continue;
        const double bound =
            static_cast<double>(n) * (std::log(constants(m.family).v0) - std::log(m.sigma));
        CHECK(ll.value <= bound + 1e-10);
    }
}

TEST_CASE("sampling") {
    // All mass on one component.
    const MixtureModel lone(FamilyKind::normal(), MixingDistribution({-5.0, 5.0}, {1.0, 0.0}),
                            0.1);
    const Dataset d = sample_mixture(lone, 500, std::uint64_t{42});
    for (double x : d.observations) CHECK(x < 0.0);

    // Fixed seed reproduces the dataset exactly.
    const MixtureModel model = two_normals();
    const Dataset d1 = sample_mixture(model, 1000, std::uint64_t{9001});
    const Dataset d2 = sample_mixture(model, 1000, std::uint64_t{9001});
    CHECK(d1.observations == d2.observations);
    CHECK(d1.seed == std::uint64_t{9001});

    // Moments: mean 0, variance sigma^2 + sum alpha mu^2 = 5.
    const Dataset big = sample_mixture(model, 1000000, std::uint64_t{20260809});
    double s1 = 0.0, s2 = 0.0;
    for (double x : big.observations) {
        s1 += x;
        s2 += x * x;
    }
    const double mean = s1 / 1e6;
    const double var = s2 / 1e6 - mean * mean;
    CHECK(std::abs(mean) < 0.01);
    CHECK(std::abs(var - 5.0) < 0.05);
}

TEST_CASE("affine transform identity") {
    std::mt19937_64 rng(31);
    {
        const MixtureModel m = two_normals();
        const Dataset d = sample_mixture(m, 100, std::uint64_t{7});
        const auto [lhs, rhs] = affine_transform_loglik_identity(m, d, 1.0, 0.0);
        CHECK(lhs == rhs);
        const auto [l2, r2] = affine_transform_loglik_identity(m, d, 2.0, 3.0);
        CHECK(l2 == doctest::Approx(r2).epsilon(1e-12));
        CHECK(std::abs(l2 - r2) < 1e-10);
    }
    {
        const MixtureModel g(FamilyKind::gumbel(), MixingDistribution({0.0, 1.5}, {0.4, 0.6}),
                             0.7);
        const Dataset d = sample_mixture(g, 80, std::uint64_t{8});
        const auto [lhs, rhs] = affine_transform_loglik_identity(g, d, 0.5, -1.0);
        CHECK(std::abs(lhs - rhs) < 1e-10);
        CHECK_THROWS_AS(affine_transform_loglik_identity(g, d, 0.0, 0.0), std::invalid_argument);
    }
    for (int k = 0; k < 50; ++k) {
        const MixtureModel m = random_model(rng, 3);
        const Dataset d = sample_mixture(m, 60, rng);
        const double a = 0.25 + 3.0 * uniform01(rng);
        const double c = 8.0 * (uniform01(rng) - 0.5);
        const auto [lhs, rhs] = affine_transform_loglik_identity(m, d, a, c);
        CHECK(std::abs(lhs - rhs) < 1e-10);
    }
}

TEST_CASE("log likelihood invariant under atom permutation") {
    const MixingDistribution p1({-1.0, 0.5, 2.0}, {0.2, 0.3, 0.5});
    const MixingDistribution p2({2.0, -1.0, 0.5}, {0.5, 0.2, 0.3});
    const MixtureModel m1(FamilyKind::student_t(3), p1, 0.9);
    const MixtureModel m2(FamilyKind::student_t(3), p2, 0.9);
    const Dataset d = sample_mixture(m1, 50, std::uint64_t{3});
    CHECK(log_likelihood(m1, d).value == log_likelihood(m2, d).value);
}

TEST_CASE("multivariate density and likelihood") {
    const DensityGenerator gen{GeneratorKind::MultivariateNormal, 2};
    Eigen::MatrixXd I2 = Eigen::MatrixXd::Identity(2, 2);
    const MultivariateMixtureModel m(gen, MultivariateMixing({{1.0, -1.0}}, {1.0}), I2);
    Eigen::VectorXd at(2);
    at << 1.0, -1.0;
    CHECK(mv_density(m, at) == doctest::Approx(1.0 / (2.0 * M_PI)).epsilon(1e-13));

    // General SPD covariance at the center: (2 pi)^-1 |Sigma|^-1/2.
    Eigen::MatrixXd S(2, 2);
    S << 2.0, 0.6, 0.6, 1.0;
    const MultivariateMixtureModel ms(gen, MultivariateMixing({{0.0, 0.0}}, {1.0}), S);
    Eigen::VectorXd zero = Eigen::VectorXd::Zero(2);
    CHECK(mv_density(ms, zero) ==
          doctest::Approx(1.0 / (2.0 * M_PI * std::sqrt(S.determinant()))).epsilon(1e-12));

    Eigen::MatrixXd bad(2, 2);
    bad << 1.0, 2.0, 2.0, 1.0;  // symmetric but indefinite
    CHECK_THROWS_AS(MultivariateMixtureModel(gen, MultivariateMixing({{0.0, 0.0}}, {1.0}), bad),
                    std::domain_error);
    Eigen::MatrixXd asym(2, 2);
    asym << 1.0, 0.5, -0.5, 1.0;
    CHECK_THROWS_AS(spd_factor(asym), std::domain_error);
}

TEST_CASE("multivariate likelihood upper bound and sampling moments") {
    const DensityGenerator gen{GeneratorKind::MultivariateNormal, 2};
    const double v0 = generator_constants(gen).v0;
    std::mt19937_64 rng(12);
    for (int k = 0; k < 50; ++k) {
        Eigen::MatrixXd A(2, 2);
        A << 1.0 + uniform01(rng), uniform01(rng) - 0.5, uniform01(rng) - 0.5,
            1.0 + uniform01(rng);
        Eigen::MatrixXd S = A * A.transpose();
        const MultivariateMixtureModel m(
            gen, MultivariateMixing({{0.0, 0.0}, {2.0, 1.0}}, {0.5, 0.5}), S);
        const MvDataset d = mv_sample(m, 30, rng());
        const double bound = 30.0 * (std::log(v0) - 0.5 * std::log(S.determinant()));
        CHECK(mv_log_likelihood(m, d).value <= bound + 1e-10);
    }

    Eigen::MatrixXd S(2, 2);
    S << 1.5, -0.4, -0.4, 0.8;
    const MultivariateMixtureModel one(gen, MultivariateMixing({{3.0, -2.0}}, {1.0}), S);
    const MvDataset big = mv_sample(one, 1000000, std::uint64_t{31415});
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(2);
    for (const auto& x : big.observations) mean += x;
    mean /= 1e6;
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(2, 2);
    for (const auto& x : big.observations) cov += (x - mean) * (x - mean).transpose();
    cov /= 1e6;
    CHECK((cov - S).norm() < 0.01 * S.norm());
    CHECK(std::abs(mean[0] - 3.0) < 0.01);
    CHECK(std::abs(mean[1] + 2.0) < 0.01);
}

TEST_CASE("multivariate mixture normalizes at p = 2") {
    const DensityGenerator gen{GeneratorKind::MultivariateNormal, 2};
    Eigen::MatrixXd S(2, 2);
    S << 1.0, 0.3, 0.3, 0.7;
    const MultivariateMixtureModel m(gen, MultivariateMixing({{-1.0, 0.0}, {1.0, 0.5}}, {0.4, 0.6}),
                                     S);
    auto inner = [&](double y) {
        return oracle::integrate(
            [&](double x) {
                Eigen::VectorXd v(2);
                v << x, y;
                return mv_density(m, v);
            },
            -12.0, 12.0, 1e-9);
    };
    const double mass = oracle::integrate(inner, -12.0, 12.0, 1e-7);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("pairwise sum is order-stable") {
    std::vector<double> v(1000);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::sin(static_cast<double>(i));
    const double s1 = pairwise_sum(v);
    const double s2 = pairwise_sum(v);
    CHECK(s1 == s2);
    double plain = 0.0;
    for (double x : v) plain += x;
    CHECK(s1 == doctest::Approx(plain).epsilon(1e-12));
}
