#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mixls/certify.hpp"
#include "oracles.hpp"

using namespace mixls;

namespace {

MixtureModel std_model(FamilyKind f, double sigma = 1.0) {
    return MixtureModel(f, MixingDistribution::point_mass(0.0), sigma);
}

}  // namespace

TEST_CASE("K0 by quadrature against analytic entropies") {
    // Standard normal: -(1/2) log(2 pi e).
    const auto kn = compute_K0(std_model(FamilyKind::normal()), K0Method::Quadrature);
    CHECK(kn.converged);
    CHECK(kn.value == doctest::Approx(-0.5 * std::log(2.0 * M_PI * std::exp(1.0))).epsilon(1e-8));

    // Standard Gumbel: -(gamma + 1).
    const auto kg = compute_K0(std_model(FamilyKind::gumbel()), K0Method::Quadrature);
    CHECK(kg.value == doctest::Approx(-(kEulerMascheroni + 1.0)).epsilon(1e-8));

    // Standard logistic: -2.
    const auto kl = compute_K0(std_model(FamilyKind::logistic()), K0Method::Quadrature);
    CHECK(kl.value == doctest::Approx(-2.0).epsilon(1e-8));
}

TEST_CASE("K0 scale relation") {
    const MixingDistribution shape({-1.0, 2.0}, {0.3, 0.7});
    for (const FamilyKind f : {FamilyKind::normal(), FamilyKind::gumbel()}) {
        const auto k1 = compute_K0(MixtureModel(f, shape, 1.0), K0Method::Quadrature);
        const auto k2 = compute_K0(MixtureModel(f, shape, 2.0), K0Method::Quadrature);
        CHECK(k2.value == doctest::Approx(k1.value - std::log(2.0)).epsilon(1e-7));
    }
}

TEST_CASE("K0 monte carlo agrees with quadrature") {
    const FamilyKind fams[] = {FamilyKind::normal(), FamilyKind::logistic(), FamilyKind::gumbel(),
                               FamilyKind::student_t(3)};
    const MixingDistribution shape({-2.0, 1.0}, {0.5, 0.5});
    for (const FamilyKind& f : fams) {
        const MixtureModel m(f, shape, 0.8);
        const auto q = compute_K0(m, K0Method::Quadrature);
        const auto mc = compute_K0(m, K0Method::MonteCarlo, 200000, 1234);
        CHECK(mc.std_error > 0.0);
        CHECK(std::abs(mc.value - q.value) <= 4.0 * mc.std_error);
    }
}

TEST_CASE("theory constants for the normal reference case") {
    const TheoryConstants tc = compute_constants(std_model(FamilyKind::normal()), 2);
    CHECK(tc.a == 0.75);
    CHECK(tc.b == 6.0);
    const double eps0_expect = std::pow(36.0 / std::sqrt(2.0 * M_PI), -4.0);
    CHECK(std::abs(tc.eps0 - eps0_expect) <= 1e-12 * eps0_expect);
    // Delta = v0 / exp(K0 - 1) with K0 the normal entropy value: exactly e^{3/2}.
    CHECK(tc.Delta == doctest::Approx(std::exp(1.5)).epsilon(1e-6));

    const ConditionMargins cm = evaluate_conditions(tc);
    CHECK(cm.d1 >= 0.0);
    CHECK(cm.d2 >= 0.0);
    CHECK(cm.d3 >= -1e-12);
    CHECK(cm.min() <= 1e-12);  // one bound is binding
    CHECK(tc.eps <= tc.eps0);
    CHECK(tc.eps < tc.Delta);
}

TEST_CASE("constants across families keep the guaranteed ranges") {
    std::mt19937_64 rng(88);
    for (int k = 0; k < 20; ++k) {
        const MixtureModel m(oracle::random_family(rng), oracle::random_mixing(rng, 3, 3.0),
                             0.3 + 2.0 * uniform01(rng));
        const TheoryConstants tc = compute_constants(m, 1 + static_cast<int>(rng() % 4));
        CHECK(tc.a > 0.5);
        CHECK(tc.a < 1.0);
        CHECK(tc.b > 2.0);
        CHECK(tc.eps > 0.0);
        CHECK(tc.Delta > 0.0);
        const ConditionMargins cm = evaluate_conditions(tc);
        CHECK(cm.d1 >= -1e-15);
        CHECK(cm.d2 >= -1e-15);
        CHECK(cm.d3 >= -1e-9);
        CHECK(cm.min() <= 1e-9);
    }
}

TEST_CASE("envelope verification") {
    for (const FamilyKind f : {FamilyKind::normal(), FamilyKind::logistic(), FamilyKind::gumbel(),
                               FamilyKind::student_t(1), FamilyKind::student_t(4)}) {
        const C3Report rep = verify_C3(f, constants(f));
        CHECK(rep.pass);
        CHECK(rep.max_violation <= 0.0);
        CHECK(rep.points >= 10000);
    }
    // Student-t(1) also passes with the generic (1, 1, 2) triple.
    CHECK(verify_C3(FamilyKind::student_t(1), FamilyConstants{1.0, 1.0, 2.0}).pass);

    // A deliberately wrong tail exponent for the normal is caught away from 0.
    FamilyConstants wrong = constants(FamilyKind::normal());
    wrong.beta = 3.0;
    const C3Report bad = verify_C3(FamilyKind::normal(), wrong);
    CHECK_FALSE(bad.pass);
    CHECK(bad.max_violation > 0.0);
    CHECK(std::abs(bad.argmax) > 1.0);

    for (int p : {1, 2, 3}) {
        const DensityGenerator gen{GeneratorKind::MultivariateNormal, p};
        CHECK(verify_C3(gen, generator_constants(gen)).pass);
    }
}

TEST_CASE("finite-entropy reduction") {
    // Normal, atoms at +-2: pairwise closed forms combine to about -5.4189.
    const MixtureModel m(FamilyKind::normal(), MixingDistribution({-2.0, 2.0}, {0.5, 0.5}), 1.0);
    const C2Report rep = verify_C2(m);
    CHECK(rep.pass);
    const double same = -0.5 * std::log(2.0 * M_PI) - 0.5;
    const double cross = -0.5 * std::log(2.0 * M_PI) - 0.5 * 17.0;
    CHECK(rep.value == doctest::Approx(0.5 * same + 0.5 * cross).epsilon(1e-12));

    // Independent route: single integral of (sum_j a_j log f_j)(sum_h a_h f_h).
    const double quad = oracle::integrate_line(
        [&](double x) {
            const double w = mixture_density(m, x);
            if (w == 0.0) return 0.0;
            double lg = 0.0;
            for (std::size_t j = 0; j < m.mixing.size(); ++j)
                lg += m.mixing.weights()[j] *
                      log_density(m.family, x, m.mixing.support()[j], m.sigma);
            return lg * w;
        },
        60.0, 1e-11);
    CHECK(rep.value == doctest::Approx(quad).epsilon(1e-8));

    // Single atom reduces to the cross entropy at zero offset.
    for (const FamilyKind f : {FamilyKind::normal(), FamilyKind::gumbel()}) {
        const C2Report r1 = verify_C2(std_model(f));
        CHECK(r1.value ==
              doctest::Approx(cross_entropy_closed_form(f, 0.0).value).epsilon(1e-10));
    }

    // Gumbel pair: mu - gamma - e^mu terms at offsets {0, 1, -1}.
    const MixtureModel g(FamilyKind::gumbel(), MixingDistribution({0.0, 1.0}, {0.5, 0.5}), 1.0);
    const C2Report rg = verify_C2(g);
    auto ce = [](double mu) { return mu - kEulerMascheroni - std::exp(mu); };
    CHECK(rg.pass);
    CHECK(rg.value ==
          doctest::Approx(0.5 * ce(0.0) + 0.25 * ce(1.0) + 0.25 * ce(-1.0)).epsilon(1e-12));
}

TEST_CASE("multivariate constants at p = 2") {
    const DensityGenerator gen{GeneratorKind::MultivariateNormal, 2};
    const Eigen::MatrixXd I2 = Eigen::MatrixXd::Identity(2, 2);
    const MultivariateMixtureModel m(gen, MultivariateMixing({{0.0, 0.0}}, {1.0}), I2);
    const MvTheoryConstants tc = compute_mv_constants(m, 2, 200000, 5);
    CHECK(tc.a_star == doctest::Approx(5.0 / 6.0).epsilon(1e-15));
    CHECK(tc.b_star == 6.0);

    // eps0* solves 0.5 eps^(1/12) = 1/24, i.e. (1/12)^12.
    const double expect = std::pow(1.0 / 12.0, 12.0);
    CHECK(std::abs(tc.eps0_star - expect) <= 1e-10 * expect);

    // Bisection oracle on the defining equation, in log space.
    const double coef = generator_constants(gen).v0 * M_PI / std::tgamma(2.0);
    const double root = oracle::bisect(
        [&](double s) { return coef * std::exp(s / 12.0) - 1.0 / 24.0; }, -80.0, 10.0, 300);
    CHECK(std::abs(tc.eps0_star - std::exp(root)) <= 1e-10 * tc.eps0_star);

    // K0* against the analytic value -(log 2 pi + 1); Delta* follows.
    const double k0_true = -(std::log(2.0 * M_PI) + 1.0);
    CHECK(std::abs(tc.K0_star - k0_true) <= 4.0 * tc.K0_star_se);
    const double delta_true = std::pow(generator_constants(gen).v0 / std::exp(k0_true - 1.0), 2.0);
    CHECK(tc.Delta_star == doctest::Approx(delta_true).epsilon(30.0 * tc.K0_star_se));

    const ConditionMargins cm = evaluate_conditions(tc);
    CHECK(cm.d1 >= -1e-15);
    CHECK(cm.d2 >= -1e-15);
    CHECK(cm.d3 >= -1e-9);
    CHECK(cm.min() <= 1e-9);
}

TEST_CASE("certification reports") {
    const CertifyReport rep = certify_model(std_model(FamilyKind::normal()), 2);
    CHECK(rep.constants.has_value());
    CHECK(rep.all_pass());
    bool saw_c3 = false;
    for (const auto& c : rep.checks)
        if (c.name == "C3") {
            saw_c3 = true;
            CHECK(c.pass);
            CHECK(c.location.has_value());
        }
    CHECK(saw_c3);

    const DensityGenerator gen{GeneratorKind::MultivariateNormal, 2};
    const MultivariateMixtureModel mv(gen, MultivariateMixing({{0.0, 0.0}}, {1.0}),
                                      Eigen::MatrixXd::Identity(2, 2));
    const CertifyReport mrep = certify_model(mv, 2, 100000, 3);
    CHECK(mrep.mv_constants.has_value());
    CHECK(mrep.all_pass());
}
