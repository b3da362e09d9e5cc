#include "mixls/certify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "mixls/quadrature.hpp"
#include "mixls/random.hpp"

namespace mixls {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double entropy_integrand(const MixtureModel& model, double x) {
    const double lg = mixture_log_density(model, x);
    if (lg == kNegInf) return 0.0;  // g log g -> 0 where g vanishes
    return lg * std::exp(lg);
}

}  // namespace

K0Result compute_K0(const MixtureModel& true_model, K0Method method, std::int64_t mc_samples,
                    std::uint64_t seed, double quad_tol) {
    if (method == K0Method::Quadrature) {
        auto r = quad::integrate_real_line(
            [&true_model](double x) { return entropy_integrand(true_model, x); }, quad_tol);
        return {r.value, 0.0, r.converged};
    }
    if (mc_samples < 2) throw std::invalid_argument("compute_K0: mc_samples must be >= 2");
    Dataset draws = sample_mixture(true_model, mc_samples, seed);
    double sum = 0.0, sumsq = 0.0;
    for (double x : draws.observations) {
        const double lg = mixture_log_density(true_model, x);
        sum += lg;
        sumsq += lg * lg;
    }
    const double n = static_cast<double>(mc_samples);
    const double mean = sum / n;
    const double var = std::max(0.0, sumsq / n - mean * mean);
    return {mean, std::sqrt(var / n), true};
}

K0Result compute_mv_K0(const MultivariateMixtureModel& true_model, std::int64_t mc_samples,
                       std::uint64_t seed) {
    if (mc_samples < 2) throw std::invalid_argument("compute_mv_K0: mc_samples must be >= 2");
    MvDataset draws = mv_sample(true_model, mc_samples, seed);
    double sum = 0.0, sumsq = 0.0;
    for (const auto& x : draws.observations) {
        const double lg = mv_log_density(true_model, x);
        sum += lg;
        sumsq += lg * lg;
    }
    const double n = static_cast<double>(mc_samples);
    const double mean = sum / n;
    const double var = std::max(0.0, sumsq / n - mean * mean);
    return {mean, std::sqrt(var / n), true};
}

TheoryConstants compute_constants(const MixtureModel& true_model, int m) {
    if (m < 1) throw std::invalid_argument("compute_constants: order must be >= 1");
    const FamilyConstants fc = constants(true_model.family);
    if (!(fc.beta > 1.0)) throw std::domain_error("compute_constants: requires beta > 1");

    TheoryConstants tc;
    tc.m = m;
    tc.sigma0 = true_model.sigma;
    tc.family = fc;
    tc.a = (1.0 + fc.beta) / (2.0 * fc.beta);
    tc.b = 2.0 * (fc.beta + 1.0) / (fc.beta - 1.0);
    tc.eps0 = std::pow(3.0 * m * tc.b * fc.v0 / true_model.sigma, -1.0 / (1.0 - tc.a));

    const K0Result k0 = compute_K0(true_model, K0Method::Quadrature);
    if (!k0.converged) throw std::runtime_error("compute_constants: K0 quadrature did not converge");
    tc.K0 = k0.value;
    tc.Delta = fc.v0 / std::exp(tc.K0 - 1.0);

    const double d2_bound = std::pow(fc.v1 / fc.v0, -2.0 / (fc.beta + 1.0));
    // D3 has a single log eps term, so the binding eps solves it exactly.
    const double d3_log = (tc.K0 - 1.0 - std::log(fc.v0) / tc.b -
                           (1.0 - 1.0 / tc.b) * std::log(fc.v1)) *
                          4.0 / (fc.beta - 1.0);
    const double d3_bound = std::exp(d3_log);
    tc.eps = std::min({tc.eps0, d2_bound, d3_bound});
    return tc;
}

double ConditionMargins::min() const { return std::min({d1, d2, d3}); }

ConditionMargins evaluate_conditions(const TheoryConstants& tc) {
    ConditionMargins m;
    m.d1 = tc.eps0 - tc.eps;
    m.d2 = std::pow(tc.family.v1 / tc.family.v0, -2.0 / (tc.family.beta + 1.0)) - tc.eps;
    m.d3 = (tc.K0 - 1.0) -
           (std::log(tc.family.v0) / tc.b + (1.0 - 1.0 / tc.b) * std::log(tc.family.v1) +
            0.25 * (tc.family.beta - 1.0) * std::log(tc.eps));
    return m;
}

ConditionMargins evaluate_conditions(const MvTheoryConstants& tc) {
    const double p = static_cast<double>(tc.p);
    ConditionMargins m;
    m.d1 = tc.eps0_star - tc.eps_star;
    m.d2 = std::pow(tc.generator.v1 / tc.generator.v0, -4.0 / (tc.generator.beta - p + 2.0)) -
           tc.eps_star;
    m.d3 = (tc.K0_star - 1.0) -
           (std::log(tc.generator.v0) / tc.b_star +
            (1.0 - 1.0 / tc.b_star) * std::log(tc.generator.v1) +
            0.125 * (tc.generator.beta - p) * std::log(tc.eps_star));
    return m;
}

MvTheoryConstants compute_mv_constants(const MultivariateMixtureModel& true_model, int m,
                                       std::int64_t mc_samples, std::uint64_t seed) {
    if (m < 1) throw std::invalid_argument("compute_mv_constants: order must be >= 1");
    const FamilyConstants gc = generator_constants(true_model.generator);
    const double p = static_cast<double>(true_model.generator.dim);
    if (!(gc.beta > p)) throw std::domain_error("compute_mv_constants: requires beta > p");

    MvTheoryConstants tc;
    tc.p = true_model.generator.dim;
    tc.m = m;
    tc.generator = gc;
    tc.a_star = (gc.beta + p) / (2.0 * gc.beta);
    tc.b_star = 2.0 * (gc.beta - p + 2.0) / (gc.beta - p);

    // eps0* solves  v0 pi^(p/2) / (|Sigma0|^(1/2) Gamma(p/2+1)) * eps^((1-a*)/2) = 1/(2 m b*).
    const double det = spd_factor(true_model.Sigma).matrixLLT().diagonal().array().square().prod();
    const double coef = gc.v0 * std::pow(M_PI, 0.5 * p) /
                        (std::sqrt(det) * std::tgamma(0.5 * p + 1.0));
    tc.eps0_star = std::pow(1.0 / (2.0 * m * tc.b_star * coef), 2.0 / (1.0 - tc.a_star));

    const K0Result k0 = compute_mv_K0(true_model, mc_samples, seed);
    tc.K0_star = k0.value;
    tc.K0_star_se = k0.std_error;
    const double ratio = gc.v0 / std::exp(tc.K0_star - 1.0);
    tc.Delta_star = ratio * ratio;

    const double d2_bound = std::pow(gc.v1 / gc.v0, -4.0 / (gc.beta - p + 2.0));
    const double d3_log = (tc.K0_star - 1.0 - std::log(gc.v0) / tc.b_star -
                           (1.0 - 1.0 / tc.b_star) * std::log(gc.v1)) *
                          8.0 / (gc.beta - p);
    const double d3_bound = std::exp(d3_log);
    tc.eps_star = std::min({tc.eps0_star, d2_bound, d3_bound});
    return tc;
}

namespace {

C3Report envelope_scan(const std::function<double(double)>& f_of_grid_point,
                       const std::function<double(double)>& envelope, const GridSpec& grid,
                       bool signed_grid) {
    if (grid.points < 2 || !(grid.lo > 0.0) || !(grid.hi > grid.lo))
        throw std::invalid_argument("verify_C3: bad grid");
    C3Report rep;
    rep.max_violation = -std::numeric_limits<double>::infinity();
    const double step = std::log(grid.hi / grid.lo) / (grid.points - 1);
    auto probe = [&](double z) {
        const double v = f_of_grid_point(z) - envelope(z);
        ++rep.points;
        if (v > rep.max_violation) {
            rep.max_violation = v;
            rep.argmax = z;
        }
    };
    for (int k = 0; k < grid.points; ++k) {
        const double mag = grid.lo * std::exp(step * k);
        probe(mag);
        if (signed_grid) probe(-mag);
    }
    probe(0.0);
    rep.pass = rep.max_violation <= 0.0;
    return rep;
}

}  // namespace

C3Report verify_C3(FamilyKind family, const FamilyConstants& fc, const GridSpec& grid) {
    auto env = [&fc](double z) {
        return z == 0.0 ? fc.v0 : std::min(fc.v0, fc.v1 * std::pow(std::abs(z), -fc.beta));
    };
    return envelope_scan([family](double z) { return std_density(family, z); }, env, grid, true);
}

C3Report verify_C3(const DensityGenerator& gen, const FamilyConstants& fc, const GridSpec& grid) {
    auto env = [&fc](double x) {
        return x == 0.0 ? fc.v0 : std::min(fc.v0, fc.v1 * std::pow(x, -0.5 * fc.beta));
    };
    return envelope_scan([&gen](double x) { return generator_value(gen, x); }, env, grid, false);
}

C2Report verify_C2(const MixtureModel& true_model) {
    const auto& mus = true_model.mixing.support();
    const auto& ws = true_model.mixing.weights();
    C2Report rep;
    rep.pass = true;
    double total = 0.0;
    for (std::size_t j = 0; j < mus.size(); ++j) {
        for (std::size_t h = 0; h < mus.size(); ++h) {
            const double delta = (mus[j] - mus[h]) / true_model.sigma;
            const CrossEntropy ce = cross_entropy_closed_form(true_model.family, delta);
            const double term = ce.kind == CrossEntropyKind::Exact
                                    ? ce.value
                                    : cross_entropy_quadrature(true_model.family, delta, 1e-9);
            if (!std::isfinite(term)) rep.pass = false;
            total += ws[j] * ws[h] * term;
        }
    }
    rep.value = total;
    rep.pass = rep.pass && std::isfinite(total);
    return rep;
}

bool CertifyReport::all_pass() const {
    return std::all_of(checks.begin(), checks.end(),
                       [](const CheckEntry& c) { return c.pass; });
}

CertifyReport certify_model(const MixtureModel& true_model, int order) {
    CertifyReport rep;
    rep.constants = compute_constants(true_model, order);
    const auto& tc = *rep.constants;

    const C3Report c3 = verify_C3(true_model.family, tc.family);
    rep.checks.push_back({"C3", c3.pass, -c3.max_violation, c3.argmax});

    const C2Report c2 = verify_C2(true_model);
    rep.checks.push_back({"C2", c2.pass, c2.value, std::nullopt});

    const ConditionMargins cm = evaluate_conditions(tc);
    rep.checks.push_back({"D1", cm.d1 >= 0.0, cm.d1, std::nullopt});
    rep.checks.push_back({"D2", cm.d2 >= 0.0, cm.d2, std::nullopt});
    rep.checks.push_back({"D3", cm.d3 >= -1e-12, cm.d3, std::nullopt});
    rep.checks.push_back({"a_range", tc.a > 0.0 && tc.a < 1.0, std::min(tc.a, 1.0 - tc.a),
                          std::nullopt});
    rep.checks.push_back({"b_range", tc.b > 1.0, tc.b - 1.0, std::nullopt});
    return rep;
}

CertifyReport certify_model(const MultivariateMixtureModel& true_model, int order,
                            std::int64_t mc_samples, std::uint64_t seed) {
    CertifyReport rep;
    rep.mv_constants = compute_mv_constants(true_model, order, mc_samples, seed);
    const auto& tc = *rep.mv_constants;

    const C3Report c3 = verify_C3(true_model.generator, tc.generator);
    rep.checks.push_back({"C3*", c3.pass, -c3.max_violation, c3.argmax});

    const ConditionMargins cm = evaluate_conditions(tc);
    rep.checks.push_back({"D1*", cm.d1 >= 0.0, cm.d1, std::nullopt});
    rep.checks.push_back({"D2*", cm.d2 >= 0.0, cm.d2, std::nullopt});
    rep.checks.push_back({"D3*", cm.d3 >= -1e-12, cm.d3, std::nullopt});
    rep.checks.push_back({"a_star_range", tc.a_star > 0.0 && tc.a_star < 1.0,
                          std::min(tc.a_star, 1.0 - tc.a_star), std::nullopt});
    rep.checks.push_back({"b_star_range", tc.b_star > 1.0, tc.b_star - 1.0, std::nullopt});
    return rep;
}

}  // namespace mixls
