#include "mixls/families.hpp"

#include <cmath>
#include <stdexcept>

#include "mixls/quadrature.hpp"
#include "mixls/random.hpp"

namespace mixls {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;
constexpr double kHalfLog2Pi = 0.9189385332046727418;

// log C_nu = lgamma((nu+1)/2) - 0.5*log(nu*pi) - lgamma(nu/2)
double student_log_norm(int nu) {
    const double n = static_cast<double>(nu);
    return std::lgamma(0.5 * (n + 1.0)) - 0.5 * std::log(n * M_PI) - std::lgamma(0.5 * n);
}

}  // namespace

FamilyKind FamilyKind::student_t(int nu) {
    if (nu < 1) throw std::invalid_argument("student_t: degrees of freedom must be >= 1");
    return {Family::StudentT, nu};
}

std::string FamilyKind::name() const {
    switch (tag) {
        case Family::Normal: return "normal";
        case Family::Logistic: return "logistic";
        case Family::Gumbel: return "gumbel";
        case Family::StudentT: return "student_t(" + std::to_string(nu) + ")";
    }
    return "?";
}

double std_log_density(FamilyKind family, double z) {
    switch (family.tag) {
        case Family::Normal:
            return -kHalfLog2Pi - 0.5 * z * z;
        case Family::Logistic: {
            // e^z/(1+e^z)^2 = e^{-|z|}/(1+e^{-|z|})^2
            const double a = -std::abs(z);
            return a - 2.0 * std::log1p(std::exp(a));
        }
        case Family::Gumbel:
            return -z - std::exp(-z);
        case Family::StudentT: {
            const double n = static_cast<double>(family.nu);
            return student_log_norm(family.nu) - 0.5 * (n + 1.0) * std::log1p(z * z / n);
        }
    }
    return 0.0;
}

double std_density(FamilyKind family, double z) {
    return std::exp(std_log_density(family, z));
}

double density(FamilyKind family, double x, double mu, double sigma) {
    if (!(sigma > 0.0)) throw std::domain_error("density: sigma must be positive");
    return std_density(family, (x - mu) / sigma) / sigma;
}

double log_density(FamilyKind family, double x, double mu, double sigma) {
    if (!(sigma > 0.0)) throw std::domain_error("log_density: sigma must be positive");
    return std_log_density(family, (x - mu) / sigma) - std::log(sigma);
}

double std_quantile(FamilyKind family, double u) {
    if (!(u > 0.0 && u < 1.0)) throw std::domain_error("std_quantile: u must be in (0,1)");
    switch (family.tag) {
        case Family::Logistic:
            return std::log(u / (1.0 - u));
        case Family::Gumbel:
            return -std::log(-std::log(u));
        default:
            throw std::domain_error("std_quantile: no closed form for " + family.name());
    }
}

double sample(FamilyKind family, double mu, double sigma, std::mt19937_64& rng) {
    if (!(sigma > 0.0)) throw std::domain_error("sample: sigma must be positive");
    double z = 0.0;
    switch (family.tag) {
        case Family::Normal:
            z = standard_normal(rng);
            break;
        case Family::Logistic:
        case Family::Gumbel:
            z = std_quantile(family, uniform01_open(rng));
            break;
        case Family::StudentT: {
            const double num = standard_normal(rng);
            double chi2 = 0.0;
            for (int k = 0; k < family.nu; ++k) {
                const double g = standard_normal(rng);
                chi2 += g * g;
            }
            z = num / std::sqrt(chi2 / static_cast<double>(family.nu));
            break;
        }
    }
    return mu + sigma * z;
}

FamilyConstants constants(FamilyKind family) {
    switch (family.tag) {
        case Family::Normal: {
            const double c = 1.0 / std::sqrt(2.0 * M_PI);
            return {c, c, 2.0};
        }
        case Family::Logistic:
            return {1.0, 1.0, 2.0};
        case Family::Gumbel:
            return {1.0, 1.0, 2.0};
        case Family::StudentT:
            return {1.0, static_cast<double>(family.nu), 2.0};
    }
    return {};
}

double cross_entropy_quadrature(FamilyKind family, double mu, double abs_tol) {
    auto integrand = [family, mu](double x) {
        const double w = std_density(family, x);
        if (w == 0.0) return 0.0;
        return std_log_density(family, x - mu) * w;
    };
    auto r = quad::integrate_real_line(integrand, abs_tol);
    if (!r.converged)
        throw std::runtime_error("cross_entropy_quadrature: did not converge for " + family.name());
    return r.value;
}

CrossEntropy cross_entropy_closed_form(FamilyKind family, double mu) {
    switch (family.tag) {
        case Family::Normal:
            return {-0.5 * kLog2Pi - 0.5 * (mu * mu + 1.0), CrossEntropyKind::Exact};
        case Family::Gumbel:
            return {mu - kEulerMascheroni - std::exp(mu), CrossEntropyKind::Exact};
        case Family::Logistic:
            return {-mu - 2.0 * std::log(2.0) - (1.0 + mu * mu + M_PI * M_PI / 3.0),
                    CrossEntropyKind::LowerBound};
        case Family::StudentT:
            return {cross_entropy_quadrature(family, mu), CrossEntropyKind::Quadrature};
    }
    return {};
}

double generator_log_value(const DensityGenerator& gen, double q) {
    if (gen.kind != GeneratorKind::MultivariateNormal)
        throw std::domain_error("generator_log_value: unsupported generator");
    if (q < 0.0) throw std::domain_error("generator_log_value: argument must be >= 0");
    return -0.5 * gen.dim * kLog2Pi - 0.5 * q;
}

double generator_value(const DensityGenerator& gen, double q) {
    return std::exp(generator_log_value(gen, q));
}

FamilyConstants generator_constants(const DensityGenerator& gen) {
    if (gen.kind != GeneratorKind::MultivariateNormal)
        throw std::domain_error("generator_constants: unsupported generator");
    const double p = static_cast<double>(gen.dim);
    const double v0 = std::pow(2.0 * M_PI, -0.5 * p);
    const double v1 = v0 * std::pow(p + 1.0, 0.5 * (p + 1.0));
    return {v0, v1, p + 1.0};
}

}  // namespace mixls
