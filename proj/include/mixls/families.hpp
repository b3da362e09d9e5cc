#pragma once

#include <cstdint>
#include <random>
#include <string>

namespace mixls {

enum class Family { Normal, Logistic, Gumbel, StudentT };

// A univariate location-scale component family. StudentT carries its (fixed,
// integer) degrees of freedom.
struct FamilyKind {
    Family tag = Family::Normal;
    int nu = 0;  // StudentT only, nu >= 1

    static FamilyKind normal() { return {Family::Normal, 0}; }
    static FamilyKind logistic() { return {Family::Logistic, 0}; }
    static FamilyKind gumbel() { return {Family::Gumbel, 0}; }
    static FamilyKind student_t(int nu);

    bool operator==(const FamilyKind&) const = default;
    std::string name() const;
};

// Envelope constants: f(z;0,1) <= min{v0, v1*|z|^-beta} with beta > 1
// (beta > p for a p-variate density generator).
struct FamilyConstants {
    double v0 = 0.0;
    double v1 = 0.0;
    double beta = 0.0;
};

enum class CrossEntropyKind { Exact, LowerBound, Quadrature };

struct CrossEntropy {
    double value = 0.0;
    CrossEntropyKind kind = CrossEntropyKind::Exact;
};

inline constexpr double kEulerMascheroni = 0.57721566490153286061;

// Standard density f(z;0,1) and its log (the log form stays finite far into
// the tails where the density itself underflows).
double std_density(FamilyKind family, double z);
double std_log_density(FamilyKind family, double z);

// Location-scale density f(x;mu,sigma) = std_density((x-mu)/sigma)/sigma.
double density(FamilyKind family, double x, double mu, double sigma);
double log_density(FamilyKind family, double x, double mu, double sigma);

// Closed-form quantile; defined for Logistic and Gumbel only.
double std_quantile(FamilyKind family, double u);

// One draw from f(.;mu,sigma). Inverse CDF for Logistic/Gumbel, Box-Muller
// for Normal, normal/chi-square ratio for StudentT.
double sample(FamilyKind family, double mu, double sigma, std::mt19937_64& rng);

FamilyConstants constants(FamilyKind family);

// Integral of log f(x;mu,1) f(x;0,1) dx. Exact for Normal and Gumbel,
// analytic lower bound for Logistic, adaptive quadrature for StudentT.
CrossEntropy cross_entropy_closed_form(FamilyKind family, double mu);

// Quadrature route for the same integral, any family.
double cross_entropy_quadrature(FamilyKind family, double mu, double abs_tol = 1e-10);

// Elliptical density generator: f(x;mu,Sigma) = |Sigma|^{-1/2} f0(q) with
// q the Mahalanobis quadratic form. Only the multivariate normal generator
// is implemented.
enum class GeneratorKind { MultivariateNormal };

struct DensityGenerator {
    GeneratorKind kind = GeneratorKind::MultivariateNormal;
    int dim = 1;
};

double generator_value(const DensityGenerator& gen, double q);
double generator_log_value(const DensityGenerator& gen, double q);
FamilyConstants generator_constants(const DensityGenerator& gen);

}  // namespace mixls
