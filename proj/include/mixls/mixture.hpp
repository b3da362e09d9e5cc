#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "mixls/families.hpp"
#include "mixls/mixing.hpp"

namespace mixls {

// g(x; Psi, sigma) = sum_j alpha_j f(x; mu_j, sigma), one shared scale.
struct MixtureModel {
    FamilyKind family;
    MixingDistribution mixing;
    double sigma = 1.0;

    MixtureModel() = default;
    MixtureModel(FamilyKind fam, MixingDistribution mix, double s);
};

struct Dataset {
    std::vector<double> observations;
    std::optional<std::uint64_t> seed;  // provenance when simulated

    std::size_t size() const { return observations.size(); }
};

struct LogLik {
    double value = 0.0;
    int underflow_count = 0;  // observations whose density underflowed to 0

    bool underflowed() const { return underflow_count > 0; }
};

double mixture_density(const MixtureModel& model, double x);
double mixture_log_density(const MixtureModel& model, double x);

// Stable log-likelihood (per-observation log-sum-exp over components,
// fixed-order pairwise summation over observations).
LogLik log_likelihood(const MixtureModel& model, const Dataset& data);

Dataset sample_mixture(const MixtureModel& model, std::int64_t n, std::uint64_t seed);
Dataset sample_mixture(const MixtureModel& model, std::int64_t n, std::mt19937_64& rng);

// Evaluates (l_n(Psi, sigma; data),
//            l_n(a Psi + c, a sigma; a*data + c) + n log a);
// the two coincide up to roundoff, which is the testable form of
// location-scale equivariance.
std::pair<double, double> affine_transform_loglik_identity(const MixtureModel& model,
                                                           const Dataset& data, double a,
                                                           double c);

// Deterministic fixed-order pairwise reduction.
double pairwise_sum(const std::vector<double>& terms);

// ---------------------------------------------------------------------------
// Multivariate elliptical mixture with a shared covariance.

struct MultivariateMixtureModel {
    DensityGenerator generator;
    MultivariateMixing mixing;
    Eigen::MatrixXd Sigma;

    MultivariateMixtureModel() = default;
    MultivariateMixtureModel(DensityGenerator gen, MultivariateMixing mix, Eigen::MatrixXd S);
};

struct MvDataset {
    std::vector<Eigen::VectorXd> observations;
    int dim = 0;
    std::optional<std::uint64_t> seed;

    std::size_t size() const { return observations.size(); }
};

double mv_density(const MultivariateMixtureModel& model, const Eigen::VectorXd& x);
double mv_log_density(const MultivariateMixtureModel& model, const Eigen::VectorXd& x);
LogLik mv_log_likelihood(const MultivariateMixtureModel& model, const MvDataset& data);
MvDataset mv_sample(const MultivariateMixtureModel& model, std::int64_t n, std::uint64_t seed);

// Cholesky factor with a positive-definiteness check; shared by density and
// sampling paths.
Eigen::LLT<Eigen::MatrixXd> spd_factor(const Eigen::MatrixXd& Sigma);

}  // namespace mixls
