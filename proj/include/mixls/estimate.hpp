#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "mixls/mixture.hpp"

namespace mixls {

struct FitConfig {
    int order = 1;
    int restarts = 20;
    int max_iter = 500;
    double ll_tol = 1e-8;  // absolute log-likelihood increase that stops iteration
    std::optional<std::pair<double, double>> sigma_bounds;
    std::uint64_t seed = 0;

    void validate() const;
};

struct FitEvents {
    bool sigma_clamped = false;   // user bounds became active
    bool sigma_guarded = false;   // internal collapse guard became active
    bool weight_floored = false;  // a mixing weight was floored and renormalized
    bool sigma_floored = false;   // covariance eigenvalue floor (multivariate)
};

struct FitResult {
    MixingDistribution mixing;
    double sigma = 0.0;
    double loglik = 0.0;
    int iterations = 0;
    bool converged = false;
    int restart_index = 0;
    std::vector<double> trace;  // log-likelihood at start of each iteration + final
    FitEvents events;
};

struct MvFitResult {
    MultivariateMixing mixing;
    Eigen::MatrixXd Sigma;
    double loglik = 0.0;
    int iterations = 0;
    bool converged = false;
    int restart_index = 0;
    std::vector<double> trace;
    FitEvents events;
};

// All restart chains failed to produce a finite log-likelihood.
struct AllChainsFailed : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// One ascent iteration: E-step responsibilities, weight update, then either
// the closed-form Normal M-step or per-coordinate bracketed ascent of the
// observed log-likelihood. Never decreases the log-likelihood.
MixtureModel em_step(const MixtureModel& model, const Dataset& data, bool* improved = nullptr);

// E-step responsibilities, row-major n x m.
std::vector<double> responsibilities(const MixtureModel& model, const Dataset& data);

FitResult fit(FamilyKind family, const Dataset& data, const FitConfig& config);
MvFitResult mv_fit(const DensityGenerator& generator, const MvDataset& data,
                   const FitConfig& config);

}  // namespace mixls
