#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "mixls/estimate.hpp"
#include "mixls/mixture.hpp"

namespace mixls {

struct ExperimentPlan {
    std::variant<MixtureModel, MultivariateMixtureModel> true_model;
    int fit_order = 1;
    std::vector<int> n_grid;  // strictly increasing
    int replications = 1;
    std::uint64_t base_seed = 0;
    FitConfig fit_config;

    bool multivariate() const {
        return std::holds_alternative<MultivariateMixtureModel>(true_model);
    }
    void validate() const;
};

struct ExperimentRecord {
    int n = 0;
    int rep = 0;
    std::uint64_t seed = 0;
    double D_value = 0.0;    // D(fit, truth); D* in the multivariate case
    double sigma_err = 0.0;  // |sigma - sigma0|, or Frobenius error of Sigma
    double loglik_gap = 0.0;
    bool converged = false;
    double wall_time = 0.0;  // seconds; measurement metadata
    bool failed = false;
    std::string error;
};

// Statistical content equality; wall_time is timing metadata and excluded.
bool records_equal(const ExperimentRecord& a, const ExperimentRecord& b);
bool records_equal(const std::vector<ExperimentRecord>& a, const std::vector<ExperimentRecord>& b);

// Runs the (n, rep) grid; each record is independently seeded and the output
// is ordered by (n, rep) regardless of the number of worker threads.
std::vector<ExperimentRecord> run_experiment(const ExperimentPlan& plan, int jobs = 1);

struct SummaryRow {
    int n = 0;
    double median_D = 0.0, p10_D = 0.0, p90_D = 0.0;
    double median_sigma_err = 0.0, p10_sigma_err = 0.0, p90_sigma_err = 0.0;
    double convergence_rate = 0.0;
    double mean_wall_time = 0.0;
};

std::vector<SummaryRow> summarize(const std::vector<ExperimentRecord>& records);

// Linearly interpolated percentile of a sample, q in [0, 1].
double percentile(std::vector<double> values, double q);

}  // namespace mixls
