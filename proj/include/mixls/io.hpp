#pragma once

#include <nlohmann/json_fwd.hpp>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "mixls/certify.hpp"
#include "mixls/experiment.hpp"

namespace mixls::io {

using nlohmann::json;

inline constexpr int kSchemaVersion = 1;

// Shortest round-trip decimal representation.
std::string format_double(double v);
double parse_double(const std::string& s);

std::string read_text(const std::string& path);
void write_text(const std::string& path, const std::string& content);

// --- JSON ------------------------------------------------------------------

json family_to_json(const FamilyKind& family);
FamilyKind family_from_json(const json& j);

json mixing_to_json(const MixingDistribution& psi);
MixingDistribution mixing_from_json(const json& j);

json extended_to_json(const ExtendedMixing& psi);
ExtendedMixing extended_from_json(const json& j);

json mv_mixing_to_json(const MultivariateMixing& psi);
MultivariateMixing mv_mixing_from_json(const json& j);

json model_to_json(const MixtureModel& model);
MixtureModel model_from_json(const json& j);

json mv_model_to_json(const MultivariateMixtureModel& model);
MultivariateMixtureModel mv_model_from_json(const json& j);

bool is_multivariate_model_json(const json& j);

json fit_result_to_json(const FamilyKind& family, const FitResult& result);

json certify_report_to_json(const CertifyReport& report);

json plan_to_json(const ExperimentPlan& plan);
ExperimentPlan plan_from_json(const json& j);

json records_to_json(const std::vector<ExperimentRecord>& records);
std::vector<ExperimentRecord> records_from_json(const json& j);

json summary_to_json(const std::vector<SummaryRow>& rows);

// A mixing argument for distance computations: proper/extended univariate or
// multivariate; also accepted embedded under a "mixing" key (e.g. the output
// of a fit).
using AnyMixing = std::variant<ExtendedMixing, MultivariateMixing>;
AnyMixing any_mixing_from_json(const json& j);

// --- CSV -------------------------------------------------------------------

// Datasets: one observation per line, comma-separated coordinates.
void write_dataset_csv(const std::string& path, const Dataset& data);
Dataset read_dataset_csv(const std::string& path);
void write_mv_dataset_csv(const std::string& path, const MvDataset& data);
MvDataset read_mv_dataset_csv(const std::string& path);

// Records: header n,rep,seed,D,sigma_err,loglik_gap,converged,wall_time.
std::string records_to_csv(const std::vector<ExperimentRecord>& records);
std::vector<ExperimentRecord> records_from_csv(const std::string& text);

// Summary: header n,median_D,p10_D,p90_D,median_sigma_err,p10_sigma_err,
// p90_sigma_err,convergence_rate,mean_wall_time.
std::string summary_to_csv(const std::vector<SummaryRow>& rows);

}  // namespace mixls::io
