#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mixls/mixture.hpp"

namespace mixls {

// Constants entering the scale guard rails for a declared true model and fit
// order m: sigma is confined to [eps, Delta] asymptotically.
struct TheoryConstants {
    double a = 0.0;      // (1 + beta) / (2 beta)
    double b = 0.0;      // 2 (beta + 1) / (beta - 1)
    double eps0 = 0.0;   // (3 m b v0 / sigma0)^(-1/(1-a))
    double K0 = 0.0;     // integral of log(g) g
    double Delta = 0.0;  // v0 / exp(K0 - 1)
    double eps = 0.0;    // largest value meeting D1-D3
    int m = 0;
    double sigma0 = 0.0;
    FamilyConstants family;
};

struct MvTheoryConstants {
    double a_star = 0.0;  // (beta + p) / (2 beta)
    double b_star = 0.0;  // 2 (beta - p + 2) / (beta - p)
    double eps0_star = 0.0;
    double K0_star = 0.0;
    double K0_star_se = 0.0;  // monte-carlo standard error
    double Delta_star = 0.0;  // (v0 / exp(K0* - 1))^2
    double eps_star = 0.0;
    int p = 0;
    int m = 0;
    FamilyConstants generator;
};

enum class K0Method { Quadrature, MonteCarlo };

struct K0Result {
    double value = 0.0;
    double std_error = 0.0;  // monte-carlo only
    bool converged = false;
};

K0Result compute_K0(const MixtureModel& true_model, K0Method method,
                    std::int64_t mc_samples = 1000000, std::uint64_t seed = 0,
                    double quad_tol = 1e-8);
K0Result compute_mv_K0(const MultivariateMixtureModel& true_model, std::int64_t mc_samples,
                       std::uint64_t seed);

TheoryConstants compute_constants(const MixtureModel& true_model, int m);
MvTheoryConstants compute_mv_constants(const MultivariateMixtureModel& true_model, int m,
                                       std::int64_t mc_samples = 1000000,
                                       std::uint64_t seed = 0);

// D1-D3 slack when re-evaluated from the stored constants; all must be >= 0
// and the binding one is ~0.
struct ConditionMargins {
    double d1 = 0.0;
    double d2 = 0.0;
    double d3 = 0.0;

    double min() const;
};

ConditionMargins evaluate_conditions(const TheoryConstants& tc);
ConditionMargins evaluate_conditions(const MvTheoryConstants& tc);

struct GridSpec {
    double lo = 1e-6;
    double hi = 1e6;
    int points = 10000;  // log-spaced magnitudes
};

// Envelope check f(z;0,1) <= min{v0, v1 |z|^-beta} on a signed log grid
// (or f0(x) <= min{v0, v1 x^-beta/2} on x >= 0 for a generator).
struct C3Report {
    bool pass = false;
    double max_violation = 0.0;  // <= 0 when the envelope holds
    double argmax = 0.0;
    int points = 0;
};

C3Report verify_C3(FamilyKind family, const FamilyConstants& fc, const GridSpec& grid = {});
C3Report verify_C3(const DensityGenerator& gen, const FamilyConstants& fc,
                   const GridSpec& grid = {});

// Finite-entropy check via the pairwise cross-entropy reduction
// sum_j sum_h alpha_j alpha_h integral log f(t; (mu_j-mu_h)/sigma0, 1) f(t;0,1) dt.
struct C2Report {
    bool pass = false;
    double value = 0.0;
};

C2Report verify_C2(const MixtureModel& true_model);

struct CheckEntry {
    std::string name;
    bool pass = false;
    double margin = 0.0;
    std::optional<double> location;
};

struct CertifyReport {
    std::optional<TheoryConstants> constants;
    std::optional<MvTheoryConstants> mv_constants;
    std::vector<CheckEntry> checks;

    bool all_pass() const;
};

CertifyReport certify_model(const MixtureModel& true_model, int order);
CertifyReport certify_model(const MultivariateMixtureModel& true_model, int order,
                            std::int64_t mc_samples = 1000000, std::uint64_t seed = 0);

}  // namespace mixls
