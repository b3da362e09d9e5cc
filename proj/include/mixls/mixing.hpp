#pragma once

#include <cstdint>
#include <vector>

namespace mixls {

// Discrete mixing distribution: CDF is the step function
// Psi(mu) = sum_j alpha_j I(mu_j <= mu), stored in canonical form
// (sorted support, near-duplicate atoms merged, negligible weights dropped).
class MixingDistribution {
  public:
    MixingDistribution() = default;
    MixingDistribution(std::vector<double> support, std::vector<double> weights);

    static MixingDistribution point_mass(double mu);

    const std::vector<double>& support() const { return support_; }
    const std::vector<double>& weights() const { return weights_; }
    std::size_t size() const { return support_.size(); }

    // Right-continuous CDF value.
    double evaluate(double mu) const;

    bool operator==(const MixingDistribution&) const = default;

    static constexpr double kMergeTol = 1e-12;
    static constexpr double kDropTol = 1e-15;

  private:
    std::vector<double> support_;
    std::vector<double> weights_;
    std::vector<double> cum_;  // prefix sums of weights_
};

// Element of the compactified space: gamma mass escaped to -inf, rho scale on
// a proper inner distribution, 1 - gamma - rho escaped to +inf.
struct ExtendedMixing {
    double gamma = 0.0;
    double rho = 1.0;
    MixingDistribution inner;

    ExtendedMixing() = default;
    ExtendedMixing(double g, double r, MixingDistribution in);
    ExtendedMixing(const MixingDistribution& proper) : gamma(0.0), rho(1.0), inner(proper) {}

    double evaluate(double mu) const { return gamma + rho * inner.evaluate(mu); }
};

// Exact value of  integral |Psi1 - Psi2| exp(-|mu|) dmu  from the interval
// decomposition induced by the merged supports. Always <= 4.
double distance_D(const MixingDistribution& psi1, const MixingDistribution& psi2);
double distance_D(const ExtendedMixing& psi1, const ExtendedMixing& psi2);

// Independent numeric route: truncated adaptive quadrature of the same
// integrand, pointwise CDF evaluation only. Agrees with distance_D within tol.
double distance_D_quadrature(const MixingDistribution& psi1, const MixingDistribution& psi2,
                             double tol);
double distance_D_quadrature(const ExtendedMixing& psi1, const ExtendedMixing& psi2, double tol);

// Discrete mixing distribution on R^p.
class MultivariateMixing {
  public:
    MultivariateMixing() = default;
    MultivariateMixing(std::vector<std::vector<double>> support, std::vector<double> weights);

    int dim() const { return dim_; }
    std::size_t size() const { return support_.size(); }
    const std::vector<std::vector<double>>& support() const { return support_; }
    const std::vector<double>& weights() const { return weights_; }

    // Psi(mu) = sum_j alpha_j prod_l I(mu_jl <= mu_l).
    double evaluate(const std::vector<double>& mu) const;

  private:
    std::vector<std::vector<double>> support_;
    std::vector<double> weights_;
    int dim_ = 0;
};

enum class DstarMethod { ProductQuadrature, MonteCarlo };

struct DstarResult {
    double value = 0.0;
    double std_error = 0.0;  // 0 for the product rule (exact cell integrals)
};

// integral |Psi1 - Psi2| exp(-sum_l |mu_l|) dmu over R^p.
// ProductQuadrature sums exact per-cell integrals over the grid induced by
// the supports (intended for p <= 3); MonteCarlo draws iid double-exponential
// coordinates and reports a standard error.
DstarResult distance_Dstar(const MultivariateMixing& psi1, const MultivariateMixing& psi2,
                           DstarMethod method = DstarMethod::ProductQuadrature,
                           std::int64_t mc_samples = 1000000, std::uint64_t seed = 0);

}  // namespace mixls
