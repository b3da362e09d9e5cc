#include "mixls/mixing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "mixls/quadrature.hpp"
#include "mixls/random.hpp"

namespace mixls {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// F(t) = integral_{-inf}^{t} exp(-|u|) du, total mass 2.
double exp_weight_cdf(double t) {
    return t <= 0.0 ? std::exp(t) : 2.0 - std::exp(-t);
}

// integral_a^b exp(-|u|) du, written to avoid cancellation on narrow intervals.
double exp_weight(double a, double b) {
    if (a >= b) return 0.0;
    if (a == -kInf && b == kInf) return 2.0;
    if (a == -kInf) return exp_weight_cdf(b);
    if (b == kInf) return 2.0 - exp_weight_cdf(a);
    if (b <= 0.0) return std::exp(a) * std::expm1(b - a);
    if (a >= 0.0) return -std::exp(-a) * std::expm1(a - b);
    return -std::expm1(a) - std::expm1(-b);  // a < 0 < b
}

}  // namespace

MixingDistribution::MixingDistribution(std::vector<double> support, std::vector<double> weights) {
    if (support.size() != weights.size())
        throw std::invalid_argument("mixing: support/weights length mismatch");
    if (support.empty()) throw std::invalid_argument("mixing: no atoms");
    double total = 0.0;
    for (std::size_t j = 0; j < support.size(); ++j) {
        if (!std::isfinite(support[j])) throw std::invalid_argument("mixing: non-finite location");
        if (weights[j] < 0.0) throw std::invalid_argument("mixing: negative weight");
        total += weights[j];
    }
    if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("mixing: weights must sum to 1");

    std::vector<std::size_t> order(support.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&support](std::size_t a, std::size_t b) { return support[a] < support[b]; });

    for (std::size_t k : order) {
        const double mu = support[k];
        const double w = weights[k];
        if (!support_.empty() && mu - support_.back() <= kMergeTol) {
            weights_.back() += w;
        } else {
            support_.push_back(mu);
            weights_.push_back(w);
        }
    }
    // Drop negligible atoms (keep at least one).
    std::vector<double> s, w;
    for (std::size_t j = 0; j < support_.size(); ++j) {
        if (weights_[j] > kDropTol) {
            s.push_back(support_[j]);
            w.push_back(weights_[j]);
        }
    }
    if (!s.empty()) {
        support_ = std::move(s);
        weights_ = std::move(w);
    }
    cum_.resize(weights_.size());
    std::partial_sum(weights_.begin(), weights_.end(), cum_.begin());
}

MixingDistribution MixingDistribution::point_mass(double mu) {
    return MixingDistribution({mu}, {1.0});
}

double MixingDistribution::evaluate(double mu) const {
    const auto it = std::upper_bound(support_.begin(), support_.end(), mu);
    const auto k = static_cast<std::size_t>(it - support_.begin());
    return k == 0 ? 0.0 : cum_[k - 1];
}

ExtendedMixing::ExtendedMixing(double g, double r, MixingDistribution in)
    : gamma(g), rho(r), inner(std::move(in)) {
    if (gamma < 0.0 || rho < 0.0 || gamma + rho > 1.0 + 1e-12)
        throw std::invalid_argument("extended mixing: need gamma, rho >= 0 and gamma + rho <= 1");
    if (rho > 0.0 && inner.size() == 0)
        throw std::invalid_argument("extended mixing: rho > 0 requires a proper inner distribution");
}

double distance_D(const ExtendedMixing& psi1, const ExtendedMixing& psi2) {
    const auto& s1 = psi1.inner.support();
    const auto& w1 = psi1.inner.weights();
    const auto& s2 = psi2.inner.support();
    const auto& w2 = psi2.inner.weights();

    double cum1 = psi1.gamma;
    double cum2 = psi2.gamma;
    double total = 0.0;
    std::size_t i = 0, j = 0;
    double prev = -kInf;
    while (i < s1.size() || j < s2.size()) {
        double t;
        if (j >= s2.size() || (i < s1.size() && s1[i] < s2[j]))
            t = s1[i];
        else
            t = s2[j];
        total += std::abs(cum1 - cum2) * exp_weight(prev, t);
        while (i < s1.size() && s1[i] == t) cum1 += psi1.rho * w1[i++];
        while (j < s2.size() && s2[j] == t) cum2 += psi2.rho * w2[j++];
        prev = t;
    }
    total += std::abs(cum1 - cum2) * exp_weight(prev, kInf);
    return total;
}

double distance_D(const MixingDistribution& psi1, const MixingDistribution& psi2) {
    return distance_D(ExtendedMixing(psi1), ExtendedMixing(psi2));
}

double distance_D_quadrature(const ExtendedMixing& psi1, const ExtendedMixing& psi2, double tol) {
    if (!(tol > 0.0)) throw std::invalid_argument("distance_D_quadrature: tol must be positive");
    // |Psi1 - Psi2| <= 1, so truncating at T leaves at most 2 exp(-T).
    double t_max = std::log(4.0 / tol);
    std::vector<double> cuts;
    for (double s : psi1.inner.support()) cuts.push_back(s);
    for (double s : psi2.inner.support()) cuts.push_back(s);
    for (double s : cuts) t_max = std::max(t_max, std::abs(s) + 1.0);
    cuts.push_back(0.0);
    cuts.push_back(-t_max);
    cuts.push_back(t_max);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    auto integrand = [&psi1, &psi2](double mu) {
        return std::abs(psi1.evaluate(mu) - psi2.evaluate(mu)) * std::exp(-std::abs(mu));
    };
    const double piece_tol = 0.25 * tol / static_cast<double>(cuts.size());
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k)
        total += quad::integrate(integrand, cuts[k], cuts[k + 1], piece_tol).value;
    return total;
}

double distance_D_quadrature(const MixingDistribution& psi1, const MixingDistribution& psi2,
                             double tol) {
    return distance_D_quadrature(ExtendedMixing(psi1), ExtendedMixing(psi2), tol);
}

MultivariateMixing::MultivariateMixing(std::vector<std::vector<double>> support,
                                       std::vector<double> weights) {
    if (support.size() != weights.size())
        throw std::invalid_argument("mv mixing: support/weights length mismatch");
    if (support.empty()) throw std::invalid_argument("mv mixing: no atoms");
    dim_ = static_cast<int>(support.front().size());
    if (dim_ < 1) throw std::invalid_argument("mv mixing: dimension must be >= 1");
    double total = 0.0;
    for (std::size_t j = 0; j < support.size(); ++j) {
        if (static_cast<int>(support[j].size()) != dim_)
            throw std::invalid_argument("mv mixing: inconsistent dimensions");
        for (double c : support[j])
            if (!std::isfinite(c)) throw std::invalid_argument("mv mixing: non-finite location");
        if (weights[j] < 0.0) throw std::invalid_argument("mv mixing: negative weight");
        total += weights[j];
    }
    if (std::abs(total - 1.0) > 1e-12)
        throw std::invalid_argument("mv mixing: weights must sum to 1");

    std::vector<std::size_t> order(support.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&support](std::size_t a, std::size_t b) {
        return support[a] < support[b];
    });
    for (std::size_t k : order) {
        if (!support_.empty() && support_.back() == support[k])
            weights_.back() += weights[k];  // identical points collapse
        else {
            support_.push_back(support[k]);
            weights_.push_back(weights[k]);
        }
    }
}

double MultivariateMixing::evaluate(const std::vector<double>& mu) const {
    if (static_cast<int>(mu.size()) != dim_)
        throw std::invalid_argument("mv mixing: evaluation point has wrong dimension");
    double v = 0.0;
    for (std::size_t j = 0; j < support_.size(); ++j) {
        bool covered = true;
        for (int l = 0; l < dim_ && covered; ++l) covered = support_[j][l] <= mu[l];
        if (covered) v += weights_[j];
    }
    return v;
}

DstarResult distance_Dstar(const MultivariateMixing& psi1, const MultivariateMixing& psi2,
                           DstarMethod method, std::int64_t mc_samples, std::uint64_t seed) {
    if (psi1.dim() != psi2.dim())
        throw std::invalid_argument("distance_Dstar: dimension mismatch");
    const int p = psi1.dim();

    if (method == DstarMethod::MonteCarlo) {
        if (mc_samples < 1) throw std::invalid_argument("distance_Dstar: mc_samples must be >= 1");
        std::mt19937_64 rng(seed);
        std::vector<double> mu(p);
        double sum = 0.0, sumsq = 0.0;
        for (std::int64_t i = 0; i < mc_samples; ++i) {
            for (int l = 0; l < p; ++l) {
                double u = uniform01(rng);
                while (u == 0.0) u = uniform01(rng);
                mu[l] = u < 0.5 ? std::log(2.0 * u) : -std::log(2.0 * (1.0 - u));
            }
            const double v = std::abs(psi1.evaluate(mu) - psi2.evaluate(mu));
            sum += v;
            sumsq += v * v;
        }
        const double n = static_cast<double>(mc_samples);
        const double mean = sum / n;
        const double var = std::max(0.0, sumsq / n - mean * mean);
        const double scale = std::pow(2.0, p);
        return {scale * mean, scale * std::sqrt(var / n)};
    }

    // Product rule: the integrand is constant on every cell of the grid
    // induced by the per-coordinate support values, and the weight factorizes.
    std::vector<std::vector<double>> cuts(p);
    for (int l = 0; l < p; ++l) {
        for (const auto& s : psi1.support()) cuts[l].push_back(s[l]);
        for (const auto& s : psi2.support()) cuts[l].push_back(s[l]);
        std::sort(cuts[l].begin(), cuts[l].end());
        cuts[l].erase(std::unique(cuts[l].begin(), cuts[l].end()), cuts[l].end());
    }

    // Cell index i_l in [0, k_l]: 0 is the left tail, i >= 1 starts at cuts[l][i-1].
    std::vector<int> idx(p, 0);
    std::vector<double> corner(p);
    double total = 0.0;
    while (true) {
        double cell_weight = 1.0;
        for (int l = 0; l < p; ++l) {
            const double lo = idx[l] == 0 ? -kInf : cuts[l][idx[l] - 1];
            const double hi = idx[l] == static_cast<int>(cuts[l].size())
                                  ? kInf
                                  : cuts[l][idx[l]];
            cell_weight *= exp_weight(lo, hi);
            corner[l] = lo;
        }
        if (cell_weight > 0.0) {
            // CDF value on the cell: atom (s, w) contributes iff s_l <= corner_l
            // for all l (a -inf corner admits nothing in that coordinate).
            auto cell_value = [&corner, p](const MultivariateMixing& psi) {
                double v = 0.0;
                for (std::size_t j = 0; j < psi.size(); ++j) {
                    bool covered = true;
                    for (int l = 0; l < p && covered; ++l)
                        covered = psi.support()[j][l] <= corner[l];
                    if (covered) v += psi.weights()[j];
                }
                return v;
            };
            total += std::abs(cell_value(psi1) - cell_value(psi2)) * cell_weight;
        }
        int l = 0;
        for (; l < p; ++l) {
            if (++idx[l] <= static_cast<int>(cuts[l].size())) break;
            idx[l] = 0;
        }
        if (l == p) break;
    }
    return {total, 0.0};
}

}  // namespace mixls
