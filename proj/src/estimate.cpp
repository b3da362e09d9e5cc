#include "mixls/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

#include "mixls/random.hpp"

namespace mixls {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kWeightFloor = 1e-10;
constexpr double kGolden = 0.6180339887498948482;

// Mutable mixture state during ascent; atoms may cross, canonicalization
// happens only on export.
struct Work {
    FamilyKind family;
    std::vector<double> mu;
    std::vector<double> alpha;
    double sigma = 1.0;
};

double work_loglik(const Work& w, const std::vector<double>& xs) {
    const std::size_t m = w.mu.size();
    const double log_sigma = std::log(w.sigma);
    std::vector<double> log_alpha(m);
    for (std::size_t j = 0; j < m; ++j) log_alpha[j] = std::log(w.alpha[j]);
    std::vector<double> per_obs(xs.size());
    std::vector<double> t(m);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double mx = kNegInf;
        for (std::size_t j = 0; j < m; ++j) {
            t[j] = log_alpha[j] + std_log_density(w.family, (xs[i] - w.mu[j]) / w.sigma) -
                   log_sigma;
            mx = std::max(mx, t[j]);
        }
        if (mx == kNegInf) return kNegInf;
        double acc = 0.0;
        for (double v : t) acc += std::exp(v - mx);
        per_obs[i] = mx + std::log(acc);
    }
    return pairwise_sum(per_obs);
}

// E-step. Returns the entry log-likelihood; fills W (n x m, row-major).
double e_step(const Work& w, const std::vector<double>& xs, std::vector<double>& W) {
    const std::size_t n = xs.size();
    const std::size_t m = w.mu.size();
    W.resize(n * m);
    const double log_sigma = std::log(w.sigma);
    std::vector<double> log_alpha(m);
    for (std::size_t j = 0; j < m; ++j) log_alpha[j] = std::log(w.alpha[j]);
    std::vector<double> per_obs(n);
    for (std::size_t i = 0; i < n; ++i) {
        double* row = W.data() + i * m;
        double mx = kNegInf;
        for (std::size_t j = 0; j < m; ++j) {
            row[j] = log_alpha[j] + std_log_density(w.family, (xs[i] - w.mu[j]) / w.sigma) -
                     log_sigma;
            mx = std::max(mx, row[j]);
        }
        if (mx == kNegInf) {
            for (std::size_t j = 0; j < m; ++j) row[j] = 1.0 / static_cast<double>(m);
            per_obs[i] = kNegInf;
            continue;
        }
        double acc = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            row[j] = std::exp(row[j] - mx);
            acc += row[j];
        }
        for (std::size_t j = 0; j < m; ++j) row[j] /= acc;
        per_obs[i] = mx + std::log(acc);
    }
    return pairwise_sum(per_obs);
}

// Maximize f on [lo, hi] starting from x0: walk a three-point bracket
// (a < c < b with f(c) >= f(a), f(b)) outward, then fixed-count
// golden-section refinement. Returns the best point ever evaluated, so the
// result never has a lower f-value than x0.
double ascend_1d(const std::function<double(double)>& f, double x0, double step, double lo,
                 double hi, int golden_iters = 40) {
    double best_x = x0;
    double best_f = f(x0);
    auto probe = [&](double x) {
        const double v = f(x);
        if (v > best_f) {
            best_f = v;
            best_x = x;
        }
        return v;
    };

    double c = x0, fc = best_f;
    double a = std::max(lo, x0 - step);
    double b = std::min(hi, x0 + step);
    double fa = a < c ? probe(a) : fc;
    double fb = b > c ? probe(b) : fc;
    if (fb > fc && fb >= fa) {
        for (int k = 0; k < 60 && fb > fc && b < hi; ++k) {
            a = c;
            c = b;
            fc = fb;
            b = std::min(hi, c + 2.0 * (c - a));
            if (b <= c) break;
            fb = probe(b);
        }
    } else if (fa > fc) {
        for (int k = 0; k < 60 && fa > fc && a > lo; ++k) {
            b = c;
            c = a;
            fc = fa;
            a = std::max(lo, c - 2.0 * (b - c));
            if (a >= c) break;
            fa = probe(a);
        }
    }
    // Golden-section on [a, b].
    double x1 = b - kGolden * (b - a);
    double x2 = a + kGolden * (b - a);
    double f1 = probe(x1);
    double f2 = probe(x2);
    for (int k = 0; k < golden_iters; ++k) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + kGolden * (b - a);
            f2 = probe(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - kGolden * (b - a);
            f1 = probe(x1);
        }
    }
    return best_x;
}

struct StepLimits {
    double sigma_lo = 0.0;
    double sigma_hi = std::numeric_limits<double>::infinity();
    double guard_lo = 0.0;  // collapse guard, separate event from user bounds
};

// One ascent iteration in place. Returns the entry log-likelihood.
double iterate_once(Work& w, const std::vector<double>& xs, const StepLimits& lim,
                    FitEvents& events) {
    const std::size_t n = xs.size();
    const std::size_t m = w.mu.size();
    std::vector<double> W;
    const double entry_ll = e_step(w, xs, W);
    if (entry_ll == kNegInf) return entry_ll;

    // Weight update; floor and renormalize degenerate components.
    std::vector<double> colsum(m, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) colsum[j] += W[i * m + j];
    bool floored = false;
    double total = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        w.alpha[j] = colsum[j] / static_cast<double>(n);
        if (w.alpha[j] < kWeightFloor) {
            w.alpha[j] = kWeightFloor;
            floored = true;
        }
        total += w.alpha[j];
    }
    if (floored) {
        events.weight_floored = true;
        for (double& aj : w.alpha) aj /= total;
    }

    const double lo = std::max(lim.sigma_lo, lim.guard_lo);
    if (w.family.tag == Family::Normal) {
        // Exact M-step: weighted means and the pooled scale.
        for (std::size_t j = 0; j < m; ++j) {
            if (colsum[j] <= 0.0) continue;
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) s += W[i * m + j] * xs[i];
            w.mu[j] = s / colsum[j];
        }
        double ss = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < m; ++j) {
                const double d = xs[i] - w.mu[j];
                ss += W[i * m + j] * d * d;
            }
        double sigma = std::sqrt(ss / static_cast<double>(n));
        if (sigma < lo) {
            sigma = lo;
            if (lo == lim.sigma_lo && lim.sigma_lo > lim.guard_lo)
                events.sigma_clamped = true;
            else
                events.sigma_guarded = true;
        }
        if (sigma > lim.sigma_hi) {
            sigma = lim.sigma_hi;
            events.sigma_clamped = true;
        }
        w.sigma = sigma;
        return entry_ll;
    }

    // Numeric families: blockwise ascent of the observed log-likelihood,
    // locations first, then the shared scale in log space.
    for (std::size_t j = 0; j < m; ++j) {
        const double step = 0.5 * w.sigma;
        Work probe_model = w;
        auto f = [&probe_model, &xs, j](double t) {
            probe_model.mu[j] = t;
            return work_loglik(probe_model, xs);
        };
        w.mu[j] = ascend_1d(f, w.mu[j], step, -std::numeric_limits<double>::infinity(),
                            std::numeric_limits<double>::infinity());
    }
    {
        const double slo = std::log(std::max(lo, 1e-300));
        const double shi = std::log(lim.sigma_hi);
        Work probe_model = w;
        auto f = [&probe_model, &xs](double s) {
            probe_model.sigma = std::exp(s);
            return work_loglik(probe_model, xs);
        };
        const double s_new = ascend_1d(f, std::log(w.sigma), 0.25, slo, shi);
        w.sigma = std::exp(s_new);
        if (s_new <= slo) {
            if (lim.sigma_lo >= lim.guard_lo && lim.sigma_lo > 0.0)
                events.sigma_clamped = true;
            else
                events.sigma_guarded = true;
        }
        if (s_new >= shi) events.sigma_clamped = true;
    }
    return entry_ll;
}

Work work_from_model(const MixtureModel& model) {
    return {model.family, model.mixing.support(), model.mixing.weights(), model.sigma};
}

MixtureModel model_from_work(const Work& w) {
    return MixtureModel(w.family, MixingDistribution(w.mu, w.alpha), w.sigma);
}

double data_sd(const std::vector<double>& xs) {
    const double n = static_cast<double>(xs.size());
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= n;
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / n);
}

double empirical_quantile(const std::vector<double>& sorted, double q) {
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto k = static_cast<std::size_t>(pos);
    if (k + 1 >= sorted.size()) return sorted.back();
    const double frac = pos - static_cast<double>(k);
    return sorted[k] + frac * (sorted[k + 1] - sorted[k]);
}

}  // namespace

void FitConfig::validate() const {
    if (order < 1) throw std::invalid_argument("fit config: order must be >= 1");
    if (restarts < 1) throw std::invalid_argument("fit config: restarts must be >= 1");
    if (max_iter < 1) throw std::invalid_argument("fit config: max_iter must be >= 1");
    if (!(ll_tol > 0.0)) throw std::invalid_argument("fit config: ll_tol must be positive");
    if (sigma_bounds) {
        const auto [lo, hi] = *sigma_bounds;
        if (!(lo > 0.0 && lo < hi))
            throw std::invalid_argument("fit config: need 0 < sigma_lo < sigma_hi");
    }
}

std::vector<double> responsibilities(const MixtureModel& model, const Dataset& data) {
    Work w = work_from_model(model);
    std::vector<double> W;
    e_step(w, data.observations, W);
    return W;
}

MixtureModel em_step(const MixtureModel& model, const Dataset& data, bool* improved) {
    if (data.size() == 0) throw std::invalid_argument("em_step: empty dataset");
    Work w = work_from_model(model);
    FitEvents ev;
    StepLimits lim;
    const double before = iterate_once(w, data.observations, lim, ev);
    const double after = work_loglik(w, data.observations);
    if (!(after >= before - 1e-10)) {
        if (improved) *improved = false;
        return model;
    }
    if (improved) *improved = after > before;
    return model_from_work(w);
}

FitResult fit(FamilyKind family, const Dataset& data, const FitConfig& config) {
    config.validate();
    const auto& xs = data.observations;
    if (static_cast<int>(xs.size()) <= config.order)
        throw std::invalid_argument("fit: need n >= m + 1 observations");
    for (double x : xs)
        if (!std::isfinite(x)) throw std::invalid_argument("fit: non-finite observation");

    std::vector<double> sorted(xs);
    std::sort(sorted.begin(), sorted.end());
    const double sd = data_sd(xs);
    const double range = sorted.back() - sorted.front();

    StepLimits lim;
    lim.guard_lo = 1e-8 * range;
    if (config.sigma_bounds) {
        lim.sigma_lo = config.sigma_bounds->first;
        lim.sigma_hi = config.sigma_bounds->second;
    }

    const int m = config.order;
    std::optional<FitResult> best;
    for (int r = 0; r < config.restarts; ++r) {
        std::mt19937_64 rng(derive_seed(config.seed, 0x5eedf17ULL, static_cast<std::uint64_t>(r)));
        Work w;
        w.family = family;
        w.mu.resize(m);
        w.alpha.assign(m, 1.0 / static_cast<double>(m));
        for (int j = 0; j < m; ++j) {
            const double q = empirical_quantile(sorted, (j + 0.5) / static_cast<double>(m));
            w.mu[j] = q + (uniform01(rng) - 0.5) * sd;
        }
        const double factor = std::exp(std::log(0.3) * (1.0 - uniform01(rng)));
        w.sigma = std::max(sd, 1e-300) * factor;
        w.sigma = std::clamp(w.sigma, std::max(lim.guard_lo, lim.sigma_lo > 0 ? lim.sigma_lo : 0.0),
                             lim.sigma_hi);
        if (!(w.sigma > 0.0)) w.sigma = 1.0;

        FitResult res;
        res.restart_index = r;
        bool failed = false;
        double last_ll = kNegInf;
        for (int it = 0; it < config.max_iter; ++it) {
            const double entry_ll = iterate_once(w, xs, lim, res.events);
            if (!std::isfinite(entry_ll)) {
                failed = true;
                break;
            }
            res.trace.push_back(entry_ll);
            ++res.iterations;
            if (it > 0 && entry_ll - last_ll < config.ll_tol) {
                res.converged = true;
                break;
            }
            last_ll = entry_ll;
        }
        if (failed) continue;
        const double final_ll = work_loglik(w, xs);
        if (!std::isfinite(final_ll)) continue;
        res.trace.push_back(final_ll);
        res.loglik = final_ll;
        res.mixing = MixingDistribution(w.mu, w.alpha);
        res.sigma = w.sigma;
        if (!best || res.loglik > best->loglik + 1e-12) best = std::move(res);
    }
    if (!best) throw AllChainsFailed("fit: every restart chain failed");
    return *best;
}

// ---------------------------------------------------------------------------

namespace {

struct MvWork {
    DensityGenerator gen;
    std::vector<Eigen::VectorXd> mu;
    std::vector<double> alpha;
    Eigen::MatrixXd Sigma;
};

double mv_e_step(const MvWork& w, const std::vector<Eigen::VectorXd>& xs, std::vector<double>& W,
                 bool fill) {
    const std::size_t n = xs.size();
    const std::size_t m = w.mu.size();
    if (fill) W.resize(n * m);
    Eigen::LLT<Eigen::MatrixXd> llt(w.Sigma);
    if (llt.info() != Eigen::Success) return kNegInf;
    double hld = 0.0;
    for (Eigen::Index i = 0; i < w.Sigma.rows(); ++i) hld += std::log(llt.matrixLLT()(i, i));
    std::vector<double> log_alpha(m);
    for (std::size_t j = 0; j < m; ++j) log_alpha[j] = std::log(w.alpha[j]);
    std::vector<double> per_obs(n);
    std::vector<double> t(m);
    for (std::size_t i = 0; i < n; ++i) {
        double mx = kNegInf;
        for (std::size_t j = 0; j < m; ++j) {
            const Eigen::VectorXd y = llt.matrixL().solve(xs[i] - w.mu[j]);
            t[j] = log_alpha[j] - hld + generator_log_value(w.gen, y.squaredNorm());
            mx = std::max(mx, t[j]);
        }
        if (mx == kNegInf) return kNegInf;
        double acc = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            t[j] = std::exp(t[j] - mx);
            acc += t[j];
        }
        per_obs[i] = mx + std::log(acc);
        if (fill)
            for (std::size_t j = 0; j < m; ++j) W[i * m + j] = t[j] / acc;
    }
    return pairwise_sum(per_obs);
}

}  // namespace

MvFitResult mv_fit(const DensityGenerator& generator, const MvDataset& data,
                   const FitConfig& config) {
    config.validate();
    if (generator.kind != GeneratorKind::MultivariateNormal)
        throw std::invalid_argument("mv_fit: unsupported generator");
    const int p = generator.dim;
    const auto& xs = data.observations;
    const int m = config.order;
    if (static_cast<int>(xs.size()) <= p * m)
        throw std::invalid_argument("mv_fit: need n >= p*m + 1 observations");

    const std::size_t n = xs.size();
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(p);
    for (const auto& x : xs) mean += x;
    mean /= static_cast<double>(n);
    Eigen::MatrixXd pooled = Eigen::MatrixXd::Zero(p, p);
    for (const auto& x : xs) pooled += (x - mean) * (x - mean).transpose();
    pooled /= static_cast<double>(n);

    std::optional<MvFitResult> best;
    for (int r = 0; r < config.restarts; ++r) {
        std::mt19937_64 rng(derive_seed(config.seed, 0x3eedf17ULL, static_cast<std::uint64_t>(r)));
        MvWork w;
        w.gen = generator;
        w.alpha.assign(m, 1.0 / static_cast<double>(m));
        // Distinct data points as starting locations.
        std::vector<std::size_t> picks;
        while (static_cast<int>(picks.size()) < m) {
            const auto k = static_cast<std::size_t>(rng() % n);
            if (std::find(picks.begin(), picks.end(), k) == picks.end()) picks.push_back(k);
        }
        for (std::size_t k : picks) w.mu.push_back(xs[k]);
        const double factor = std::exp(std::log(0.3) * (1.0 - uniform01(rng)));
        w.Sigma = pooled * factor;

        MvFitResult res;
        res.restart_index = r;
        std::vector<double> W;
        bool failed = false;
        double last_ll = kNegInf;
        for (int it = 0; it < config.max_iter; ++it) {
            const double entry_ll = mv_e_step(w, xs, W, true);
            if (!std::isfinite(entry_ll)) {
                failed = true;
                break;
            }
            res.trace.push_back(entry_ll);
            ++res.iterations;
            if (it > 0 && entry_ll - last_ll < config.ll_tol) {
                res.converged = true;
                break;
            }
            last_ll = entry_ll;

            std::vector<double> colsum(m, 0.0);
            for (std::size_t i = 0; i < n; ++i)
                for (int j = 0; j < m; ++j) colsum[j] += W[i * m + j];
            double total = 0.0;
            bool floored = false;
            for (int j = 0; j < m; ++j) {
                w.alpha[j] = colsum[j] / static_cast<double>(n);
                if (w.alpha[j] < kWeightFloor) {
                    w.alpha[j] = kWeightFloor;
                    floored = true;
                }
                total += w.alpha[j];
            }
            if (floored) {
                res.events.weight_floored = true;
                for (double& aj : w.alpha) aj /= total;
            }
            for (int j = 0; j < m; ++j) {
                if (colsum[j] <= 0.0) continue;
                Eigen::VectorXd s = Eigen::VectorXd::Zero(p);
                for (std::size_t i = 0; i < n; ++i) s += W[i * m + j] * xs[i];
                w.mu[j] = s / colsum[j];
            }
            Eigen::MatrixXd S = Eigen::MatrixXd::Zero(p, p);
            for (std::size_t i = 0; i < n; ++i)
                for (int j = 0; j < m; ++j) {
                    const Eigen::VectorXd d = xs[i] - w.mu[j];
                    S += W[i * m + j] * (d * d.transpose());
                }
            S /= static_cast<double>(n);
            S = 0.5 * (S + S.transpose()).eval();
            // Eigenvalue floor keeps the shared covariance invertible.
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
            const double floor_val = 1e-10 * S.trace() / static_cast<double>(p);
            Eigen::VectorXd ev = es.eigenvalues();
            bool bumped = false;
            for (int l = 0; l < p; ++l)
                if (ev[l] < floor_val) {
                    ev[l] = floor_val;
                    bumped = true;
                }
            if (bumped) {
                res.events.sigma_floored = true;
                S = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
            }
            w.Sigma = S;
        }
        if (failed) continue;
        const double final_ll = mv_e_step(w, xs, W, false);
        if (!std::isfinite(final_ll)) continue;
        res.trace.push_back(final_ll);
        res.loglik = final_ll;
        std::vector<std::vector<double>> support;
        for (const auto& v : w.mu)
            support.emplace_back(v.data(), v.data() + v.size());
        res.mixing = MultivariateMixing(support, w.alpha);
        res.Sigma = w.Sigma;
        if (!best || res.loglik > best->loglik + 1e-12) best = std::move(res);
    }
    if (!best) throw AllChainsFailed("mv_fit: every restart chain failed");
    return *best;
}

}  // namespace mixls
