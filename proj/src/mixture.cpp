#include "mixls/mixture.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "mixls/random.hpp"

namespace mixls {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

MixtureModel::MixtureModel(FamilyKind fam, MixingDistribution mix, double s)
    : family(fam), mixing(std::move(mix)), sigma(s) {
    if (!(sigma > 0.0)) throw std::invalid_argument("mixture model: sigma must be positive");
    if (mixing.size() == 0) throw std::invalid_argument("mixture model: empty mixing");
}

double pairwise_sum(const std::vector<double>& terms) {
    // Fixed-order recursive halving; result does not depend on who computed
    // the terms.
    struct Rec {
        static double run(const double* v, std::size_t n) {
            if (n <= 8) {
                double s = 0.0;
                for (std::size_t i = 0; i < n; ++i) s += v[i];
                return s;
            }
            const std::size_t h = n / 2;
            return run(v, h) + run(v + h, n - h);
        }
    };
    return terms.empty() ? 0.0 : Rec::run(terms.data(), terms.size());
}

double mixture_log_density(const MixtureModel& model, double x) {
    const auto& mus = model.mixing.support();
    const auto& ws = model.mixing.weights();
    double max_term = kNegInf;
    thread_local std::vector<double> terms;
    terms.resize(mus.size());
    for (std::size_t j = 0; j < mus.size(); ++j) {
        terms[j] = std::log(ws[j]) + log_density(model.family, x, mus[j], model.sigma);
        max_term = std::max(max_term, terms[j]);
    }
    if (max_term == kNegInf) return kNegInf;
    double acc = 0.0;
    for (double t : terms) acc += std::exp(t - max_term);
    return max_term + std::log(acc);
}

double mixture_density(const MixtureModel& model, double x) {
    const auto& mus = model.mixing.support();
    const auto& ws = model.mixing.weights();
    double g = 0.0;
    for (std::size_t j = 0; j < mus.size(); ++j)
        g += ws[j] * density(model.family, x, mus[j], model.sigma);
    return g;
}

LogLik log_likelihood(const MixtureModel& model, const Dataset& data) {
    if (data.size() == 0) throw std::invalid_argument("log_likelihood: empty dataset");
    LogLik r;
    std::vector<double> terms(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        terms[i] = mixture_log_density(model, data.observations[i]);
        if (terms[i] == kNegInf) ++r.underflow_count;
    }
    r.value = r.underflow_count > 0 ? kNegInf : pairwise_sum(terms);
    return r;
}

Dataset sample_mixture(const MixtureModel& model, std::int64_t n, std::mt19937_64& rng) {
    if (n < 1) throw std::invalid_argument("sample_mixture: n must be >= 1");
    const auto& mus = model.mixing.support();
    const auto& ws = model.mixing.weights();
    Dataset d;
    d.observations.reserve(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) {
        const double u = uniform01(rng);
        double acc = 0.0;
        std::size_t j = 0;
        for (; j + 1 < ws.size(); ++j) {
            acc += ws[j];
            if (u < acc) break;
        }
        d.observations.push_back(sample(model.family, mus[j], model.sigma, rng));
    }
    return d;
}

Dataset sample_mixture(const MixtureModel& model, std::int64_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    Dataset d = sample_mixture(model, n, rng);
    d.seed = seed;
    return d;
}

std::pair<double, double> affine_transform_loglik_identity(const MixtureModel& model,
                                                           const Dataset& data, double a,
                                                           double c) {
    if (!(a > 0.0))
        throw std::invalid_argument("affine_transform_loglik_identity: a must be positive");
    const double base = log_likelihood(model, data).value;

    std::vector<double> moved_support;
    moved_support.reserve(model.mixing.size());
    for (double mu : model.mixing.support()) moved_support.push_back(a * mu + c);
    MixtureModel moved(model.family,
                       MixingDistribution(std::move(moved_support), model.mixing.weights()),
                       a * model.sigma);
    Dataset moved_data;
    moved_data.observations.reserve(data.size());
    for (double x : data.observations) moved_data.observations.push_back(a * x + c);

    const double transformed = log_likelihood(moved, moved_data).value +
                               static_cast<double>(data.size()) * std::log(a);
    return {base, transformed};
}

// ---------------------------------------------------------------------------

MultivariateMixtureModel::MultivariateMixtureModel(DensityGenerator gen, MultivariateMixing mix,
                                                   Eigen::MatrixXd S)
    : generator(gen), mixing(std::move(mix)), Sigma(std::move(S)) {
    if (mixing.dim() != generator.dim || Sigma.rows() != generator.dim ||
        Sigma.cols() != generator.dim)
        throw std::invalid_argument("mv mixture model: inconsistent dimensions");
    spd_factor(Sigma);  // throws if not SPD
}

Eigen::LLT<Eigen::MatrixXd> spd_factor(const Eigen::MatrixXd& Sigma) {
    if (Sigma.rows() != Sigma.cols())
        throw std::invalid_argument("spd_factor: matrix must be square");
    const double scale = std::max(1.0, Sigma.cwiseAbs().maxCoeff());
    if ((Sigma - Sigma.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
        throw std::domain_error("spd_factor: matrix is not symmetric");
    Eigen::LLT<Eigen::MatrixXd> llt(Sigma);
    if (llt.info() != Eigen::Success)
        throw std::domain_error("spd_factor: matrix is not positive definite");
    return llt;
}

namespace {

double mv_log_density_factored(const MultivariateMixtureModel& model,
                               const Eigen::LLT<Eigen::MatrixXd>& llt, double half_log_det,
                               const Eigen::VectorXd& x) {
    const auto& atoms = model.mixing.support();
    const auto& ws = model.mixing.weights();
    const int p = model.generator.dim;
    double max_term = kNegInf;
    thread_local std::vector<double> terms;
    terms.resize(atoms.size());
    Eigen::VectorXd diff(p);
    for (std::size_t j = 0; j < atoms.size(); ++j) {
        for (int l = 0; l < p; ++l) diff[l] = x[l] - atoms[j][l];
        // Quadratic form via triangular solve: q = || L^-1 (x - mu) ||^2.
        const Eigen::VectorXd y = llt.matrixL().solve(diff);
        const double q = y.squaredNorm();
        terms[j] = std::log(ws[j]) - half_log_det + generator_log_value(model.generator, q);
        max_term = std::max(max_term, terms[j]);
    }
    if (max_term == kNegInf) return kNegInf;
    double acc = 0.0;
    for (double t : terms) acc += std::exp(t - max_term);
    return max_term + std::log(acc);
}

double half_log_det(const Eigen::LLT<Eigen::MatrixXd>& llt) {
    double s = 0.0;
    const auto& L = llt.matrixLLT();
    for (Eigen::Index i = 0; i < L.rows(); ++i) s += std::log(L(i, i));
    return s;
}

}  // namespace

double mv_log_density(const MultivariateMixtureModel& model, const Eigen::VectorXd& x) {
    if (x.size() != model.generator.dim)
        throw std::invalid_argument("mv_log_density: wrong dimension");
    const auto llt = spd_factor(model.Sigma);
    return mv_log_density_factored(model, llt, half_log_det(llt), x);
}

double mv_density(const MultivariateMixtureModel& model, const Eigen::VectorXd& x) {
    return std::exp(mv_log_density(model, x));
}

LogLik mv_log_likelihood(const MultivariateMixtureModel& model, const MvDataset& data) {
    if (data.size() == 0) throw std::invalid_argument("mv_log_likelihood: empty dataset");
    const auto llt = spd_factor(model.Sigma);
    const double hld = half_log_det(llt);
    LogLik r;
    std::vector<double> terms(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        terms[i] = mv_log_density_factored(model, llt, hld, data.observations[i]);
        if (terms[i] == kNegInf) ++r.underflow_count;
    }
    r.value = r.underflow_count > 0 ? kNegInf : pairwise_sum(terms);
    return r;
}

MvDataset mv_sample(const MultivariateMixtureModel& model, std::int64_t n, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("mv_sample: n must be >= 1");
    const int p = model.generator.dim;
    const auto llt = spd_factor(model.Sigma);
    const Eigen::MatrixXd L = llt.matrixL();
    const auto& atoms = model.mixing.support();
    const auto& ws = model.mixing.weights();
    std::mt19937_64 rng(seed);
    MvDataset d;
    d.dim = p;
    d.seed = seed;
    d.observations.reserve(static_cast<std::size_t>(n));
    Eigen::VectorXd z(p);
    for (std::int64_t i = 0; i < n; ++i) {
        const double u = uniform01(rng);
        double acc = 0.0;
        std::size_t j = 0;
        for (; j + 1 < ws.size(); ++j) {
            acc += ws[j];
            if (u < acc) break;
        }
        for (int l = 0; l < p; ++l) z[l] = standard_normal(rng);
        Eigen::VectorXd x = L * z;
        for (int l = 0; l < p; ++l) x[l] += atoms[j][l];
        d.observations.push_back(std::move(x));
    }
    return d;
}

}  // namespace mixls
