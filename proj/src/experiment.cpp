#include "mixls/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "mixls/mixing.hpp"
#include "mixls/random.hpp"

namespace mixls {

void ExperimentPlan::validate() const {
    if (n_grid.empty()) throw std::invalid_argument("experiment plan: empty n grid");
    for (std::size_t k = 0; k < n_grid.size(); ++k) {
        if (n_grid[k] < 1) throw std::invalid_argument("experiment plan: n must be >= 1");
        if (k > 0 && n_grid[k] <= n_grid[k - 1])
            throw std::invalid_argument("experiment plan: n grid must be strictly increasing");
    }
    if (replications < 1) throw std::invalid_argument("experiment plan: replications must be >= 1");
    if (fit_order < 1) throw std::invalid_argument("experiment plan: fit order must be >= 1");
    fit_config.validate();
}

bool records_equal(const ExperimentRecord& a, const ExperimentRecord& b) {
    auto same = [](double x, double y) {
        return (std::isnan(x) && std::isnan(y)) || x == y;
    };
    return a.n == b.n && a.rep == b.rep && a.seed == b.seed && same(a.D_value, b.D_value) &&
           same(a.sigma_err, b.sigma_err) && same(a.loglik_gap, b.loglik_gap) &&
           a.converged == b.converged && a.failed == b.failed && a.error == b.error;
}

bool records_equal(const std::vector<ExperimentRecord>& a,
                   const std::vector<ExperimentRecord>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!records_equal(a[i], b[i])) return false;
    return true;
}

namespace {

ExperimentRecord run_one(const ExperimentPlan& plan, int n, int rep) {
    ExperimentRecord rec;
    rec.n = n;
    rec.rep = rep;
    rec.seed = derive_seed(plan.base_seed, static_cast<std::uint64_t>(n),
                           static_cast<std::uint64_t>(rep));
    const auto t0 = std::chrono::steady_clock::now();
    try {
        FitConfig cfg = plan.fit_config;
        cfg.order = plan.fit_order;
        cfg.seed = rec.seed;
        if (!plan.multivariate()) {
            const auto& truth = std::get<MixtureModel>(plan.true_model);
            const Dataset data = sample_mixture(truth, n, rec.seed);
            const FitResult fr = fit(truth.family, data, cfg);
            rec.D_value = distance_D(fr.mixing, truth.mixing);
            rec.sigma_err = std::abs(fr.sigma - truth.sigma);
            rec.loglik_gap = fr.loglik - log_likelihood(truth, data).value;
            rec.converged = fr.converged;
        } else {
            const auto& truth = std::get<MultivariateMixtureModel>(plan.true_model);
            const MvDataset data = mv_sample(truth, n, rec.seed);
            const MvFitResult fr = mv_fit(truth.generator, data, cfg);
            rec.D_value = distance_Dstar(fr.mixing, truth.mixing).value;
            rec.sigma_err = (fr.Sigma - truth.Sigma).norm();
            rec.loglik_gap = fr.loglik - mv_log_likelihood(truth, data).value;
            rec.converged = fr.converged;
        }
    } catch (const std::exception& e) {
        rec.failed = true;
        rec.converged = false;
        rec.error = e.what();
        rec.D_value = std::nan("");
        rec.sigma_err = std::nan("");
        rec.loglik_gap = std::nan("");
    }
    rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rec;
}

}  // namespace

std::vector<ExperimentRecord> run_experiment(const ExperimentPlan& plan, int jobs) {
    plan.validate();
    if (jobs < 1) jobs = 1;
    struct Item {
        int n, rep;
    };
    std::vector<Item> items;
    for (int n : plan.n_grid)
        for (int r = 0; r < plan.replications; ++r) items.push_back({n, r});
    std::vector<ExperimentRecord> records(items.size());

    if (jobs == 1) {
        for (std::size_t k = 0; k < items.size(); ++k)
            records[k] = run_one(plan, items[k].n, items[k].rep);
        return records;
    }
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        while (true) {
            const std::size_t k = next.fetch_add(1);
            if (k >= items.size()) break;
            records[k] = run_one(plan, items[k].n, items[k].rep);
        }
    };
    std::vector<std::thread> pool;
    const int nthreads = std::min<int>(jobs, static_cast<int>(items.size()));
    pool.reserve(nthreads);
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    return records;
}

double percentile(std::vector<double> values, double q) {
    if (values.empty()) throw std::invalid_argument("percentile: empty sample");
    std::sort(values.begin(), values.end());
    const double pos = std::clamp(q, 0.0, 1.0) * static_cast<double>(values.size() - 1);
    const auto k = static_cast<std::size_t>(pos);
    if (k + 1 >= values.size()) return values.back();
    const double frac = pos - static_cast<double>(k);
    return values[k] + frac * (values[k + 1] - values[k]);
}

std::vector<SummaryRow> summarize(const std::vector<ExperimentRecord>& records) {
    if (records.empty()) throw std::invalid_argument("summarize: no records");
    std::vector<int> ns;
    for (const auto& r : records)
        if (std::find(ns.begin(), ns.end(), r.n) == ns.end()) ns.push_back(r.n);
    std::sort(ns.begin(), ns.end());

    std::vector<SummaryRow> rows;
    for (int n : ns) {
        SummaryRow row;
        row.n = n;
        std::vector<double> d, s;
        int total = 0, conv = 0;
        double wall = 0.0;
        for (const auto& r : records) {
            if (r.n != n) continue;
            ++total;
            wall += r.wall_time;
            if (r.converged) ++conv;
            if (!r.failed) {
                d.push_back(r.D_value);
                s.push_back(r.sigma_err);
            }
        }
        if (!d.empty()) {
            row.median_D = percentile(d, 0.5);
            row.p10_D = percentile(d, 0.1);
            row.p90_D = percentile(d, 0.9);
            row.median_sigma_err = percentile(s, 0.5);
            row.p10_sigma_err = percentile(s, 0.1);
            row.p90_sigma_err = percentile(s, 0.9);
        } else {
            row.median_D = row.p10_D = row.p90_D = std::nan("");
            row.median_sigma_err = row.p10_sigma_err = row.p90_sigma_err = std::nan("");
        }
        row.convergence_rate = static_cast<double>(conv) / static_cast<double>(total);
        row.mean_wall_time = wall / static_cast<double>(total);
        rows.push_back(row);
    }
    return rows;
}

}  // namespace mixls
