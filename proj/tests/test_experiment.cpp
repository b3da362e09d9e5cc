#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <nlohmann/json.hpp>

#include "mixls/experiment.hpp"
#include "mixls/io.hpp"

using namespace mixls;

namespace {

ExperimentPlan small_plan() {
    ExperimentPlan plan;
    plan.true_model =
        MixtureModel(FamilyKind::normal(), MixingDistribution({-2.0, 2.0}, {0.5, 0.5}), 1.0);
    plan.fit_order = 2;
    plan.n_grid = {60, 120};
    plan.replications = 3;
    plan.base_seed = 42;
    plan.fit_config.restarts = 3;
    plan.fit_config.max_iter = 200;
    return plan;
}

}  // namespace

TEST_CASE("plan validation") {
    ExperimentPlan p = small_plan();
    p.n_grid = {100, 100};
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p.n_grid = {};
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p.n_grid = {100};
    p.replications = 0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("records are deterministic and ordered") {
    const ExperimentPlan plan = small_plan();
    const auto r1 = run_experiment(plan, 1);
    const auto r2 = run_experiment(plan, 2);
    CHECK(r1.size() == 6);
    CHECK(records_equal(r1, r2));
    for (std::size_t k = 0; k < r1.size(); ++k) {
        CHECK(r1[k].n == (k < 3 ? 60 : 120));
        CHECK(r1[k].rep == static_cast<int>(k % 3));
        CHECK(r1[k].D_value >= 0.0);
        CHECK(r1[k].D_value <= 4.0);
        CHECK(r1[k].loglik_gap >= -1e-8);
        CHECK_FALSE(r1[k].failed);
    }
    // Seeds depend on (base, n, rep) only.
    CHECK(r1[0].seed != r1[1].seed);
    CHECK(r1[0].seed != r1[3].seed);
}

TEST_CASE("summary") {
    const auto records = run_experiment(small_plan(), 2);
    const auto rows = summarize(records);
    CHECK(rows.size() == 2);
    CHECK(rows[0].n == 60);
    CHECK(rows[1].n == 120);
    for (const auto& row : rows) {
        CHECK(row.p10_D <= row.median_D);
        CHECK(row.median_D <= row.p90_D);
        CHECK(row.convergence_rate > 0.0);
        CHECK(row.convergence_rate <= 1.0);
    }

    // Single record: summary equals the record.
    std::vector<ExperimentRecord> one(records.begin(), records.begin() + 1);
    const auto single = summarize(one);
    CHECK(single.size() == 1);
    CHECK(single[0].median_D == one[0].D_value);
    CHECK(single[0].p10_D == one[0].D_value);
    CHECK(single[0].p90_D == one[0].D_value);
    CHECK(single[0].median_sigma_err == one[0].sigma_err);

    // Constant synthetic sample: all percentiles coincide.
    std::vector<ExperimentRecord> same(50, one[0]);
    const auto srow = summarize(same);
    CHECK(srow[0].median_D == one[0].D_value);
    CHECK(srow[0].p10_D == one[0].D_value);
    CHECK(srow[0].p90_D == one[0].D_value);
}

TEST_CASE("percentiles interpolate linearly") {
    CHECK(percentile({1.0, 2.0, 3.0, 4.0}, 0.5) == doctest::Approx(2.5));
    CHECK(percentile({5.0}, 0.1) == 5.0);
    CHECK(percentile({1.0, 3.0}, 0.25) == doctest::Approx(1.5));
    CHECK_THROWS_AS(percentile({}, 0.5), std::invalid_argument);
}

TEST_CASE("csv persistence round trip") {
    const auto records = run_experiment(small_plan(), 2);
    const std::string csv = io::records_to_csv(records);
    CHECK(csv.rfind("n,rep,seed,D,sigma_err,loglik_gap,converged,wall_time\n", 0) == 0);
    const auto back = io::records_from_csv(csv);
    CHECK(records_equal(records, back));
    for (std::size_t k = 0; k < records.size(); ++k)
        CHECK(back[k].wall_time == records[k].wall_time);  // full float precision
    CHECK(io::records_to_csv(back) == csv);

    // Empty list: header only.
    CHECK(io::records_to_csv({}) == "n,rep,seed,D,sigma_err,loglik_gap,converged,wall_time\n");
    CHECK(io::records_from_csv(io::records_to_csv({})).empty());
}

TEST_CASE("json persistence round trip") {
    const auto records = run_experiment(small_plan(), 2);
    const auto j = io::records_to_json(records);
    const auto back = io::records_from_json(nlohmann::json::parse(j.dump()));
    CHECK(records_equal(records, back));
    for (std::size_t k = 0; k < records.size(); ++k)
        CHECK(back[k].wall_time == records[k].wall_time);
}

TEST_CASE("failed records are captured, not fatal") {
    ExperimentPlan plan = small_plan();
    plan.n_grid = {2};  // n < m + 1 for every replication
    plan.replications = 2;
    const auto records = run_experiment(plan, 1);
    CHECK(records.size() == 2);
    for (const auto& r : records) {
        CHECK(r.failed);
        CHECK_FALSE(r.error.empty());
        CHECK(std::isnan(r.D_value));
    }
    // NaN round-trips through CSV and JSON.
    const auto back = io::records_from_csv(io::records_to_csv(records));
    CHECK(records_equal(records, back));
    const auto jback = io::records_from_json(io::records_to_json(records));
    CHECK(records_equal(records, jback));

    const auto rows = summarize(records);
    CHECK(rows[0].convergence_rate == 0.0);
    CHECK(std::isnan(rows[0].median_D));
}

TEST_CASE("summary csv schema") {
    const auto rows = summarize(run_experiment(small_plan(), 2));
    const std::string csv = io::summary_to_csv(rows);
    CHECK(csv.rfind("n,median_D,p10_D,p90_D,median_sigma_err,p10_sigma_err,p90_sigma_err,"
                    "convergence_rate,mean_wall_time\n",
                    0) == 0);
    // One line per n plus the header.
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
}

TEST_CASE("multivariate plan smoke run") {
    ExperimentPlan plan;
    const DensityGenerator gen{GeneratorKind::MultivariateNormal, 2};
    plan.true_model = MultivariateMixtureModel(
        gen, MultivariateMixing({{-3.0, -3.0}, {3.0, 3.0}}, {0.5, 0.5}),
        Eigen::MatrixXd::Identity(2, 2));
    plan.fit_order = 2;
    plan.n_grid = {80};
    plan.replications = 2;
    plan.base_seed = 7;
    plan.fit_config.restarts = 3;
    const auto records = run_experiment(plan, 2);
    CHECK(records.size() == 2);
    for (const auto& r : records) {
        CHECK_FALSE(r.failed);
        CHECK(r.D_value >= 0.0);
        CHECK(r.loglik_gap >= -1e-8);
    }
}
