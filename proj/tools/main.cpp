#include <CLI11.hpp>
#include <cstdio>
#include <iostream>
#include <nlohmann/json.hpp>
#include <string>

#include "mixls/certify.hpp"
#include "mixls/estimate.hpp"
#include "mixls/experiment.hpp"
#include "mixls/io.hpp"

namespace {

using nlohmann::json;

constexpr const char* kVersion = "mixls 1.0.0";

mixls::FamilyKind parse_family(const std::string& name, int nu) {
    if (name == "normal") return mixls::FamilyKind::normal();
    if (name == "logistic") return mixls::FamilyKind::logistic();
    if (name == "gumbel") return mixls::FamilyKind::gumbel();
    if (name == "student_t") return mixls::FamilyKind::student_t(nu);
    throw std::runtime_error("unknown family '" + name + "'");
}

json load_json(const std::string& path) {
    return json::parse(mixls::io::read_text(path));
}

void emit(const std::string& out_path, const std::string& content) {
    if (out_path.empty())
        std::cout << content << "\n";
    else
        mixls::io::write_text(out_path, content);
}

int run_sample(const std::string& model_path, std::int64_t n, std::uint64_t seed,
               const std::string& out_path) {
    const json mj = load_json(model_path);
    if (mixls::io::is_multivariate_model_json(mj)) {
        const auto model = mixls::io::mv_model_from_json(mj);
        mixls::io::write_mv_dataset_csv(out_path, mixls::mv_sample(model, n, seed));
    } else {
        const auto model = mixls::io::model_from_json(mj);
        mixls::io::write_dataset_csv(out_path, mixls::sample_mixture(model, n, seed));
    }
    return 0;
}

int run_fit(const std::string& family_name, int nu, int order, const std::string& data_path,
            const mixls::FitConfig& base_cfg, double sigma_lo, double sigma_hi,
            const std::string& out_path) {
    const auto family = parse_family(family_name, nu);
    const auto data = mixls::io::read_dataset_csv(data_path);
    mixls::FitConfig cfg = base_cfg;
    cfg.order = order;
    if (sigma_lo > 0.0 || sigma_hi > 0.0) {
        if (!(sigma_lo > 0.0 && sigma_hi > sigma_lo))
            throw std::runtime_error("need 0 < --sigma-lo < --sigma-hi");
        cfg.sigma_bounds = {sigma_lo, sigma_hi};
    }
    const auto result = mixls::fit(family, data, cfg);
    emit(out_path, mixls::io::fit_result_to_json(family, result).dump(2));
    return 0;
}

int run_distance(const std::string& path1, const std::string& path2, const std::string& method,
                 std::int64_t mc_samples, std::uint64_t seed, bool quiet) {
    const auto m1 = mixls::io::any_mixing_from_json(load_json(path1));
    const auto m2 = mixls::io::any_mixing_from_json(load_json(path2));
    double value = 0.0;
    if (std::holds_alternative<mixls::ExtendedMixing>(m1) &&
        std::holds_alternative<mixls::ExtendedMixing>(m2)) {
        value = mixls::distance_D(std::get<mixls::ExtendedMixing>(m1),
                                  std::get<mixls::ExtendedMixing>(m2));
    } else if (std::holds_alternative<mixls::MultivariateMixing>(m1) &&
               std::holds_alternative<mixls::MultivariateMixing>(m2)) {
        const auto& a = std::get<mixls::MultivariateMixing>(m1);
        const auto& b = std::get<mixls::MultivariateMixing>(m2);
        mixls::DstarMethod dm = mixls::DstarMethod::ProductQuadrature;
        if (method == "mc" || (method == "auto" && a.dim() > 3))
            dm = mixls::DstarMethod::MonteCarlo;
        const auto r = mixls::distance_Dstar(a, b, dm, mc_samples, seed);
        if (dm == mixls::DstarMethod::MonteCarlo && !quiet)
            std::cerr << "monte-carlo standard error: " << mixls::io::format_double(r.std_error)
                      << "\n";
        value = r.value;
    } else {
        throw std::runtime_error("distance: cannot mix univariate and multivariate inputs");
    }
    std::cout << mixls::io::format_double(value) << "\n";
    return 0;
}

int run_certify(const std::string& model_path, int order, std::int64_t mc_samples,
                std::uint64_t seed, const std::string& out_path) {
    const json mj = load_json(model_path);
    mixls::CertifyReport report;
    if (mixls::io::is_multivariate_model_json(mj)) {
        const auto model = mixls::io::mv_model_from_json(mj);
        if (order <= 0) order = static_cast<int>(model.mixing.size());
        report = mixls::certify_model(model, order, mc_samples, seed);
    } else {
        const auto model = mixls::io::model_from_json(mj);
        if (order <= 0) order = static_cast<int>(model.mixing.size());
        report = mixls::certify_model(model, order);
    }
    emit(out_path, mixls::io::certify_report_to_json(report).dump(2));
    return report.all_pass() ? 0 : 1;
}

int run_experiment(const std::string& plan_path, const std::string& records_path,
                   const std::string& summary_path, const std::string& format, int jobs) {
    const auto plan = mixls::io::plan_from_json(load_json(plan_path));
    const auto records = mixls::run_experiment(plan, jobs);
    if (!records_path.empty()) {
        if (format == "csv")
            mixls::io::write_text(records_path, mixls::io::records_to_csv(records));
        else
            mixls::io::write_text(records_path, mixls::io::records_to_json(records).dump(2));
    }
    if (!summary_path.empty()) {
        const auto rows = mixls::summarize(records);
        if (format == "csv")
            mixls::io::write_text(summary_path, mixls::io::summary_to_csv(rows));
        else
            mixls::io::write_text(summary_path, mixls::io::summary_to_json(rows).dump(2));
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Finite mixtures of location-scale families with a shared structural scale"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);
    app.fallthrough();

    std::uint64_t seed = 0;
    bool quiet = false;
    app.add_option("--seed", seed, "random seed (default 0)");
    app.add_flag("--quiet", quiet, "suppress informational notes on stderr");

    auto* c_sample = app.add_subcommand("sample", "draw a dataset from a model spec");
    std::string model_path, out_path, data_path;
    std::int64_t n = 0;
    c_sample->add_option("--model", model_path, "model spec JSON")->required();
    c_sample->add_option("--n", n, "number of draws")->required()->check(CLI::PositiveNumber);
    c_sample->add_option("--out", out_path, "output CSV")->required();

    auto* c_fit = app.add_subcommand("fit", "maximum likelihood fit with a shared scale");
    std::string family_name = "normal";
    int nu = 1, order = 1;
    mixls::FitConfig cfg;
    double sigma_lo = 0.0, sigma_hi = 0.0;
    c_fit->add_option("--family", family_name, "normal|logistic|gumbel|student_t")->required();
    c_fit->add_option("--nu", nu, "student_t degrees of freedom");
    c_fit->add_option("--order", order, "number of components m")->required()
        ->check(CLI::PositiveNumber);
    c_fit->add_option("--data", data_path, "dataset CSV, one observation per line")->required();
    c_fit->add_option("--restarts", cfg.restarts, "independent starts (default 20)");
    c_fit->add_option("--max-iter", cfg.max_iter, "iteration cap per start (default 500)");
    c_fit->add_option("--ll-tol", cfg.ll_tol, "log-likelihood convergence tolerance");
    c_fit->add_option("--sigma-lo", sigma_lo, "lower scale bound");
    c_fit->add_option("--sigma-hi", sigma_hi, "upper scale bound");
    c_fit->add_option("--out", out_path, "output JSON (stdout when omitted)");

    auto* c_dist = app.add_subcommand("distance", "distance between mixing distributions");
    std::string psi1_path, psi2_path, method = "auto";
    std::int64_t mc_samples = 1000000;
    c_dist->add_option("--psi1", psi1_path, "first mixing JSON (or fit output)")->required();
    c_dist->add_option("--psi2", psi2_path, "second mixing JSON (or fit output)")->required();
    c_dist->add_option("--method", method, "auto|product|mc (multivariate only)")
        ->check(CLI::IsMember({"auto", "product", "mc"}));
    c_dist->add_option("--mc-samples", mc_samples, "monte-carlo sample count");

    auto* c_cert = app.add_subcommand("certify", "regularity constants and condition checks");
    int cert_order = 0;
    c_cert->add_option("--model", model_path, "true model spec JSON")->required();
    c_cert->add_option("--order", cert_order, "fit order m (default: atoms in the model)");
    c_cert->add_option("--mc-samples", mc_samples, "monte-carlo sample count for K0*");
    c_cert->add_option("--out", out_path, "report JSON (stdout when omitted)");

    auto* c_exp = app.add_subcommand("experiment", "simulate/fit/measure over an n-grid");
    std::string plan_path, records_path, summary_path, format = "csv";
    int jobs = 1;
    c_exp->add_option("--plan", plan_path, "experiment plan JSON")->required();
    c_exp->add_option("--out-records", records_path, "per-replication records output");
    c_exp->add_option("--out-summary", summary_path, "per-n summary output");
    c_exp->add_option("--format", format, "csv|json")->check(CLI::IsMember({"csv", "json"}));
    c_exp->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        std::cerr << e.what() << "\n";
        const CLI::App* sub = app.get_subcommands().empty() ? &app : app.get_subcommands()[0];
        std::cerr << sub->help() << "\n";
        return 2;
    }

    try {
        if (app.got_subcommand(c_sample)) return run_sample(model_path, n, seed, out_path);
        if (app.got_subcommand(c_fit)) {
            cfg.seed = seed;
            return run_fit(family_name, nu, order, data_path, cfg, sigma_lo, sigma_hi, out_path);
        }
        if (app.got_subcommand(c_dist))
            return run_distance(psi1_path, psi2_path, method, mc_samples, seed, quiet);
        if (app.got_subcommand(c_cert))
            return run_certify(model_path, cert_order, mc_samples, seed, out_path);
        if (app.got_subcommand(c_exp))
            return run_experiment(plan_path, records_path, summary_path, format, jobs);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
