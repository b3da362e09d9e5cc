#include "mixls/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <stdexcept>

namespace mixls::io {

namespace {

void check_schema(const json& j) {
    if (j.contains("schema") && j.at("schema").get<int>() != kSchemaVersion)
        throw std::runtime_error("unsupported schema version");
}

double number_or_nan(const json& j) {
    if (j.is_null()) return std::nan("");
    return j.get<double>();
}

json nan_to_null(double v) {
    if (std::isnan(v)) return nullptr;
    return v;
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc())
        throw std::runtime_error("format_double: conversion failed");
    return std::string(buf, ptr);
}

double parse_double(const std::string& s) {
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    while (first != last && (*first == ' ' || *first == '\t')) ++first;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc()) throw std::runtime_error("parse_double: bad number '" + s + "'");
    return v;
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << content;
    if (!out) throw std::runtime_error("write failed: " + path);
}

json family_to_json(const FamilyKind& family) {
    switch (family.tag) {
        case Family::Normal: return "normal";
        case Family::Logistic: return "logistic";
        case Family::Gumbel: return "gumbel";
        case Family::StudentT: return json{{"student_t", family.nu}};
    }
    throw std::logic_error("family_to_json: bad family");
}

FamilyKind family_from_json(const json& j) {
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        if (s == "normal") return FamilyKind::normal();
        if (s == "logistic") return FamilyKind::logistic();
        if (s == "gumbel") return FamilyKind::gumbel();
        throw std::runtime_error("unknown family '" + s + "'");
    }
    if (j.is_object() && j.contains("student_t"))
        return FamilyKind::student_t(j.at("student_t").get<int>());
    throw std::runtime_error("bad family specification");
}

json mixing_to_json(const MixingDistribution& psi) {
    return json{{"support", psi.support()}, {"weights", psi.weights()}};
}

MixingDistribution mixing_from_json(const json& j) {
    return MixingDistribution(j.at("support").get<std::vector<double>>(),
                              j.at("weights").get<std::vector<double>>());
}

json extended_to_json(const ExtendedMixing& psi) {
    return json{{"gamma", psi.gamma}, {"rho", psi.rho}, {"inner", mixing_to_json(psi.inner)}};
}

ExtendedMixing extended_from_json(const json& j) {
    const double gamma = j.at("gamma").get<double>();
    const double rho = j.at("rho").get<double>();
    if (rho == 0.0) {
        ExtendedMixing e;
        e.gamma = gamma;
        e.rho = 0.0;
        return e;
    }
    return ExtendedMixing(gamma, rho, mixing_from_json(j.at("inner")));
}

json mv_mixing_to_json(const MultivariateMixing& psi) {
    return json{{"support", psi.support()}, {"weights", psi.weights()}};
}

MultivariateMixing mv_mixing_from_json(const json& j) {
    return MultivariateMixing(j.at("support").get<std::vector<std::vector<double>>>(),
                              j.at("weights").get<std::vector<double>>());
}

json model_to_json(const MixtureModel& model) {
    return json{{"schema", kSchemaVersion},
                {"family", family_to_json(model.family)},
                {"mixing", mixing_to_json(model.mixing)},
                {"sigma", model.sigma}};
}

MixtureModel model_from_json(const json& j) {
    check_schema(j);
    return MixtureModel(family_from_json(j.at("family")), mixing_from_json(j.at("mixing")),
                        j.at("sigma").get<double>());
}

bool is_multivariate_model_json(const json& j) {
    return j.is_object() && (j.contains("generator") || j.contains("Sigma"));
}

json mv_model_to_json(const MultivariateMixtureModel& model) {
    const int p = model.generator.dim;
    std::vector<std::vector<double>> sig(p, std::vector<double>(p));
    for (int r = 0; r < p; ++r)
        for (int c = 0; c < p; ++c) sig[r][c] = model.Sigma(r, c);
    return json{{"schema", kSchemaVersion},
                {"generator", {{"kind", "multivariate_normal"}, {"dim", p}}},
                {"mixing", mv_mixing_to_json(model.mixing)},
                {"Sigma", sig}};
}

MultivariateMixtureModel mv_model_from_json(const json& j) {
    check_schema(j);
    const auto& gj = j.at("generator");
    if (gj.at("kind").get<std::string>() != "multivariate_normal")
        throw std::runtime_error("unknown generator kind");
    DensityGenerator gen{GeneratorKind::MultivariateNormal, gj.at("dim").get<int>()};
    const auto sig = j.at("Sigma").get<std::vector<std::vector<double>>>();
    const int p = gen.dim;
    if (static_cast<int>(sig.size()) != p)
        throw std::runtime_error("Sigma has wrong number of rows");
    Eigen::MatrixXd S(p, p);
    for (int r = 0; r < p; ++r) {
        if (static_cast<int>(sig[r].size()) != p)
            throw std::runtime_error("Sigma has wrong number of columns");
        for (int c = 0; c < p; ++c) S(r, c) = sig[r][c];
    }
    return MultivariateMixtureModel(gen, mv_mixing_from_json(j.at("mixing")), S);
}

json fit_result_to_json(const FamilyKind& family, const FitResult& result) {
    return json{{"schema", kSchemaVersion},
                {"family", family_to_json(family)},
                {"mixing", mixing_to_json(result.mixing)},
                {"sigma", result.sigma},
                {"loglik", result.loglik},
                {"iterations", result.iterations},
                {"converged", result.converged},
                {"restart_index", result.restart_index},
                {"trace", result.trace},
                {"events",
                 {{"sigma_clamped", result.events.sigma_clamped},
                  {"sigma_guarded", result.events.sigma_guarded},
                  {"weight_floored", result.events.weight_floored}}}};
}

json certify_report_to_json(const CertifyReport& report) {
    json j{{"schema", kSchemaVersion}};
    if (report.constants) {
        const auto& tc = *report.constants;
        j["constants"] = {{"a", tc.a},       {"b", tc.b},        {"eps0", tc.eps0},
                          {"K0", tc.K0},     {"Delta", tc.Delta}, {"eps", tc.eps},
                          {"m", tc.m},       {"sigma0", tc.sigma0},
                          {"v0", tc.family.v0}, {"v1", tc.family.v1}, {"beta", tc.family.beta}};
    }
    if (report.mv_constants) {
        const auto& tc = *report.mv_constants;
        j["constants"] = {{"a_star", tc.a_star},
                          {"b_star", tc.b_star},
                          {"eps0_star", tc.eps0_star},
                          {"K0_star", tc.K0_star},
                          {"K0_star_se", tc.K0_star_se},
                          {"Delta_star", tc.Delta_star},
                          {"eps_star", tc.eps_star},
                          {"p", tc.p},
                          {"m", tc.m},
                          {"v0", tc.generator.v0},
                          {"v1", tc.generator.v1},
                          {"beta", tc.generator.beta}};
    }
    json checks = json::array();
    for (const auto& c : report.checks) {
        json e{{"name", c.name}, {"pass", c.pass}, {"margin", c.margin}};
        e["location"] = c.location ? json(*c.location) : json(nullptr);
        checks.push_back(e);
    }
    j["checks"] = checks;
    j["all_pass"] = report.all_pass();
    return j;
}

json plan_to_json(const ExperimentPlan& plan) {
    json j{{"schema", kSchemaVersion},
           {"fit_order", plan.fit_order},
           {"n_grid", plan.n_grid},
           {"replications", plan.replications},
           {"base_seed", plan.base_seed}};
    if (plan.multivariate())
        j["true_model"] = mv_model_to_json(std::get<MultivariateMixtureModel>(plan.true_model));
    else
        j["true_model"] = model_to_json(std::get<MixtureModel>(plan.true_model));
    json cfg{{"restarts", plan.fit_config.restarts},
             {"max_iter", plan.fit_config.max_iter},
             {"ll_tol", plan.fit_config.ll_tol}};
    if (plan.fit_config.sigma_bounds) {
        cfg["sigma_lo"] = plan.fit_config.sigma_bounds->first;
        cfg["sigma_hi"] = plan.fit_config.sigma_bounds->second;
    }
    j["fit_config"] = cfg;
    return j;
}

ExperimentPlan plan_from_json(const json& j) {
    check_schema(j);
    ExperimentPlan plan;
    const auto& tm = j.at("true_model");
    if (is_multivariate_model_json(tm))
        plan.true_model = mv_model_from_json(tm);
    else
        plan.true_model = model_from_json(tm);
    plan.fit_order = j.at("fit_order").get<int>();
    plan.n_grid = j.at("n_grid").get<std::vector<int>>();
    plan.replications = j.at("replications").get<int>();
    plan.base_seed = j.at("base_seed").get<std::uint64_t>();
    if (j.contains("fit_config")) {
        const auto& cfg = j.at("fit_config");
        if (cfg.contains("restarts")) plan.fit_config.restarts = cfg.at("restarts").get<int>();
        if (cfg.contains("max_iter")) plan.fit_config.max_iter = cfg.at("max_iter").get<int>();
        if (cfg.contains("ll_tol")) plan.fit_config.ll_tol = cfg.at("ll_tol").get<double>();
        if (cfg.contains("sigma_lo") != cfg.contains("sigma_hi"))
            throw std::runtime_error("fit_config: sigma bounds must come as a pair");
        if (cfg.contains("sigma_lo"))
            plan.fit_config.sigma_bounds = {cfg.at("sigma_lo").get<double>(),
                                            cfg.at("sigma_hi").get<double>()};
    }
    plan.fit_config.order = plan.fit_order;
    plan.validate();
    return plan;
}

namespace {

json record_to_json(const ExperimentRecord& r) {
    return json{{"n", r.n},
                {"rep", r.rep},
                {"seed", r.seed},
                {"D", nan_to_null(r.D_value)},
                {"sigma_err", nan_to_null(r.sigma_err)},
                {"loglik_gap", nan_to_null(r.loglik_gap)},
                {"converged", r.converged},
                {"wall_time", r.wall_time},
                {"failed", r.failed},
                {"error", r.error}};
}

ExperimentRecord record_from_json(const json& j) {
    ExperimentRecord r;
    r.n = j.at("n").get<int>();
    r.rep = j.at("rep").get<int>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.D_value = number_or_nan(j.at("D"));
    r.sigma_err = number_or_nan(j.at("sigma_err"));
    r.loglik_gap = number_or_nan(j.at("loglik_gap"));
    r.converged = j.at("converged").get<bool>();
    r.wall_time = j.at("wall_time").get<double>();
    if (j.contains("failed")) r.failed = j.at("failed").get<bool>();
    if (j.contains("error")) r.error = j.at("error").get<std::string>();
    return r;
}

}  // namespace

json records_to_json(const std::vector<ExperimentRecord>& records) {
    json arr = json::array();
    for (const auto& r : records) arr.push_back(record_to_json(r));
    return json{{"schema", kSchemaVersion}, {"records", arr}};
}

std::vector<ExperimentRecord> records_from_json(const json& j) {
    check_schema(j);
    std::vector<ExperimentRecord> out;
    for (const auto& e : j.at("records")) out.push_back(record_from_json(e));
    return out;
}

json summary_to_json(const std::vector<SummaryRow>& rows) {
    json arr = json::array();
    for (const auto& r : rows)
        arr.push_back(json{{"n", r.n},
                           {"median_D", nan_to_null(r.median_D)},
                           {"p10_D", nan_to_null(r.p10_D)},
                           {"p90_D", nan_to_null(r.p90_D)},
                           {"median_sigma_err", nan_to_null(r.median_sigma_err)},
                           {"p10_sigma_err", nan_to_null(r.p10_sigma_err)},
                           {"p90_sigma_err", nan_to_null(r.p90_sigma_err)},
                           {"convergence_rate", r.convergence_rate},
                           {"mean_wall_time", r.mean_wall_time}});
    return json{{"schema", kSchemaVersion}, {"summary", arr}};
}

AnyMixing any_mixing_from_json(const json& j) {
    if (j.is_object() && j.contains("mixing")) return any_mixing_from_json(j.at("mixing"));
    if (j.is_object() && j.contains("gamma")) return extended_from_json(j);
    if (!j.is_object() || !j.contains("support"))
        throw std::runtime_error("not a mixing distribution");
    const auto& sup = j.at("support");
    if (!sup.is_array() || sup.empty()) throw std::runtime_error("mixing: empty support");
    if (sup.front().is_array()) return mv_mixing_from_json(j);
    return ExtendedMixing(mixing_from_json(j));
}

// --- CSV -------------------------------------------------------------------

void write_dataset_csv(const std::string& path, const Dataset& data) {
    std::string out;
    for (double x : data.observations) {
        out += format_double(x);
        out += '\n';
    }
    write_text(path, out);
}

namespace {

std::vector<std::vector<double>> parse_numeric_csv(const std::string& text) {
    std::vector<std::vector<double>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<double> row;
        std::size_t start = 0;
        while (start <= line.size()) {
            const std::size_t comma = line.find(',', start);
            const std::string cell = line.substr(
                start, comma == std::string::npos ? std::string::npos : comma - start);
            row.push_back(parse_double(cell));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

Dataset read_dataset_csv(const std::string& path) {
    const auto rows = parse_numeric_csv(read_text(path));
    Dataset d;
    for (const auto& row : rows) {
        if (row.size() != 1)
            throw std::runtime_error(path + ": expected one value per line");
        d.observations.push_back(row[0]);
    }
    if (d.observations.empty()) throw std::runtime_error(path + ": empty dataset");
    return d;
}

void write_mv_dataset_csv(const std::string& path, const MvDataset& data) {
    std::string out;
    for (const auto& x : data.observations) {
        for (int l = 0; l < x.size(); ++l) {
            if (l) out += ',';
            out += format_double(x[l]);
        }
        out += '\n';
    }
    write_text(path, out);
}

MvDataset read_mv_dataset_csv(const std::string& path) {
    const auto rows = parse_numeric_csv(read_text(path));
    if (rows.empty()) throw std::runtime_error(path + ": empty dataset");
    MvDataset d;
    d.dim = static_cast<int>(rows.front().size());
    for (const auto& row : rows) {
        if (static_cast<int>(row.size()) != d.dim)
            throw std::runtime_error(path + ": ragged rows");
        Eigen::VectorXd x(d.dim);
        for (int l = 0; l < d.dim; ++l) x[l] = row[l];
        d.observations.push_back(std::move(x));
    }
    return d;
}

std::string records_to_csv(const std::vector<ExperimentRecord>& records) {
    std::string out = "n,rep,seed,D,sigma_err,loglik_gap,converged,wall_time\n";
    for (const auto& r : records) {
        out += std::to_string(r.n) + ',' + std::to_string(r.rep) + ',' + std::to_string(r.seed) +
               ',' + format_double(r.D_value) + ',' + format_double(r.sigma_err) + ',' +
               format_double(r.loglik_gap) + ',' + (r.converged ? "1" : "0") + ',' +
               format_double(r.wall_time) + '\n';
    }
    return out;
}

std::vector<ExperimentRecord> records_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("records csv: missing header");
    std::vector<ExperimentRecord> out;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::size_t start = 0;
        while (start <= line.size()) {
            const std::size_t comma = line.find(',', start);
            cells.push_back(line.substr(
                start, comma == std::string::npos ? std::string::npos : comma - start));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (cells.size() != 8) throw std::runtime_error("records csv: bad row '" + line + "'");
        ExperimentRecord r;
        r.n = std::stoi(cells[0]);
        r.rep = std::stoi(cells[1]);
        r.seed = std::stoull(cells[2]);
        r.D_value = parse_double(cells[3]);
        r.sigma_err = parse_double(cells[4]);
        r.loglik_gap = parse_double(cells[5]);
        r.converged = cells[6] == "1";
        r.wall_time = parse_double(cells[7]);
        r.failed = std::isnan(r.D_value);
        out.push_back(r);
    }
    return out;
}

std::string summary_to_csv(const std::vector<SummaryRow>& rows) {
    std::string out =
        "n,median_D,p10_D,p90_D,median_sigma_err,p10_sigma_err,p90_sigma_err,"
        "convergence_rate,mean_wall_time\n";
    for (const auto& r : rows) {
        out += std::to_string(r.n) + ',' + format_double(r.median_D) + ',' +
               format_double(r.p10_D) + ',' + format_double(r.p90_D) + ',' +
               format_double(r.median_sigma_err) + ',' + format_double(r.p10_sigma_err) + ',' +
               format_double(r.p90_sigma_err) + ',' + format_double(r.convergence_rate) + ',' +
               format_double(r.mean_wall_time) + '\n';
    }
    return out;
}

}  // namespace mixls::io
