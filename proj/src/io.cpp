#include "csmooth/io.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "csmooth/errors.hpp"

namespace csmooth {

namespace {

using nlohmann::json;

[[noreturn]] void config_error(const std::string& field, const std::string& what) {
    throw InvalidInput("config: " + field + " " + what);
}

double require_number(const json& j, const std::string& field) {
    if (!j.contains(field) || !j[field].is_number()) {
        config_error(field, "must be a number");
    }
    return j[field].get<double>();
}

Kernel parse_kernel(const json& j) {
    if (!j.contains("kernel") || !j["kernel"].is_object()) {
        config_error("kernel", "must be an object");
    }
    const json& k = j["kernel"];
    if (!k.contains("family") || !k["family"].is_string()) {
        config_error("kernel.family", "must be a string");
    }
    const std::string family = k["family"].get<std::string>();
    const bool needs_lengthscale =
        family == "squared_exponential" || family == "matern32" || family == "matern52";
    if (!needs_lengthscale && family != "brownian_plus_one") {
        config_error("kernel.family",
                     "must be one of squared_exponential, matern32, matern52, brownian_plus_one");
    }
    const double variance =
        k.contains("variance") ? require_number(k, "variance") : 1.0;
    if (!(variance > 0.0)) config_error("kernel.variance", "must be > 0");

    if (family == "brownian_plus_one") {
        return Kernel::brownian_plus_one(variance);
    }
    if (!k.contains("lengthscale") || !k["lengthscale"].is_number()) {
        config_error("kernel.lengthscale", "must be a number");
    }
    const double ell = k["lengthscale"].get<double>();
    if (!(ell > 0.0)) config_error("kernel.lengthscale", "must be > 0");
    if (family == "squared_exponential") return Kernel::squared_exponential(ell, variance);
    if (family == "matern32") return Kernel::matern32(ell, variance);
    return Kernel::matern52(ell, variance);
}

ConstraintSet parse_constraints(const json& j) {
    ConstraintSet cs;
    if (!j.contains("constraints") || j["constraints"].is_null()) return cs;
    if (!j["constraints"].is_object()) config_error("constraints", "must be an object or null");
    const json& c = j["constraints"];

    if (c.contains("bounds") && !c["bounds"].is_null()) {
        if (!c["bounds"].is_array() || c["bounds"].size() != 2 || !c["bounds"][0].is_number() ||
            !c["bounds"][1].is_number()) {
            config_error("constraints.bounds", "must be [lower, upper] or null");
        }
        cs.lower_bound(c["bounds"][0].get<double>());
        cs.upper_bound(c["bounds"][1].get<double>());
    }
    if (c.contains("monotone") && !c["monotone"].is_null()) {
        const std::string m = c["monotone"].is_string() ? c["monotone"].get<std::string>() : "";
        if (m == "increasing") {
            cs.monotone(MonotoneDirection::Increasing);
        } else if (m == "decreasing") {
            cs.monotone(MonotoneDirection::Decreasing);
        } else {
            config_error("constraints.monotone", "must be \"increasing\", \"decreasing\" or null");
        }
    }
    if (c.contains("shape") && !c["shape"].is_null()) {
        const std::string s = c["shape"].is_string() ? c["shape"].get<std::string>() : "";
        if (s == "convex") {
            cs.shape(ShapeCurvature::Convex);
        } else if (s == "concave") {
            cs.shape(ShapeCurvature::Concave);
        } else {
            config_error("constraints.shape", "must be \"convex\", \"concave\" or null");
        }
    }
    return cs;
}

}  // namespace

Mesh RunConfig::make_mesh(const std::vector<double>& data_sites) const {
    if (nodes) return Mesh::from_nodes(*nodes, data_sites);
    return Mesh::at_level(data_sites, level.value_or(4));
}

RunConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw InvalidInput(std::string("config: invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw InvalidInput("config: top level must be an object");

    RunConfig cfg;
    cfg.kernel = parse_kernel(j);

    cfg.noise_var = require_number(j, "noise_var");
    if (!(cfg.noise_var > 0.0)) config_error("noise_var", "must be > 0");

    cfg.constraints = parse_constraints(j);

    if (j.contains("level") && !j["level"].is_null()) {
        if (!j["level"].is_number_integer()) config_error("level", "must be an integer");
        cfg.level = j["level"].get<int>();
        if (*cfg.level < 0) config_error("level", "must be >= 0");
    }
    if (j.contains("nodes") && !j["nodes"].is_null()) {
        if (cfg.level) config_error("nodes", "cannot be combined with level");
        if (!j["nodes"].is_array()) config_error("nodes", "must be an array of numbers");
        std::vector<double> nodes;
        for (const auto& v : j["nodes"]) {
            if (!v.is_number()) config_error("nodes", "must be an array of numbers");
            nodes.push_back(v.get<double>());
        }
        cfg.nodes = std::move(nodes);
    }

    if (j.contains("seed") && !j["seed"].is_null()) {
        if (!j["seed"].is_number_integer()) config_error("seed", "must be an integer");
        cfg.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("eval_grid") && !j["eval_grid"].is_null()) {
        if (!j["eval_grid"].is_number_integer()) config_error("eval_grid", "must be an integer");
        cfg.eval_grid = j["eval_grid"].get<int>();
        if (cfg.eval_grid < 2) config_error("eval_grid", "must be >= 2");
    }
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

DataTable read_data_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open data file " + path);

    DataTable table;
    std::string line;
    long lineno = 0;
    bool header_allowed = true;
    while (std::getline(in, line)) {
        ++lineno;
        const auto first = line.find_first_not_of(" \t\r\n");
        if (first == std::string::npos) continue;
        if (line[first] == '#') continue;

        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream row(line);
        double x = 0.0;
        double y = 0.0;
        if (!(row >> x >> y)) {
            if (header_allowed) {
                header_allowed = false;
                continue;
            }
            throw InvalidInput(path + ":" + std::to_string(lineno) + ": expected two numbers");
        }
        std::string extra;
        if (row >> extra) {
            throw InvalidInput(path + ":" + std::to_string(lineno) +
                               ": expected exactly two columns");
        }
        header_allowed = false;
        if (!(x >= 0.0 && x <= 1.0)) {
            throw InvalidInput(path + ":" + std::to_string(lineno) + ": x = " +
                               std::to_string(x) + " is outside [0,1]");
        }
        table.xs.push_back(x);
        table.ys.push_back(y);
    }
    if (table.xs.empty()) throw InvalidInput(path + ": no data rows");
    return table;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_curve_csv(const std::string& path, const std::vector<double>& xs,
                     const std::vector<double>& u_hat, const std::vector<double>& mean) {
    std::ofstream out(path);
    if (!out) throw InvalidInput("cannot write " + path);
    out << "x,u_hat,posterior_mean_unconstrained\n";
    for (std::size_t i = 0; i < xs.size(); ++i) {
        out << format_double(xs[i]) << ',' << format_double(u_hat[i]) << ','
            << format_double(mean[i]) << '\n';
    }
}

void write_fit_json(const std::string& path, const Solution& sol, const QPProblem& problem) {
    json j;
    j["objective"] = sol.objective;
    j["N"] = problem.metric().mesh.segment_count();
    j["jitter_used"] = problem.metric().gram.jitter_used();
    j["iterations"] = sol.iterations;
    j["kkt"] = {{"stationarity", sol.kkt.stationarity},
                {"primal", sol.kkt.primal},
                {"complementarity", sol.kkt.complementarity}};

    json active = json::array();
    for (int row : sol.active_set) {
        json a;
        a["row"] = row;
        a["label"] = problem.ineq().row_labels.empty()
                         ? std::string("row_" + std::to_string(row))
                         : problem.ineq().row_labels[static_cast<std::size_t>(row)];
        a["multiplier"] = sol.multipliers[row];
        active.push_back(a);
    }
    j["active_constraints"] = active;

    j["nodes"] = problem.metric().mesh.nodes();
    j["coefficients"] = std::vector<double>(sol.u_hat.coeffs().data(),
                                            sol.u_hat.coeffs().data() + sol.u_hat.coeffs().size());

    std::ofstream out(path);
    if (!out) throw InvalidInput("cannot write " + path);
    out << j.dump(2) << '\n';
}

void write_samples_csv(const std::string& path, const SampleBatch& batch) {
    std::ofstream out(path);
    if (!out) throw InvalidInput("cannot write " + path);
    const Eigen::Index dim = batch.draws.empty() ? 0 : batch.draws.front().size();
    out << "kind,acceptance_rate";
    for (Eigen::Index i = 0; i < dim; ++i) out << ",c_" << i;
    out << '\n';

    Eigen::VectorXd mean = Eigen::VectorXd::Zero(dim);
    for (const auto& d : batch.draws) {
        out << "draw,";
        for (Eigen::Index i = 0; i < dim; ++i) out << ',' << format_double(d[i]);
        out << '\n';
        mean += d;
    }
    if (!batch.draws.empty()) mean /= static_cast<double>(batch.draws.size());
    out << "summary," << format_double(batch.acceptance_rate());
    for (Eigen::Index i = 0; i < dim; ++i) out << ',' << format_double(mean[i]);
    out << '\n';
}

namespace {

json level_to_json(const LevelRecord& rec) {
    json j;
    j["level"] = rec.level;
    j["N"] = rec.segments;
    j["objective"] = rec.objective;
    j["sup_gap_to_prev"] = rec.sup_gap_to_prev ? json(*rec.sup_gap_to_prev) : json();
    j["j_gap_to_prev"] = rec.j_gap_to_prev ? json(*rec.j_gap_to_prev) : json();
    j["reference_objective"] =
        rec.reference_objective ? json(*rec.reference_objective) : json();
    j["wall_time_s"] = rec.wall_time_s;
    j["coeffs"] = std::vector<double>(rec.coeffs.data(), rec.coeffs.data() + rec.coeffs.size());
    return j;
}

}  // namespace

void write_report_json(const std::string& path, const RefinementReport& report) {
    json j;
    j["eval_grid"] = report.eval_grid;
    j["levels"] = json::array();
    for (const auto& rec : report.levels) j["levels"].push_back(level_to_json(rec));
    std::ofstream out(path);
    if (!out) throw InvalidInput("cannot write " + path);
    out << j.dump(2) << '\n';
}

void write_report_csv(const std::string& path, const RefinementReport& report) {
    std::ofstream out(path);
    if (!out) throw InvalidInput("cannot write " + path);
    out << "level,N,objective,sup_gap_to_prev,j_gap_to_prev,reference_objective,wall_time_s\n";
    for (const auto& rec : report.levels) {
        out << rec.level << ',' << rec.segments << ',' << format_double(rec.objective) << ',';
        if (rec.sup_gap_to_prev) out << format_double(*rec.sup_gap_to_prev);
        out << ',';
        if (rec.j_gap_to_prev) out << format_double(*rec.j_gap_to_prev);
        out << ',';
        if (rec.reference_objective) out << format_double(*rec.reference_objective);
        out << ',' << format_double(rec.wall_time_s) << '\n';
    }
}

}  // namespace csmooth
