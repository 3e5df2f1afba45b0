#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "csmooth/bayes.hpp"
#include "csmooth/constraints.hpp"
#include "csmooth/convergence.hpp"
#include "csmooth/kernel.hpp"
#include "csmooth/solver.hpp"

namespace csmooth {

/// Everything a run needs besides the data. Parsed from a single JSON
/// document; validation errors name the offending field.
struct RunConfig {
    Kernel kernel;
    double noise_var = 1.0;
    ConstraintSet constraints;
    std::optional<int> level;                  // dyadic refinement level
    std::optional<std::vector<double>> nodes;  // or an explicit node list
    std::uint64_t seed = 0;
    int eval_grid = 2048;

    /// The mesh this config requests for the given data sites.
    Mesh make_mesh(const std::vector<double>& data_sites) const;
};

RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);

/// Reads observation rows "x,y". Comment lines start with '#'; an optional
/// header line is skipped; x must lie in [0,1]. Throws InvalidInput with
/// the line number on malformed rows and when no data rows remain.
struct DataTable {
    std::vector<double> xs;
    std::vector<double> ys;
};
DataTable read_data_csv(const std::string& path);

/// Round-trip-safe float formatting (17 significant digits).
std::string format_double(double v);

void write_curve_csv(const std::string& path, const std::vector<double>& xs,
                     const std::vector<double>& u_hat, const std::vector<double>& mean);

void write_fit_json(const std::string& path, const Solution& sol, const QPProblem& problem);

void write_samples_csv(const std::string& path, const SampleBatch& batch);

void write_report_json(const std::string& path, const RefinementReport& report);
void write_report_csv(const std::string& path, const RefinementReport& report);

}  // namespace csmooth
