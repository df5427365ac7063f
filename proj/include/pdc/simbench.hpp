#pragma once

#include "pdc/baselines.hpp"
#include "pdc/forest.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace pdc::sim {

using Beta = std::array<double, 4>;

enum class Scenario { mean, linear };

/// Y = 1 + beta'X + beta'(X*X - 1) + zeta, X ~ N(0, I_4), zeta ~ N(0, 1).
struct DgpSpec {
    Beta beta{9.0, -1.0, -2.0, -2.0};
    Index n = 1000;
    Index N = 5000;
    std::uint64_t seed = 0;
};

struct Population {
    LabeledDataset labeled;
    UnlabeledDataset unlabeled;
};

double dgp_response(const Beta& beta, const double* x, double zeta);

Population generate_population(const DgpSpec& dgp);

/// Settings 1-3 pair with the mean scenario, 4-6 with the linear one.
struct SettingSpec {
    int id = 1;
    /// Noise scale of the Setting 1-3 predictor (Settings 2 and 3 use 0.5).
    double epsilon = 0.0;

    Scenario scenario() const { return id <= 3 ? Scenario::mean : Scenario::linear; }
    void validate() const;
};

struct SettingModelOptions {
    std::uint64_t seed = 0;
    Index aux_size = 2000;
    ForestParams forest{};
};

/// Predictive models for a setting. Settings 1-5 return one model; Setting 6
/// returns the two forests trained on the auxiliary datasets.
std::vector<PredictiveModel> setting_models(const SettingSpec& setting, const Beta& beta,
                                            const SettingModelOptions& options = {});

struct TruthEstimate {
    Vector theta;
    /// Sandwich standard error of each coordinate.
    Vector standard_error;
};

/// Least-squares projection of Y on X (no intercept) from a large Monte Carlo
/// draw of the DGP. Analytically this is beta.
TruthEstimate linear_truth_oracle(const Beta& beta, Index draws = 2'000'000, std::uint64_t seed = 0x7a11d5eedULL);

/// Target value for the scenario: E(Y) = 1 for the mean scenario; the oracle's
/// first coordinate (cached per beta) for the linear scenario.
double scenario_truth(Scenario scenario, const Beta& beta);

std::vector<std::string> default_methods(const SettingSpec& setting);

struct MethodOutcome {
    std::string method;
    bool failed = false;
    std::string error;
    double estimate = 0.0;
    ConfidenceInterval ci;
    bool covered = false;
};

/// Fits every method on one draw of the DGP, all sharing the same draw and
/// the same predictions. Fits start from and are evaluated at the supervised
/// estimate. Methods that throw come back with failed = true.
std::vector<MethodOutcome> run_replication(const SettingSpec& setting, const DgpSpec& dgp,
                                           std::span<const PredictiveModel> models,
                                           std::span<const std::string> methods, double truth, double alpha);

struct SimConfig {
    SettingSpec setting{};
    Beta beta{9.0, -1.0, -2.0, -2.0};
    Index n = 1000;
    Index N = 5000;
    int reps = 1000;
    double alpha = 0.1;
    std::uint64_t seed = 1;
    int threads = 1;
    /// Empty means default_methods(setting).
    std::vector<std::string> methods;
    Index aux_size = 2000;
    ForestParams forest{};
};

struct MethodSummary {
    std::string method;
    double coverage = 0.0;
    double mean_wr = 0.0;
    int reps = 0;
    int failures = 0;
};

struct SimReport {
    SimConfig config;
    double truth = 0.0;
    std::vector<MethodSummary> rows;

    const MethodSummary& row(const std::string& method) const;
};

/// Replication i uses seed config.seed + i; results do not depend on the
/// thread count.
SimReport monte_carlo(const SimConfig& config);

struct GridSpec {
    std::string param;  // eps, n, N or beta1
    std::vector<double> values;
};

/// "name=a,b,c" or "name=start:stop:step".
GridSpec parse_grid(const std::string& text);

/// Default grids: eps over {0,...,2} for Setting 1, n over {500,...,5500}
/// for Setting 2, N over {2000,...,22000} for Setting 3 and beta1 over
/// {0,...,10} for Settings 4-6.
GridSpec default_grid(int setting);

/// Sets the grid parameter on a copy of `base`.
SimConfig apply_grid_value(const SimConfig& base, const std::string& param, double value);

struct GridCell {
    std::string param;
    double value = 0.0;
    SimReport report;
};

std::vector<GridCell> run_grid(const SimConfig& base, const GridSpec& grid);

/// setting,param_name,param_value,method,coverage,mean_wr,reps,seed
void write_sim_csv(std::ostream& out, const std::vector<GridCell>& cells,
                   const std::map<std::string, std::string>& echo);

}  // namespace pdc::sim
