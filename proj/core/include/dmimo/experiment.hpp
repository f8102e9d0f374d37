#pragma once

#include "dmimo/config.hpp"
#include "dmimo/fp_optimizer.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace dmimo {

/// Layout seed of one realization. Every grid point reuses it, so sweeps
/// compare settings on common layouts.
std::uint64_t realization_seed(std::uint64_t master, int realization);

struct RunRecord {
    std::vector<double> point;  // axis values
    int realization = 0;
    std::uint64_t seed = 0;
    SolveStatus status = SolveStatus::max_iters;
    double ee = 0.0;  // 0 when infeasible
    double sum_se = 0.0;
    int iterations = 0;
    double runtime_s = 0.0;
};

struct PointSummary {
    std::vector<double> point;
    int realizations = 0;
    int infeasible = 0;
    double mean_ee = 0.0;
    double mean_sum_se = 0.0;
    double mean_iterations = 0.0;
};

struct SweepResult {
    std::vector<std::string> axes;
    std::vector<RunRecord> runs;  // grid-major, then realization

    std::vector<PointSummary> aggregate() const;

    /// axes..., realization, seed, status, ee, sum_se, iterations
    void write_long_csv(std::ostream& os) const;
    /// axes..., realizations, infeasible, mean_ee, mean_sum_se, mean_iterations
    void write_mean_csv(std::ostream& os) const;
    /// axes..., realization, runtime_s. Kept apart so the other files stay
    /// byte-identical between repeated runs.
    void write_runtime_csv(std::ostream& os) const;
};

/// Every grid point times every realization: fresh layout, optimize, record.
SweepResult run_sweep(const ExperimentConfig& cfg);

struct TraceRun {
    Solution solution;
    SolveTrace trace;
};

/// One run at the first grid point, realization 0, with its per-iteration trace.
TraceRun convergence_trace(const ExperimentConfig& cfg);

struct RobustnessRow {
    std::string family;   // association or eta_init
    std::string setting;  // scheme name or eta value
    int realization = 0;
    SolveStatus status = SolveStatus::max_iters;
    double ee = 0.0;
    double sum_se = 0.0;
    int iterations = 0;
};

struct RobustnessResult {
    std::vector<RobustnessRow> rows;

    /// Mean EE per setting of one family, in the order settings were run.
    std::vector<std::pair<std::string, double>> means(const std::string& family) const;
    /// (max - min) / mean over the per-setting mean EEs of one family.
    double relative_spread(const std::string& family) const;

    /// family, setting, realization, status, ee, sum_se, iterations
    void write_csv(std::ostream& os) const;
};

const std::vector<AssociationScheme>& robustness_schemes();
const std::vector<double>& robustness_eta_inits();

/// Final EE from each association scheme (eta = 1) and each uniform eta
/// initialization (lsfc95 association) at the first grid point.
RobustnessResult robustness_study(const ExperimentConfig& cfg);

/// Monte Carlo check of estimation quality and maximum-ratio SINR terms on
/// cfg.mc_configs random small networks (4 APs, 4 UEs, 2 pilots, 250 m side).
MCReport validation_study(const ExperimentConfig& cfg);

struct OracleRow {
    int instance = 0;
    std::uint64_t seed = 0;
    bool oracle_feasible = false;
    double oracle_ee = 0.0;
    SolveStatus status = SolveStatus::max_iters;
    double optimizer_ee = 0.0;
    double ratio = 0.0;         // optimizer / oracle, 1 when both are infeasible
    double projected_ee = 0.0;  // optimizer point with eta rounded to the oracle grid
    bool projected_feasible = false;
};

struct OracleStudy {
    std::vector<OracleRow> rows;
    int eta_grid = 11;

    /// Share of instances with optimizer EE >= `fraction` x oracle EE.
    double share_within(double fraction) const;
    /// Instances where a feasible grid-projected optimizer point beats the oracle.
    int dominance_violations() const;
    /// instance, seed, oracle_feasible, oracle_ee, status, optimizer_ee, ratio, projected_ee, projected_feasible
    void write_csv(std::ostream& os) const;
};

/// Optimizer against exhaustive search on cfg.oracle tiny instances at cfg.se_qos.
OracleStudy oracle_study(const ExperimentConfig& cfg);

/// Writes `name` under cfg.output_dir, creating the directory.
std::filesystem::path output_path(const ExperimentConfig& cfg, const std::string& name);

/// Small JSON document describing one command's run.
std::string json_summary(const std::string& command, const ExperimentConfig& cfg, double runtime_s,
                         const std::vector<std::pair<std::string, double>>& metrics);

}  // namespace dmimo
