#pragma once

#include "dmimo/fp_optimizer.hpp"
#include "dmimo/geometry.hpp"
#include "dmimo/mc_oracle.hpp"
#include "dmimo/problem.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace dmimo {

enum class SweepVariable { se_qos, num_aps, num_ues, p_u };

SweepVariable parse_sweep_variable(std::string_view name);
/// Column name used in CSV output: se_qos, M, T or p_u.
std::string_view to_string(SweepVariable v);

struct SweepAxis {
    SweepVariable variable = SweepVariable::se_qos;
    std::vector<double> values;
};

/// Tiny-instance settings for the brute-force comparison.
struct OracleSettings {
    int instances = 50;
    int num_aps = 3;
    int num_ues = 2;
    int antennas = 4;
    int eta_grid = 11;
};

struct ExperimentConfig {
    SystemConfig system;
    SolverSettings solver;
    double se_qos = 0.0;           // bit/s/Hz, used when se_qos is not swept
    std::vector<SweepAxis> sweep;  // grid is the product, last axis fastest
    int realizations = 50;
    std::uint64_t seed = 1;
    std::string output_dir = "out";
    AssociationScheme init_scheme = AssociationScheme::lsfc95;
    double eta_init = 1.0;
    int workers = 0;  // 0 uses every hardware thread

    MCConfig mc;
    int mc_configs = 10;
    OracleSettings oracle;

    void validate() const;

    /// Number of grid points of the sweep (1 without axes).
    std::size_t grid_size() const;
    /// Axis values of grid point `index`, in axis order.
    std::vector<double> grid_point(std::size_t index) const;
    /// System settings and QoS with the given grid point applied.
    void apply_point(const std::vector<double>& point, SystemConfig& system, double& se_qos) const;
};

/// Sets one dotted key from its textual value; throws ConfigError naming the key.
void apply_setting(ExperimentConfig& cfg, std::string_view key, std::string_view value);

/// JSON config: nested objects or dotted keys, e.g. {"geometry": {"num_aps": 20}}
/// or {"geometry.num_aps": 20}. Sweep axes are listed under "sweep" in order.
ExperimentConfig parse_config(std::string_view json_text);
ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace dmimo
