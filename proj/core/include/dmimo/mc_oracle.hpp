#pragma once

#include "dmimo/geometry.hpp"
#include "dmimo/problem.hpp"
#include "dmimo/types.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace dmimo {

struct MCConfig {
    long trials = 100000;
    std::uint64_t rng_seed = 7;
    double tolerance_sigmas = 4.0;

    void validate() const;
};

/// Sample mean and standard error of one Monte Carlo statistic.
struct MCEstimate {
    double mean = 0.0;
    double std_error = 0.0;
};

/// Empirical per-antenna estimation quality ||g_hat_mt||^2 / A for every UE at
/// one AP, with Rayleigh channels and the MMSE estimator.
std::vector<MCEstimate> simulate_estimation(const Vector& beta_row, const PilotAssignment& pilots, double p_p,
                                            int pilot_length, double sigma2, int antennas, const MCConfig& mc);

/// One closed-form term against its Monte Carlo estimate.
struct TermCheck {
    int config = 0;
    std::string term;  // gamma, gain, bu, interference, noise
    int ue = 0;
    int ap = -1;  // set for per-link terms
    double closed_form = 0.0;
    double mc_mean = 0.0;
    double std_error = 0.0;
    double z = 0.0;
};

struct MCReport {
    std::vector<TermCheck> checks;
    double tolerance_sigmas = 4.0;

    double max_abs_z() const;
    bool passed() const { return max_abs_z() < tolerance_sigmas; }
    void write_csv(std::ostream& os) const;
};

/// Maximum-ratio combining check: every link of `association` is handled as a
/// weak link. Terms are in units of the receiver noise power; `gain` is
/// sum_m d a g_hat^H g, whose squared mean times rho eta gives DS_t.
MCReport mc_validate_mr_terms(const ProblemSpec& ps, const Vector& eta, const Matrix& association,
                              const MCConfig& mc);

/// Exhaustive search over coverage-feasible binary associations and a uniform
/// eta grid of `eta_grid` points on [0, 1]. Ties go to the lexicographically
/// lowest association (column-major), then the lowest eta grid index.
struct BruteForceResult {
    bool feasible = false;
    double ee = 0.0;
    double sum_se = 0.0;
    Matrix association;
    Vector eta;
};

constexpr int kBruteForceMaxLinks = 12;
constexpr int kBruteForceMaxUes = 3;
constexpr int kBruteForceMaxGrid = 21;

BruteForceResult brute_force_small(const ProblemSpec& ps, int eta_grid);

/// Rounds each eta to the nearest point of the uniform grid used by brute_force_small.
Vector project_to_grid(const Vector& eta, int eta_grid);

}  // namespace dmimo
