#pragma once

#include "dmimo/energy.hpp"
#include "dmimo/geometry.hpp"
#include "dmimo/se_model.hpp"

#include <cstdint>

namespace dmimo {

/// Everything needed to draw one network realization.
struct SystemConfig {
    GeometryConfig geometry;
    EnergyConstants energy;
    double p_u_w = 0.1;
    double p_p_w = 0.1;
    double noise_figure_db = 9.0;
    double nu = 0.95;
    LsfdMode lsfd_mode = LsfdMode::uniform;
    PilotScheme pilot_scheme = PilotScheme::round_robin;

    double sigma2() const { return thermal_noise_w(energy.bandwidth_hz, noise_figure_db); }
    double prelog() const { return prelog_factor(geometry.pilot_length, geometry.coherence_length); }
    void validate() const;
};

/// One instance of the joint power/association problem.
///
/// `grouping` and `weights` are built over the full candidate set (every AP may
/// serve every UE) and stay fixed while the relaxed problem is solved; a binary
/// association is re-grouped when it is finally evaluated.
struct ProblemSpec {
    LSFCMatrix lsfc;
    PilotAssignment pilots;
    Grouping grouping;
    LSFDWeights weights;
    EnergyConstants energy;
    int antennas = 8;
    int pilot_length = 5;
    double se_qos = 0.0;
    double w = 0.4875;
    double p_u = 0.1;
    double p_p = 0.1;
    double sigma2 = 1.0;
    double nu = 0.95;
    LsfdMode lsfd_mode = LsfdMode::uniform;

    int num_aps() const { return static_cast<int>(lsfc.beta.rows()); }
    int num_ues() const { return static_cast<int>(lsfc.beta.cols()); }
    double rho() const { return p_u / sigma2; }
};

ProblemSpec make_problem(LSFCMatrix lsfc, PilotAssignment pilots, const EnergyConstants& energy,
                         int antennas, int pilot_length, double prelog, double p_u, double sigma2, double se_qos,
                         double nu = 0.95, LsfdMode lsfd_mode = LsfdMode::uniform);

/// Fresh layout, fading, pilots and estimation quality from `seed`.
ProblemSpec draw_problem(const SystemConfig& cfg, double se_qos, std::uint64_t seed);

struct Evaluation {
    SINRBreakdown terms;
    SEResult se;
    double p_fixed = 0.0;
    double p_circuit = 0.0;
    double p_total = 0.0;
    double ee = 0.0;          // full objective, decoding power included
    double ee_reduced = 0.0;  // decoding power dropped from the denominator
};

/// Evaluation with the problem's fixed candidate grouping (relaxed iterates).
Evaluation evaluate_relaxed(const ProblemSpec& ps, const SinrModel& model, const Vector& eta,
                            const Matrix& association);

/// Evaluation of a binary association with grouping and LSFD weights rebuilt for it.
Evaluation evaluate_binary(const ProblemSpec& ps, const Vector& eta, const Matrix& association);

SinrModel candidate_model(const ProblemSpec& ps);

}  // namespace dmimo
