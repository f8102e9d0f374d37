#pragma once

#include "dmimo/problem.hpp"

#include <cmath>
#include <iosfwd>
#include <optional>
#include <string_view>

namespace dmimo {

struct SolverSettings {
    double eps = 5e-3;  // relative change of the association-step objective
    int max_iters = 50;
    double round_threshold = 0.5;
    double qos_tol = 1e-8;  // bit/s/Hz slack on the sum-SE requirement

    // Inner projected-gradient ascent.
    int inner_max_iters = 400;
    double inner_grad_tol = 1e-6;
    double step_floor = 1e-12;
    double armijo = 1e-4;
    int penalty_doublings = 8;

    // Local improvement of the rounded point; 0 disables it.
    int polish_rounds = 20;
    // APs per UE, by descending beta, that a link may be added or moved to; 0 allows all.
    int polish_candidates = 8;

    void validate() const;
};

/// Auxiliary variables of the quadratic-transform reformulation.
struct SurrogateState {
    Vector z;           // SINR transform auxiliaries
    double b = 0.0;     // ratio transform auxiliary
    Vector gamma_star;  // surrogate SINRs
    double u = 0.0;     // numerator: w B sum log2(1 + gamma_star)
    double v = 0.0;     // denominator: fixed + circuit power
};

/// z_t = sqrt(DS_t) / I_t, which makes 2 z sqrt(DS) - z^2 I equal to DS / I.
Vector update_z(const SINRBreakdown& terms);

/// b = sqrt(u) / v with u = w B sum log2(1 + gamma_star), making 2 b sqrt(u) - b^2 v = u / v.
double update_b(const Vector& gamma_star, double denominator_w, double prelog, double bandwidth_hz);

/// 2 z sqrt(ds) - z^2 i.
inline double sinr_surrogate(double z, double ds, double i) { return 2.0 * z * std::sqrt(ds) - z * z * i; }

/// 2 b sqrt(u) - b^2 v.
inline double ratio_surrogate(double b, double u, double v) { return 2.0 * b * std::sqrt(u) - b * b * v; }

/// Euclidean projection of one association column onto {d in [0,1]^M : sum d >= 1}.
Vector project_coverage(const Vector& column);

struct EtaStep {
    Vector eta;
    SurrogateState state;
    double objective = 0.0;  // f1
};

struct AssocStep {
    Matrix association;
    SurrogateState state;
    double objective = 0.0;  // f2
};

/// Surrogate objective 2 b sqrt(u) - b^2 v for given (eta, D) at fixed (z, b),
/// with the surrogate SINRs and sum SE it implies.
struct SurrogateValue {
    double objective = 0.0;
    double surrogate_se = 0.0;
    SurrogateState state;
};
SurrogateValue surrogate_objective(const ProblemSpec& ps, const SinrModel& model, const Vector& eta,
                                   const Matrix& association, const Vector& z, double b);

/// Gradient of the surrogate objective in q = sqrt(eta) (D fixed) and in D (eta fixed).
Vector surrogate_gradient_q(const ProblemSpec& ps, const SinrModel& model, const Vector& q,
                            const Matrix& association, const Vector& z, double b);
Matrix surrogate_gradient_d(const ProblemSpec& ps, const SinrModel& model, const Vector& eta,
                            const Matrix& association, const Vector& z, double b);

/// Maximizes the surrogate over eta in [0,1]^T with D fixed, subject to the
/// surrogate sum-SE requirement. Never returns a point worse than `eta_init`.
EtaStep solve_eta_subproblem(const ProblemSpec& ps, const SinrModel& model, const Matrix& association,
                             const Vector& z, double b, const Vector& eta_init, const SolverSettings& s = {});

/// Same over the relaxed association with eta fixed and every column covering.
AssocStep solve_assoc_subproblem(const ProblemSpec& ps, const SinrModel& model, const Vector& eta,
                                 const Vector& z, double b, const Matrix& d_init, const SolverSettings& s = {});

/// Thresholding with coverage repair (argmax of the relaxed column).
Matrix round_association(const Matrix& relaxed, double threshold = 0.5);

/// Thresholding, coverage repair, then greedy re-activation of links in
/// descending relaxed value until the exact sum SE meets the requirement.
Matrix round_association(const ProblemSpec& ps, const Vector& eta, const Matrix& relaxed,
                         double threshold = 0.5, double qos_tol = 1e-8);

enum class SolveStatus { converged, infeasible, max_iters };
std::string_view to_string(SolveStatus status);

struct TraceRecord {
    int iteration = 0;
    double objective = 0.0;   // f2 (iteration 0: tight objective at the start point)
    double ee_reduced = 0.0;  // exact ratio without decoding power, relaxed iterate
    double ee = 0.0;          // exact full EE, relaxed iterate
    double sum_se = 0.0;
    double fractionality = 0.0;  // mean min(d, 1 - d)
    double eta_norm = 0.0;
    bool qos_ok = true;
};

struct SolveTrace {
    std::vector<TraceRecord> records;
    void write_csv(std::ostream& os) const;
};

struct Solution {
    Vector eta;
    Matrix association;  // binary
    double ee = 0.0;
    double sum_se = 0.0;
    int iterations = 0;
    SolveStatus status = SolveStatus::max_iters;
};

/// A binary association with its powers and exact metrics.
struct BinaryPoint {
    Vector eta;
    Matrix association;
    double ee = 0.0;
    double sum_se = 0.0;
};

/// Local improvement of a feasible binary point: eta is re-solved under the
/// grouping of the association, then single links are added, dropped or moved
/// to another AP while the exact sum SE meets the requirement. Each accepted
/// step strictly raises the exact EE.
BinaryPoint polish_binary(const ProblemSpec& ps, Vector eta, Matrix association, const SolverSettings& s = {});

/// Alternating maximization of the transformed problem from (eta0, D0).
Solution optimize(const ProblemSpec& ps, const Vector& eta0, const Matrix& d0, const SolverSettings& s = {},
                  SolveTrace* trace = nullptr);

}  // namespace dmimo
