#include "dmimo/problem.hpp"

#include <random>

namespace dmimo {

namespace {

Evaluation finish(const ProblemSpec& ps, SINRBreakdown terms, const Vector& eta, const Matrix& association) {
    Evaluation ev;
    ev.terms = std::move(terms);
    ev.se = sum_se(ev.terms, ps.w);
    ev.p_fixed = fixed_power(ps.num_aps(), ps.num_ues(), ps.antennas, ps.energy);
    ev.p_circuit = circuit_power(eta, ps.p_u, association, ps.antennas, ps.energy);
    const double throughput = ps.energy.bandwidth_hz * ev.se.sum;
    ev.p_total = total_power(ev.p_fixed, ev.p_circuit, throughput, ps.energy);
    ev.ee = energy_efficiency(ev.se.sum, ev.p_total, ps.energy.bandwidth_hz);
    ev.ee_reduced = energy_efficiency(ev.se.sum, ev.p_fixed + ev.p_circuit, ps.energy.bandwidth_hz);
    return ev;
}

}  // namespace

void SystemConfig::validate() const {
    geometry.validate();
    energy.validate();
    if (!(p_u_w > 0.0)) throw ConfigError("power.p_u_w", "must be positive");
    if (!(p_p_w > 0.0)) throw ConfigError("power.p_p_w", "must be positive");
    if (!(nu >= 0.0 && nu <= 1.0)) throw ConfigError("model.nu", "must lie in [0, 1]");
}

ProblemSpec make_problem(LSFCMatrix lsfc, PilotAssignment pilots, const EnergyConstants& energy,
                         int antennas, int pilot_length, double prelog, double p_u, double sigma2,
                         double se_qos, double nu, LsfdMode lsfd_mode) {
    ProblemSpec ps;
    const Matrix candidates = Matrix::Ones(lsfc.beta.rows(), lsfc.beta.cols());
    ps.grouping = classify_users(lsfc.beta, candidates, pilots, nu, antennas, pilot_length);
    ps.weights = lsfd_weights(lsfc.gamma, ps.grouping, candidates, lsfd_mode);
    ps.lsfc = std::move(lsfc);
    ps.pilots = std::move(pilots);
    ps.energy = energy;
    ps.antennas = antennas;
    ps.pilot_length = pilot_length;
    ps.se_qos = se_qos;
    ps.w = prelog;
    ps.p_u = p_u;
    ps.sigma2 = sigma2;
    ps.nu = nu;
    ps.lsfd_mode = lsfd_mode;
    return ps;
}

ProblemSpec draw_problem(const SystemConfig& cfg, double se_qos, std::uint64_t seed) {
    cfg.validate();
    GeometryConfig g = cfg.geometry;
    g.rng_seed = seed;
    const Deployment dep = place_network(g);
    LSFCMatrix lsfc = compute_lsfc(dep, g);
    PilotAssignment pilots = assign_pilots(lsfc.beta, g.pilot_length, cfg.pilot_scheme, make_stream(seed, 4)());
    const double sigma2 = cfg.sigma2();
    lsfc.gamma = estimation_quality(lsfc.beta, pilots, cfg.p_p_w, g.pilot_length, sigma2);
    ProblemSpec ps = make_problem(std::move(lsfc), std::move(pilots), cfg.energy, g.antennas_per_ap,
                                  g.pilot_length, cfg.prelog(), cfg.p_u_w, sigma2, se_qos, cfg.nu, cfg.lsfd_mode);
    ps.p_p = cfg.p_p_w;
    return ps;
}

SinrModel candidate_model(const ProblemSpec& ps) {
    return SinrModel(ps.lsfc, ps.pilots, ps.grouping, ps.weights, ps.antennas, ps.rho());
}

Evaluation evaluate_relaxed(const ProblemSpec& ps, const SinrModel& model, const Vector& eta,
                            const Matrix& association) {
    return finish(ps, model.evaluate(eta, association), eta, association);
}

Evaluation evaluate_binary(const ProblemSpec& ps, const Vector& eta, const Matrix& association) {
    const Grouping grouping =
        classify_users(ps.lsfc.beta, association, ps.pilots, ps.nu, ps.antennas, ps.pilot_length);
    const LSFDWeights weights = lsfd_weights(ps.lsfc.gamma, grouping, association, ps.lsfd_mode);
    const SinrModel model(ps.lsfc, ps.pilots, grouping, weights, ps.antennas, ps.rho());
    return finish(ps, model.evaluate(eta, association), eta, association);
}

}  // namespace dmimo
