#include "dmimo/fp_optimizer.hpp"

#include "dmimo/csv.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>
#include <tuple>

namespace dmimo {

namespace {

// log2(1 + x) continued linearly below the knee, and sqrt(u) continued
// linearly below a tiny positive knee. Both stay concave and nondecreasing, so
// composing them with the concave surrogates keeps the subproblems concave
// even where a surrogate SINR turns negative.
constexpr double kLogKnee = -0.5;
constexpr double kSqrtKnee = 1e-6;

double log_gain(double x) {
    if (x >= kLogKnee) return std::log2(1.0 + x);
    return std::log2(1.0 + kLogKnee) + (x - kLogKnee) / ((1.0 + kLogKnee) * std::numbers::ln2);
}

double log_gain_slope(double x) {
    return 1.0 / ((1.0 + std::max(x, kLogKnee)) * std::numbers::ln2);
}

double root(double u) {
    if (u >= kSqrtKnee) return std::sqrt(u);
    return std::sqrt(kSqrtKnee) + (u - kSqrtKnee) / (2.0 * std::sqrt(kSqrtKnee));
}

double root_slope(double u) { return 0.5 / std::sqrt(std::max(u, kSqrtKnee)); }

double mean_fractionality(const Matrix& d) {
    if (d.size() == 0) return 0.0;
    return d.unaryExpr([](double x) { return std::min(x, 1.0 - x); }).mean();
}

Matrix project_columns(const Matrix& d) {
    Matrix out(d.rows(), d.cols());
    for (Eigen::Index t = 0; t < d.cols(); ++t) out.col(t) = project_coverage(d.col(t));
    return out;
}

Vector clip_unit(const Vector& x) { return x.cwiseMax(0.0).cwiseMin(1.0); }

/// Objective value (penalized) and surrogate SE returned by one evaluation.
struct Probe {
    double value = 0.0;      // penalized objective
    double objective = 0.0;  // unpenalized 2 b sqrt(u) - b^2 v
    double surrogate_se = 0.0;
};

/// Monotone projected-gradient ascent with Armijo backtracking.
template <class Eval, class Project>
Vector ascend(Eval&& eval, Project&& project, Vector x, const SolverSettings& s) {
    Vector grad(x.size());
    Probe cur = eval(x, &grad);
    double step = 0.0;
    int stalls = 0;
    for (int it = 0; it < s.inner_max_iters; ++it) {
        const double gmax = grad.cwiseAbs().maxCoeff();
        if (!(gmax > 0.0)) break;
        const double scale = std::max(std::abs(cur.value), 1.0);
        if ((project(Vector(x + grad / scale)) - x).cwiseAbs().maxCoeff() <= s.inner_grad_tol) break;
        if (step == 0.0) step = 0.5 / gmax;
        const double floor = s.step_floor / gmax;
        bool accepted = false;
        Vector trial;
        Probe next;
        while (step >= floor) {
            trial = project(Vector(x + step * grad));
            next = eval(trial, nullptr);
            if (next.value >= cur.value + s.armijo * grad.dot(trial - x)) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;
        const double moved = (trial - x).cwiseAbs().maxCoeff();
        const double gain = next.value - cur.value;
        x = std::move(trial);
        cur = eval(x, &grad);
        step *= 2.0;
        if (moved <= s.step_floor) break;
        stalls = gain <= 1e-15 * std::abs(cur.value) ? stalls + 1 : 0;
        if (stalls >= 3) break;
    }
    return x;
}

/// Exact-penalty wrapper: maximizes F - lambda * max(0, qos - SE) for a
/// doubling lambda, pulls infeasible results back towards the feasible start
/// along the connecting segment, and keeps the best feasible point (the start
/// included), so the returned objective never drops below the start.
template <class Eval, class Project>
Vector penalized_ascent(Eval&& eval_at, Project&& project, const Vector& x0, double lambda0, double qos,
                        const SolverSettings& s) {
    auto plain = [&](const Vector& x) { return eval_at(x, 0.0, nullptr); };
    const double tol = s.qos_tol;
    auto violation = [&](const Probe& p) { return std::max(0.0, qos - p.surrogate_se); };

    const Probe start = plain(x0);
    const bool start_ok = violation(start) <= tol;
    Vector best = x0;
    double best_obj = start.objective;
    double best_violation = violation(start);

    auto consider = [&](const Vector& x) {
        const Probe p = plain(x);
        const double viol = violation(p);
        const bool ok = viol <= tol;
        if (ok && (best_violation > tol || p.objective > best_obj)) {
            best = x;
            best_obj = p.objective;
            best_violation = viol;
        } else if (!ok && best_violation > tol && viol < best_violation) {
            best = x;
            best_obj = p.objective;
            best_violation = viol;
        }
    };

    double lambda = lambda0;
    Vector x = x0;
    for (int k = 0; k <= s.penalty_doublings; ++k) {
        x = ascend([&](const Vector& y, Vector* g) { return eval_at(y, lambda, g); }, project, x, s);
        const Probe p = plain(x);
        if (violation(p) <= tol) {
            consider(x);
            break;
        }
        if (start_ok) {
            // The surrogate SE is concave, so the feasible part of the segment
            // [x0, x] is an interval starting at x0.
            double lo = 0.0;
            double hi = 1.0;
            for (int i = 0; i < 60; ++i) {
                const double mid = 0.5 * (lo + hi);
                const Vector y = x0 + mid * (x - x0);
                if (violation(plain(y)) <= tol) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            if (lo > 0.0) consider(project(Vector(x0 + lo * (x - x0))));
        } else {
            consider(x);
        }
        lambda *= 2.0;
    }
    return best;
}

SurrogateState make_state(const Vector& z, double b, Vector gamma_star, double prelog, double bandwidth,
                          double v) {
    SurrogateState st;
    st.z = z;
    st.b = b;
    double u = 0.0;
    for (Eigen::Index t = 0; t < gamma_star.size(); ++t) u += log_gain(gamma_star[t]);
    st.u = prelog * bandwidth * u;
    st.v = v;
    st.gamma_star = std::move(gamma_star);
    return st;
}

/// Eta block: D frozen, optimized in q = sqrt(eta).
struct EtaBlock {
    const ProblemSpec& ps;
    SinrModel::FrozenAssociation frozen;
    Vector z;
    double b;
    double rho;
    double v_const;  // fixed power plus the association-dependent circuit power
    double tx_scale;  // p_u / zeta

    EtaBlock(const ProblemSpec& p, const SinrModel& model, const Matrix& association, Vector z_in, double b_in)
        : ps(p), frozen(model.freeze_association(association)), z(std::move(z_in)), b(b_in), rho(model.rho()) {
        const Vector zero = Vector::Zero(ps.num_ues());
        v_const = fixed_power(ps.num_aps(), ps.num_ues(), ps.antennas, ps.energy) +
                  circuit_power(zero, ps.p_u, association, ps.antennas, ps.energy);
        tx_scale = ps.p_u / ps.energy.zeta;
    }

    Vector gamma_star(const Vector& q) const {
        const Vector eta = q.array().square();
        const Vector interference = rho * (frozen.coupling * eta) + frozen.noise;
        const double sr = std::sqrt(rho);
        Vector g(q.size());
        for (Eigen::Index t = 0; t < q.size(); ++t) {
            g[t] = 2.0 * z[t] * sr * q[t] * frozen.gain[t] - z[t] * z[t] * interference[t];
        }
        return g;
    }

    double denominator(const Vector& q) const { return v_const + tx_scale * q.squaredNorm(); }

    Probe eval(const Vector& q, double lambda, Vector* grad) const {
        const Vector gs = gamma_star(q);
        double sum_log = 0.0;
        for (Eigen::Index t = 0; t < gs.size(); ++t) sum_log += log_gain(gs[t]);
        const double wb = ps.w * ps.energy.bandwidth_hz;
        const double u = wb * sum_log;
        const double v = denominator(q);
        Probe p;
        p.objective = 2.0 * b * root(u) - b * b * v;
        p.surrogate_se = ps.w * sum_log;
        const double shortfall = ps.se_qos - p.surrogate_se;
        const bool active = lambda > 0.0 && shortfall > 0.0;
        p.value = p.objective - (active ? lambda * shortfall : 0.0);
        if (grad) {
            // Weight of each surrogate SINR in the objective.
            Vector weight(gs.size());
            const double du = 2.0 * b * root_slope(u) * wb + (active ? lambda * ps.w : 0.0);
            for (Eigen::Index t = 0; t < gs.size(); ++t) weight[t] = du * log_gain_slope(gs[t]);
            const double sr = std::sqrt(rho);
            const Vector wz2 = weight.cwiseProduct(z.cwiseProduct(z));
            const Vector cross = frozen.coupling.transpose() * wz2;
            *grad = 2.0 * sr * weight.cwiseProduct(z).cwiseProduct(frozen.gain) -
                    2.0 * rho * q.cwiseProduct(cross) - 2.0 * b * b * tx_scale * q;
        }
        return p;
    }
};

/// Association block: eta frozen, variables are the relaxed d_mt.
struct AssocBlock {
    const ProblemSpec& ps;
    const SinrModel& model;
    Vector eta;
    Vector z;
    double b;
    Matrix diagonal;  // W(m, t): d_mt^2 coefficients of I_t
    Vector coherent;  // sqrt(rho eta_t)
    double v_const;   // fixed power plus transmit power
    double link_cost;

    AssocBlock(const ProblemSpec& p, const SinrModel& m, Vector eta_in, Vector z_in, double b_in)
        : ps(p), model(m), eta(std::move(eta_in)), z(std::move(z_in)), b(b_in) {
        diagonal = model.frozen_power_diagonal(eta);
        coherent = (model.rho() * eta.array()).sqrt().matrix();
        const Matrix none = Matrix::Zero(ps.num_aps(), ps.num_ues());
        v_const = fixed_power(ps.num_aps(), ps.num_ues(), ps.antennas, ps.energy) +
                  circuit_power(eta, ps.p_u, none, ps.antennas, ps.energy);
        link_cost = ps.energy.link_power(ps.antennas);
    }

    static Matrix unflatten(const Vector& x, Eigen::Index rows, Eigen::Index cols) {
        return Eigen::Map<const Matrix>(x.data(), rows, cols);
    }

    double gamma_star(const Matrix& d, int t, Vector* leak_sums) const {
        const auto col = d.col(t);
        double gain = 0.0;
        for (Eigen::Index m = 0; m < d.rows(); ++m) gain += col[m] * model.signal(static_cast<int>(m), t);
        double interference = col.array().square().matrix().dot(diagonal.col(t));
        const auto& sharers = model.sharers_of(t);
        if (leak_sums) leak_sums->resize(static_cast<Eigen::Index>(sharers.size()));
        for (std::size_t k = 0; k < sharers.size(); ++k) {
            double c = 0.0;
            for (Eigen::Index m = 0; m < d.rows(); ++m) {
                c += col[m] * model.leakage(t, static_cast<int>(k), static_cast<int>(m));
            }
            if (leak_sums) (*leak_sums)[static_cast<Eigen::Index>(k)] = c;
            interference += model.rho() * eta[sharers[k]] * c * c;
        }
        return 2.0 * z[t] * coherent[t] * gain - z[t] * z[t] * interference;
    }

    Probe eval_matrix(const Matrix& d, double lambda, Matrix* grad) const {
        const int T = ps.num_ues();
        const int M = ps.num_aps();
        Vector gs(T);
        std::vector<Vector> leak_sums(T);
        for (int t = 0; t < T; ++t) gs[t] = gamma_star(d, t, grad ? &leak_sums[t] : nullptr);
        double sum_log = 0.0;
        for (int t = 0; t < T; ++t) sum_log += log_gain(gs[t]);
        const double wb = ps.w * ps.energy.bandwidth_hz;
        const double u = wb * sum_log;
        const double v = v_const + link_cost * d.sum();
        Probe p;
        p.objective = 2.0 * b * root(u) - b * b * v;
        p.surrogate_se = ps.w * sum_log;
        const double shortfall = ps.se_qos - p.surrogate_se;
        const bool active = lambda > 0.0 && shortfall > 0.0;
        p.value = p.objective - (active ? lambda * shortfall : 0.0);
        if (grad) {
            grad->resize(M, T);
            const double du = 2.0 * b * root_slope(u) * wb + (active ? lambda * ps.w : 0.0);
            const double cost = b * b * link_cost;
            for (int t = 0; t < T; ++t) {
                const double weight = du * log_gain_slope(gs[t]);
                const auto& sharers = model.sharers_of(t);
                for (int m = 0; m < M; ++m) {
                    double di = 2.0 * d(m, t) * diagonal(m, t);
                    for (std::size_t k = 0; k < sharers.size(); ++k) {
                        di += 2.0 * model.rho() * eta[sharers[k]] * leak_sums[t][static_cast<Eigen::Index>(k)] *
                              model.leakage(t, static_cast<int>(k), m);
                    }
                    const double dg = 2.0 * z[t] * coherent[t] * model.signal(m, t) - z[t] * z[t] * di;
                    (*grad)(m, t) = weight * dg - cost;
                }
            }
        }
        return p;
    }

    Probe eval(const Vector& x, double lambda, Vector* grad) const {
        const Matrix d = unflatten(x, ps.num_aps(), ps.num_ues());
        if (!grad) return eval_matrix(d, lambda, nullptr);
        Matrix g;
        const Probe p = eval_matrix(d, lambda, &g);
        *grad = Eigen::Map<const Vector>(g.data(), g.size());
        return p;
    }
};

}  // namespace

void SolverSettings::validate() const {
    if (!(eps > 0.0)) throw ConfigError("solver.eps", "must be positive");
    if (max_iters < 1) throw ConfigError("solver.max_iters", "must be at least 1");
    if (!(round_threshold > 0.0 && round_threshold <= 1.0)) {
        throw ConfigError("solver.round_threshold", "must lie in (0, 1]");
    }
    if (inner_max_iters < 1) throw ConfigError("solver.inner_max_iters", "must be at least 1");
    if (!(qos_tol >= 0.0)) throw ConfigError("solver.qos_tol", "must be non-negative");
    if (polish_rounds < 0) throw ConfigError("solver.polish_rounds", "must be non-negative");
    if (polish_candidates < 0) throw ConfigError("solver.polish_candidates", "must be non-negative");
}

Vector update_z(const SINRBreakdown& terms) {
    Vector z(terms.ds.size());
    for (Eigen::Index t = 0; t < z.size(); ++t) {
        if (terms.i[t] > 0.0) {
            z[t] = std::sqrt(terms.ds[t]) / terms.i[t];
        } else if (terms.ds[t] > 0.0) {
            throw DegenerateInterference("UE " + std::to_string(t) + " has signal but no interference or noise");
        } else {
            z[t] = 0.0;
        }
    }
    return z;
}

double update_b(const Vector& gamma_star, double denominator_w, double prelog, double bandwidth_hz) {
    if (!(denominator_w > 0.0)) throw std::invalid_argument("update_b: denominator must be positive");
    double sum_log = 0.0;
    for (Eigen::Index t = 0; t < gamma_star.size(); ++t) sum_log += std::log2(1.0 + gamma_star[t]);
    return std::sqrt(prelog * bandwidth_hz * sum_log) / denominator_w;
}

Vector project_coverage(const Vector& column) {
    Vector x = clip_unit(column);
    if (x.size() == 0 || x.sum() >= 1.0) return x;
    // Find tau >= 0 with sum clip(c + tau, 0, 1) = 1; the sum is nondecreasing in tau.
    auto mass = [&](double tau) { return clip_unit((column.array() + tau).matrix()).sum(); };
    double lo = 0.0;
    double hi = 1.0 - column.minCoeff();
    for (int i = 0; i < 200 && hi - lo > 0.0; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (mass(mid) < 1.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return clip_unit((column.array() + hi).matrix());
}

SurrogateValue surrogate_objective(const ProblemSpec& ps, const SinrModel& model, const Vector& eta,
                                   const Matrix& association, const Vector& z, double b) {
    const SINRBreakdown terms = model.evaluate(eta, association);
    Vector gs(eta.size());
    for (Eigen::Index t = 0; t < gs.size(); ++t) gs[t] = sinr_surrogate(z[t], terms.ds[t], terms.i[t]);
    const double v = fixed_power(ps.num_aps(), ps.num_ues(), ps.antennas, ps.energy) +
                     circuit_power(eta, ps.p_u, association, ps.antennas, ps.energy);
    SurrogateValue out;
    out.state = make_state(z, b, gs, ps.w, ps.energy.bandwidth_hz, v);
    out.objective = 2.0 * b * root(out.state.u) - b * b * v;
    out.surrogate_se = out.state.u / ps.energy.bandwidth_hz;
    return out;
}

Vector surrogate_gradient_q(const ProblemSpec& ps, const SinrModel& model, const Vector& q,
                            const Matrix& association, const Vector& z, double b) {
    const EtaBlock block(ps, model, association, z, b);
    Vector g;
    block.eval(q, 0.0, &g);
    return g;
}

Matrix surrogate_gradient_d(const ProblemSpec& ps, const SinrModel& model, const Vector& eta,
                            const Matrix& association, const Vector& z, double b) {
    const AssocBlock block(ps, model, eta, z, b);
    Matrix g;
    block.eval_matrix(association, 0.0, &g);
    return g;
}

EtaStep solve_eta_subproblem(const ProblemSpec& ps, const SinrModel& model, const Matrix& association,
                             const Vector& z, double b, const Vector& eta_init, const SolverSettings& s) {
    const EtaBlock block(ps, model, association, z, b);
    const Vector q0 = clip_unit(eta_init).cwiseSqrt();
    if (ps.se_qos - block.eval(q0, 0.0, nullptr).surrogate_se > s.qos_tol) {
        const Vector full = Vector::Ones(q0.size());
        if (ps.se_qos - block.eval(full, 0.0, nullptr).surrogate_se > s.qos_tol) {
            throw QoSInfeasible("surrogate sum SE at full power is below the requirement");
        }
    }
    const double lambda0 = 10.0 * ps.energy.bandwidth_hz / block.denominator(q0);
    const Vector q = penalized_ascent([&](const Vector& x, double lambda, Vector* g) { return block.eval(x, lambda, g); },
                                      [](const Vector& x) { return clip_unit(x); }, q0, lambda0, ps.se_qos, s);
    EtaStep out;
    out.eta = q.array().square();
    const Probe p = block.eval(q, 0.0, nullptr);
    out.objective = p.objective;
    out.state = make_state(z, b, block.gamma_star(q), ps.w, ps.energy.bandwidth_hz, block.denominator(q));
    return out;
}

AssocStep solve_assoc_subproblem(const ProblemSpec& ps, const SinrModel& model, const Vector& eta,
                                 const Vector& z, double b, const Matrix& d_init, const SolverSettings& s) {
    const AssocBlock block(ps, model, eta, z, b);
    const Eigen::Index M = ps.num_aps();
    const Eigen::Index T = ps.num_ues();
    const Matrix d0 = project_columns(d_init);
    const Vector x0 = Eigen::Map<const Vector>(d0.data(), d0.size());
    if (ps.se_qos - block.eval(x0, 0.0, nullptr).surrogate_se > s.qos_tol) {
        const Vector full = Vector::Ones(x0.size());
        if (ps.se_qos - block.eval(full, 0.0, nullptr).surrogate_se > s.qos_tol) {
            throw QoSInfeasible("surrogate sum SE with full association is below the requirement");
        }
    }
    auto project = [M, T](const Vector& x) {
        const Matrix p = project_columns(AssocBlock::unflatten(x, M, T));
        return Vector(Eigen::Map<const Vector>(p.data(), p.size()));
    };
    const double v0 = block.v_const + block.link_cost * d0.sum();
    const double lambda0 = 10.0 * ps.energy.bandwidth_hz / v0;
    const Vector x = penalized_ascent([&](const Vector& y, double lambda, Vector* g) { return block.eval(y, lambda, g); },
                                      project, x0, lambda0, ps.se_qos, s);
    AssocStep out;
    out.association = AssocBlock::unflatten(x, M, T);
    out.objective = block.eval(x, 0.0, nullptr).objective;
    Vector gs(T);
    for (int t = 0; t < T; ++t) gs[t] = block.gamma_star(out.association, t, nullptr);
    out.state = make_state(z, b, gs, ps.w, ps.energy.bandwidth_hz, block.v_const + block.link_cost * out.association.sum());
    return out;
}

Matrix round_association(const Matrix& relaxed, double threshold) {
    Matrix d = (relaxed.array() >= threshold).cast<double>();
    for (Eigen::Index t = 0; t < d.cols(); ++t) {
        if (d.col(t).sum() < 1.0) {
            Eigen::Index best = 0;
            relaxed.col(t).maxCoeff(&best);
            d(best, t) = 1.0;
        }
    }
    return d;
}

Matrix round_association(const ProblemSpec& ps, const Vector& eta, const Matrix& relaxed, double threshold,
                         double qos_tol) {
    Matrix d = round_association(relaxed, threshold);
    if (evaluate_binary(ps, eta, d).se.sum >= ps.se_qos - qos_tol) return d;

    struct Link {
        Eigen::Index m, t;
        double value;
    };
    std::vector<Link> inactive;
    for (Eigen::Index t = 0; t < d.cols(); ++t) {
        for (Eigen::Index m = 0; m < d.rows(); ++m) {
            if (d(m, t) == 0.0) inactive.push_back({m, t, relaxed(m, t)});
        }
    }
    std::stable_sort(inactive.begin(), inactive.end(), [](const Link& a, const Link& b) { return a.value > b.value; });
    for (const Link& link : inactive) {
        d(link.m, link.t) = 1.0;
        if (evaluate_binary(ps, eta, d).se.sum >= ps.se_qos - qos_tol) return d;
    }
    throw RoundingInfeasible("sum SE requirement missed even with every link active");
}

std::string_view to_string(SolveStatus status) {
    switch (status) {
        case SolveStatus::converged: return "converged";
        case SolveStatus::infeasible: return "infeasible";
        case SolveStatus::max_iters: return "max_iters";
    }
    return "unknown";
}

void SolveTrace::write_csv(std::ostream& os) const {
    csv::write_row(os, {"iteration", "objective", "ee_reduced", "ee", "sum_se", "fractionality", "eta_norm", "qos_ok"});
    for (const auto& r : records) {
        csv::write_row(os, {std::to_string(r.iteration), csv::format_double(r.objective),
                            csv::format_double(r.ee_reduced), csv::format_double(r.ee), csv::format_double(r.sum_se),
                            csv::format_double(r.fractionality), csv::format_double(r.eta_norm),
                            r.qos_ok ? "1" : "0"});
    }
}

BinaryPoint polish_binary(const ProblemSpec& ps, Vector eta, Matrix d, const SolverSettings& s) {
    const int M = ps.num_aps();
    const int T = ps.num_ues();
    auto meets = [&](const Evaluation& ev) { return ev.se.sum >= ps.se_qos - s.qos_tol; };
    Evaluation cur = evaluate_binary(ps, eta, d);
    auto result = [&] { return BinaryPoint{eta, d, cur.ee, cur.se.sum}; };
    if (!meets(cur)) return result();

    const int width = s.polish_candidates > 0 ? std::min(s.polish_candidates, M) : M;
    std::vector<std::vector<int>> candidates(T);
    for (int t = 0; t < T; ++t) {
        std::vector<int> order(M);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](int a, int b) { return ps.lsfc.beta(a, t) > ps.lsfc.beta(b, t); });
        candidates[t].assign(order.begin(), order.begin() + width);
    }

    for (int round = 0; round < s.polish_rounds; ++round) {
        bool improved = false;

        const Grouping grouping = classify_users(ps.lsfc.beta, d, ps.pilots, ps.nu, ps.antennas, ps.pilot_length);
        const LSFDWeights weights = lsfd_weights(ps.lsfc.gamma, grouping, d, ps.lsfd_mode);
        const SinrModel model(ps.lsfc, ps.pilots, grouping, weights, ps.antennas, ps.rho());
        for (int k = 0; k < s.max_iters; ++k) {
            const Vector z = update_z(cur.terms);
            const double b = update_b(cur.terms.sinr, cur.p_fixed + cur.p_circuit, ps.w, ps.energy.bandwidth_hz);
            Vector next;
            try {
                next = solve_eta_subproblem(ps, model, d, z, b, eta, s).eta;
            } catch (const QoSInfeasible&) {
                break;
            }
            const Evaluation ev = evaluate_relaxed(ps, model, next, d);
            if (!meets(ev) || !(ev.ee > cur.ee)) break;
            const double gain = (ev.ee - cur.ee) / cur.ee;
            eta = std::move(next);
            cur = ev;
            improved = true;
            if (gain <= s.eps * 1e-3) break;
        }

        Matrix best_d;
        Evaluation best = cur;
        auto consider = [&](const Matrix& trial) {
            const Evaluation ev = evaluate_binary(ps, eta, trial);
            if (meets(ev) && ev.ee > best.ee) {
                best = ev;
                best_d = trial;
            }
        };
        Matrix trial = d;
        for (int t = 0; t < T; ++t) {
            const std::vector<int>& targets = candidates[t];
            const double served = d.col(t).sum();
            for (int m : targets) {
                if (d(m, t) != 0.0) continue;
                trial(m, t) = 1.0;
                consider(trial);
                trial(m, t) = 0.0;
            }
            for (int m = 0; m < M; ++m) {
                if (d(m, t) == 0.0) continue;
                trial(m, t) = 0.0;
                if (served > 1.0) consider(trial);
                for (int k : targets) {
                    if (d(k, t) != 0.0) continue;
                    trial(k, t) = 1.0;
                    consider(trial);
                    trial(k, t) = 0.0;
                }
                trial(m, t) = 1.0;
            }
        }
        if (best_d.size() > 0) {
            d = std::move(best_d);
            cur = best;
            improved = true;
        }
        if (!improved) break;
    }
    return result();
}

Solution optimize(const ProblemSpec& ps, const Vector& eta0, const Matrix& d0, const SolverSettings& s,
                  SolveTrace* trace) {
    s.validate();
    const SinrModel model = candidate_model(ps);
    const int M = ps.num_aps();
    const int T = ps.num_ues();
    const double bandwidth = ps.energy.bandwidth_hz;

    Solution sol;
    sol.eta = clip_unit(eta0);
    sol.association = round_association(d0, s.round_threshold);

    // The requirement is probed at full power on a few reference associations.
    // Full association is not always the best: pilot contamination can make a
    // user-centric association reach a higher sum SE.
    const Vector full_eta = Vector::Ones(T);
    Vector eta = clip_unit(eta0);
    Matrix d = project_columns(d0);
    const Matrix references[] = {
        d,
        Matrix::Ones(M, T),
        initial_association(ps.lsfc.beta, AssociationScheme::lsfc95),
        initial_association(ps.lsfc.beta, AssociationScheme::top10_aps_per_ue),
    };
    auto sum_se = [&](const Vector& e, const Matrix& a) { return evaluate_relaxed(ps, model, e, a).se.sum; };
    const Matrix* target = nullptr;
    double target_se = -1.0;
    for (const Matrix& r : references) {
        const double se = sum_se(full_eta, r);
        if (se > target_se) {
            target_se = se;
            target = &r;
        }
    }
    if (target_se < ps.se_qos - s.qos_tol) {
        sol.status = SolveStatus::infeasible;
        return sol;
    }

    auto feasible = [&](const Vector& e, const Matrix& a) { return sum_se(e, a) >= ps.se_qos - s.qos_tol; };
    if (!feasible(eta, d)) {
        // Slide towards the best reference until the requirement holds.
        const Matrix full_d = *target;
        auto blend = [&](double theta) {
            return std::pair<Vector, Matrix>{eta + theta * (full_eta - eta), d + theta * (full_d - d)};
        };
        constexpr int kGrid = 64;
        double lo = 0.0;
        double hi = 1.0;
        for (int k = 1; k <= kGrid; ++k) {
            const auto [e, a] = blend(static_cast<double>(k) / kGrid);
            if (feasible(e, a)) {
                hi = static_cast<double>(k) / kGrid;
                break;
            }
            lo = static_cast<double>(k) / kGrid;
        }
        for (int i = 0; i < 40; ++i) {
            const double mid = 0.5 * (lo + hi);
            const auto [e, a] = blend(mid);
            if (feasible(e, a)) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        std::tie(eta, d) = blend(hi);
    }

    auto record = [&](int it, double objective, const Evaluation& ev) {
        if (!trace) return;
        TraceRecord r;
        r.iteration = it;
        r.objective = objective;
        r.ee_reduced = ev.ee_reduced;
        r.ee = ev.ee;
        r.sum_se = ev.se.sum;
        r.fractionality = mean_fractionality(d);
        r.eta_norm = eta.norm();
        r.qos_ok = ev.se.sum >= ps.se_qos - s.qos_tol;
        trace->records.push_back(r);
    };

    Evaluation ev = evaluate_relaxed(ps, model, eta, d);
    double previous = ev.ee_reduced;
    record(0, previous, ev);

    bool converged = false;
    int it = 0;
    while (it < s.max_iters) {
        ++it;
        Vector z = update_z(ev.terms);
        double b = update_b(ev.terms.sinr, ev.p_fixed + ev.p_circuit, ps.w, bandwidth);
        eta = solve_eta_subproblem(ps, model, d, z, b, eta, s).eta;

        ev = evaluate_relaxed(ps, model, eta, d);
        z = update_z(ev.terms);
        b = update_b(ev.terms.sinr, ev.p_fixed + ev.p_circuit, ps.w, bandwidth);
        const AssocStep step = solve_assoc_subproblem(ps, model, eta, z, b, d, s);
        d = step.association;

        ev = evaluate_relaxed(ps, model, eta, d);
        record(it, step.objective, ev);
        const double prior = previous;
        previous = step.objective;
        if (std::abs(step.objective - prior) <= s.eps * std::abs(prior)) {
            converged = true;
            break;
        }
    }

    sol.iterations = it;
    sol.eta = eta;
    try {
        sol.association = round_association(ps, eta, d, s.round_threshold, s.qos_tol);
    } catch (const RoundingInfeasible&) {
        sol.association = round_association(d, s.round_threshold);
        sol.sum_se = evaluate_binary(ps, eta, sol.association).se.sum;
        sol.ee = 0.0;
        sol.status = SolveStatus::infeasible;
        return sol;
    }
    const BinaryPoint polished = polish_binary(ps, eta, sol.association, s);
    sol.eta = polished.eta;
    sol.association = polished.association;
    sol.ee = polished.ee;
    sol.sum_se = polished.sum_se;
    sol.status = converged ? SolveStatus::converged : SolveStatus::max_iters;
    return sol;
}

}  // namespace dmimo
