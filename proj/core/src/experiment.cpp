#include "dmimo/experiment.hpp"

#include "dmimo/csv.hpp"
#include "parallel.hpp"

#include "json.hpp"

#include <algorithm>
#include <chrono>
#include <random>
#include <ostream>

namespace dmimo {

namespace {

constexpr std::uint64_t kRealizationStream = 0x7265616cULL;
constexpr std::uint64_t kInitStream = 0x696e6974ULL;

struct RunOutcome {
    Solution solution;
    double runtime_s = 0.0;
};

RunOutcome solve_once(const ExperimentConfig& cfg, const SystemConfig& sys, double qos, std::uint64_t seed,
                      AssociationScheme scheme, double eta_init, SolveTrace* trace = nullptr) {
    const auto start = std::chrono::steady_clock::now();
    const ProblemSpec ps = draw_problem(sys, qos, seed);
    const Matrix d0 = initial_association(ps.lsfc.beta, scheme, make_stream(seed, kInitStream)());
    const Vector eta0 = Vector::Constant(ps.num_ues(), eta_init);
    RunOutcome out;
    out.solution = optimize(ps, eta0, d0, cfg.solver, trace);
    if (out.solution.status == SolveStatus::infeasible) out.solution.ee = 0.0;
    out.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

std::vector<std::string> point_cells(const std::vector<double>& point) {
    std::vector<std::string> cells;
    cells.reserve(point.size());
    for (double v : point) cells.push_back(csv::format_double(v));
    return cells;
}

std::string setting_name(double eta) { return csv::format_double(eta); }

}  // namespace

std::uint64_t realization_seed(std::uint64_t master, int realization) {
    return make_stream(master, kRealizationStream + static_cast<std::uint64_t>(realization))();
}

std::vector<PointSummary> SweepResult::aggregate() const {
    std::vector<PointSummary> out;
    for (const auto& r : runs) {
        if (out.empty() || out.back().point != r.point) {
            out.push_back({});
            out.back().point = r.point;
        }
        auto& s = out.back();
        ++s.realizations;
        if (r.status == SolveStatus::infeasible) ++s.infeasible;
        s.mean_ee += r.ee;
        s.mean_sum_se += r.sum_se;
        s.mean_iterations += r.iterations;
    }
    for (auto& s : out) {
        s.mean_ee /= s.realizations;
        s.mean_sum_se /= s.realizations;
        s.mean_iterations /= s.realizations;
    }
    return out;
}

void SweepResult::write_long_csv(std::ostream& os) const {
    std::vector<std::string> header = axes;
    header.insert(header.end(), {"realization", "seed", "status", "ee", "sum_se", "iterations"});
    csv::write_row(os, header);
    for (const auto& r : runs) {
        auto cells = point_cells(r.point);
        cells.insert(cells.end(), {std::to_string(r.realization), std::to_string(r.seed),
                                   std::string(to_string(r.status)), csv::format_double(r.ee),
                                   csv::format_double(r.sum_se), std::to_string(r.iterations)});
        csv::write_row(os, cells);
    }
}

void SweepResult::write_mean_csv(std::ostream& os) const {
    std::vector<std::string> header = axes;
    header.insert(header.end(), {"realizations", "infeasible", "mean_ee", "mean_sum_se", "mean_iterations"});
    csv::write_row(os, header);
    for (const auto& s : aggregate()) {
        auto cells = point_cells(s.point);
        cells.insert(cells.end(), {std::to_string(s.realizations), std::to_string(s.infeasible),
                                   csv::format_double(s.mean_ee), csv::format_double(s.mean_sum_se),
                                   csv::format_double(s.mean_iterations)});
        csv::write_row(os, cells);
    }
}

void SweepResult::write_runtime_csv(std::ostream& os) const {
    std::vector<std::string> header = axes;
    header.insert(header.end(), {"realization", "runtime_s"});
    csv::write_row(os, header);
    for (const auto& r : runs) {
        auto cells = point_cells(r.point);
        cells.insert(cells.end(), {std::to_string(r.realization), csv::format_double(r.runtime_s)});
        csv::write_row(os, cells);
    }
}

SweepResult run_sweep(const ExperimentConfig& cfg) {
    cfg.validate();
    SweepResult result;
    for (const auto& axis : cfg.sweep) result.axes.emplace_back(to_string(axis.variable));
    const std::size_t points = cfg.grid_size();
    const auto reps = static_cast<std::size_t>(cfg.realizations);
    result.runs.resize(points * reps);

    detail::parallel_for(points * reps, cfg.workers, [&](std::size_t task) {
        const std::size_t g = task / reps;
        const int r = static_cast<int>(task % reps);
        const std::vector<double> point = cfg.grid_point(g);
        SystemConfig sys;
        double qos = 0.0;
        cfg.apply_point(point, sys, qos);
        const std::uint64_t seed = realization_seed(cfg.seed, r);
        const RunOutcome out = solve_once(cfg, sys, qos, seed, cfg.init_scheme, cfg.eta_init);

        RunRecord& rec = result.runs[task];
        rec.point = point;
        rec.realization = r;
        rec.seed = seed;
        rec.status = out.solution.status;
        rec.ee = out.solution.ee;
        rec.sum_se = out.solution.sum_se;
        rec.iterations = out.solution.iterations;
        rec.runtime_s = out.runtime_s;
    });
    return result;
}

TraceRun convergence_trace(const ExperimentConfig& cfg) {
    cfg.validate();
    SystemConfig sys;
    double qos = 0.0;
    cfg.apply_point(cfg.grid_point(0), sys, qos);
    TraceRun run;
    run.solution =
        solve_once(cfg, sys, qos, realization_seed(cfg.seed, 0), cfg.init_scheme, cfg.eta_init, &run.trace).solution;
    return run;
}

const std::vector<AssociationScheme>& robustness_schemes() {
    static const std::vector<AssociationScheme> schemes = {
        AssociationScheme::top10_aps_per_ue, AssociationScheme::top10_ues_per_ap, AssociationScheme::all,
        AssociationScheme::lsfc95, AssociationScheme::random};
    return schemes;
}

const std::vector<double>& robustness_eta_inits() {
    static const std::vector<double> values = {0.01, 0.25, 0.5, 0.75, 1.0};
    return values;
}

std::vector<std::pair<std::string, double>> RobustnessResult::means(const std::string& family) const {
    std::vector<std::pair<std::string, double>> out;
    std::vector<int> counts;
    for (const auto& row : rows) {
        if (row.family != family) continue;
        auto it = std::find_if(out.begin(), out.end(), [&](const auto& p) { return p.first == row.setting; });
        if (it == out.end()) {
            out.emplace_back(row.setting, 0.0);
            counts.push_back(0);
            it = out.end() - 1;
        }
        it->second += row.ee;
        ++counts[static_cast<std::size_t>(it - out.begin())];
    }
    for (std::size_t k = 0; k < out.size(); ++k) out[k].second /= counts[k];
    return out;
}

double RobustnessResult::relative_spread(const std::string& family) const {
    const auto m = means(family);
    if (m.empty()) return 0.0;
    double lo = m.front().second;
    double hi = lo;
    double sum = 0.0;
    for (const auto& [name, v] : m) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
        sum += v;
    }
    const double mean = sum / static_cast<double>(m.size());
    return mean > 0.0 ? (hi - lo) / mean : 0.0;
}

void RobustnessResult::write_csv(std::ostream& os) const {
    csv::write_row(os, {"family", "setting", "realization", "status", "ee", "sum_se", "iterations"});
    for (const auto& r : rows) {
        csv::write_row(os, {r.family, r.setting, std::to_string(r.realization), std::string(to_string(r.status)),
                            csv::format_double(r.ee), csv::format_double(r.sum_se), std::to_string(r.iterations)});
    }
}

RobustnessResult robustness_study(const ExperimentConfig& cfg) {
    cfg.validate();
    SystemConfig sys;
    double qos = 0.0;
    cfg.apply_point(cfg.grid_point(0), sys, qos);

    struct Task {
        std::string family;
        std::string setting;
        AssociationScheme scheme;
        double eta;
    };
    std::vector<Task> settings;
    for (auto scheme : robustness_schemes()) settings.push_back({"association", std::string(to_string(scheme)), scheme, 1.0});
    for (double eta : robustness_eta_inits()) {
        settings.push_back({"eta_init", setting_name(eta), AssociationScheme::lsfc95, eta});
    }

    const auto reps = static_cast<std::size_t>(cfg.realizations);
    RobustnessResult result;
    result.rows.resize(settings.size() * reps);
    detail::parallel_for(result.rows.size(), cfg.workers, [&](std::size_t task) {
        const Task& st = settings[task / reps];
        const int r = static_cast<int>(task % reps);
        const Solution sol = solve_once(cfg, sys, qos, realization_seed(cfg.seed, r), st.scheme, st.eta).solution;
        result.rows[task] = {st.family, st.setting, r, sol.status, sol.ee, sol.sum_se, sol.iterations};
    });
    return result;
}

MCReport validation_study(const ExperimentConfig& cfg) {
    cfg.validate();
    SystemConfig sys = cfg.system;
    sys.geometry.num_aps = 4;
    sys.geometry.num_ues = 4;
    sys.geometry.pilot_length = 2;
    sys.geometry.side_m = 250.0;

    std::vector<MCReport> parts(static_cast<std::size_t>(cfg.mc_configs));
    for (int c = 0; c < cfg.mc_configs; ++c) {
        const std::uint64_t seed = realization_seed(cfg.seed, c);
        const ProblemSpec ps = draw_problem(sys, 0.0, seed);
        auto rng = make_stream(seed, kInitStream);
        const Matrix d = initial_association(ps.lsfc.beta, AssociationScheme::random, rng());
        std::uniform_real_distribution<double> power(0.05, 1.0);
        Vector eta(ps.num_ues());
        for (auto& e : eta) e = power(rng);

        MCConfig mc = cfg.mc;
        mc.rng_seed = make_stream(cfg.mc.rng_seed, static_cast<std::uint64_t>(c))();
        MCReport& part = parts[static_cast<std::size_t>(c)];
        for (int m = 0; m < ps.num_aps(); ++m) {
            MCConfig row_mc = mc;
            row_mc.rng_seed = make_stream(mc.rng_seed, 1000 + static_cast<std::uint64_t>(m))();
            const auto est = simulate_estimation(ps.lsfc.beta.row(m).transpose(), ps.pilots, ps.p_p,
                                                 ps.pilot_length, ps.sigma2, ps.antennas, row_mc);
            for (int t = 0; t < ps.num_ues(); ++t) {
                const double closed = ps.lsfc.gamma(m, t);
                const double z = est[t].std_error > 0.0 ? (est[t].mean - closed) / est[t].std_error : 0.0;
                part.checks.push_back({c, "gamma", t, m, closed, est[t].mean, est[t].std_error, z});
            }
        }
        MCReport terms = mc_validate_mr_terms(ps, eta, d, mc);
        for (auto& check : terms.checks) {
            check.config = c;
            part.checks.push_back(check);
        }
    }
    MCReport report;
    report.tolerance_sigmas = cfg.mc.tolerance_sigmas;
    for (auto& part : parts) report.checks.insert(report.checks.end(), part.checks.begin(), part.checks.end());
    return report;
}

double OracleStudy::share_within(double fraction) const {
    if (rows.empty()) return 0.0;
    int ok = 0;
    for (const auto& r : rows) {
        if (!r.oracle_feasible || r.optimizer_ee >= fraction * r.oracle_ee) ++ok;
    }
    return static_cast<double>(ok) / static_cast<double>(rows.size());
}

int OracleStudy::dominance_violations() const {
    int bad = 0;
    for (const auto& r : rows) {
        if (r.projected_feasible && (!r.oracle_feasible || r.projected_ee > r.oracle_ee * (1.0 + 1e-12))) ++bad;
    }
    return bad;
}

void OracleStudy::write_csv(std::ostream& os) const {
    csv::write_row(os, {"instance", "seed", "oracle_feasible", "oracle_ee", "status", "optimizer_ee", "ratio",
                        "projected_ee", "projected_feasible"});
    for (const auto& r : rows) {
        csv::write_row(os, {std::to_string(r.instance), std::to_string(r.seed), r.oracle_feasible ? "1" : "0",
                            csv::format_double(r.oracle_ee), std::string(to_string(r.status)),
                            csv::format_double(r.optimizer_ee), csv::format_double(r.ratio),
                            csv::format_double(r.projected_ee), r.projected_feasible ? "1" : "0"});
    }
}

OracleStudy oracle_study(const ExperimentConfig& cfg) {
    cfg.validate();
    SystemConfig sys = cfg.system;
    sys.geometry.num_aps = cfg.oracle.num_aps;
    sys.geometry.num_ues = cfg.oracle.num_ues;
    sys.geometry.antennas_per_ap = cfg.oracle.antennas;
    sys.geometry.pilot_length = std::min(sys.geometry.pilot_length, cfg.oracle.antennas - 1);

    OracleStudy study;
    study.eta_grid = cfg.oracle.eta_grid;
    study.rows.resize(static_cast<std::size_t>(cfg.oracle.instances));
    detail::parallel_for(study.rows.size(), cfg.workers, [&](std::size_t i) {
        OracleRow& row = study.rows[i];
        row.instance = static_cast<int>(i);
        row.seed = realization_seed(cfg.seed, row.instance);
        const ProblemSpec ps = draw_problem(sys, cfg.se_qos, row.seed);
        const BruteForceResult best = brute_force_small(ps, cfg.oracle.eta_grid);
        row.oracle_feasible = best.feasible;
        row.oracle_ee = best.ee;

        const Matrix d0 = initial_association(ps.lsfc.beta, cfg.init_scheme, make_stream(row.seed, kInitStream)());
        const Solution sol = optimize(ps, Vector::Constant(ps.num_ues(), cfg.eta_init), d0, cfg.solver);
        row.status = sol.status;
        row.optimizer_ee = sol.status == SolveStatus::infeasible ? 0.0 : sol.ee;
        if (best.feasible) {
            row.ratio = best.ee > 0.0 ? row.optimizer_ee / best.ee : 1.0;
        } else {
            row.ratio = sol.status == SolveStatus::infeasible ? 1.0 : 0.0;
        }
        if (sol.status != SolveStatus::infeasible) {
            const Evaluation ev = evaluate_binary(ps, project_to_grid(sol.eta, cfg.oracle.eta_grid), sol.association);
            row.projected_ee = ev.ee;
            row.projected_feasible = ev.se.sum >= ps.se_qos;
        }
    });
    return study;
}

std::filesystem::path output_path(const ExperimentConfig& cfg, const std::string& name) {
    const std::filesystem::path dir(cfg.output_dir);
    std::filesystem::create_directories(dir);
    return dir / name;
}

std::string json_summary(const std::string& command, const ExperimentConfig& cfg, double runtime_s,
                         const std::vector<std::pair<std::string, double>>& metrics) {
    nlohmann::ordered_json doc;
    doc["command"] = command;
    doc["seed"] = cfg.seed;
    doc["realizations"] = cfg.realizations;
    doc["grid_points"] = cfg.grid_size();
    doc["runtime_s"] = runtime_s;
    auto& m = doc["metrics"];
    m = nlohmann::ordered_json::object();
    for (const auto& [key, value] : metrics) m[key] = value;
    return doc.dump(2) + "\n";
}

}  // namespace dmimo
