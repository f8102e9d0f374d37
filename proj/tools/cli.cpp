#include "cli.hpp"

#include "dmimo/config.hpp"
#include "dmimo/experiment.hpp"

#include "CLI11.hpp"

#include <chrono>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace dmimo::cli {

namespace {

struct Options {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::optional<int> realizations;
    std::vector<std::string> sets;
};

ExperimentConfig load(const Options& o) {
    ExperimentConfig cfg = o.config.empty() ? ExperimentConfig{} : load_config(o.config);
    for (const auto& kv : o.sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw ConfigError(kv, "expected key=value");
        apply_setting(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (o.seed) cfg.seed = *o.seed;
    if (!o.out.empty()) cfg.output_dir = o.out;
    if (o.realizations) cfg.realizations = *o.realizations;
    cfg.validate();
    return cfg;
}

template <class Fn>
void write_file(const ExperimentConfig& cfg, const std::string& name, Fn&& body) {
    const auto path = output_path(cfg, name);
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write '" + path.string() + "'");
    body(f);
    if (!f) throw std::runtime_error("failed writing '" + path.string() + "'");
}

std::string point_label(const SweepResult& r, const std::vector<double>& point) {
    std::ostringstream os;
    for (std::size_t k = 0; k < point.size(); ++k) os << (k ? " " : "") << r.axes[k] << '=' << point[k];
    return point.empty() ? std::string("base") : os.str();
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void cmd_sweep(const ExperimentConfig& cfg, std::ostream& out) {
    const auto start = std::chrono::steady_clock::now();
    const SweepResult r = run_sweep(cfg);
    const double runtime = seconds_since(start);
    write_file(cfg, "sweep_long.csv", [&](std::ostream& f) { r.write_long_csv(f); });
    write_file(cfg, "sweep_mean.csv", [&](std::ostream& f) { r.write_mean_csv(f); });
    write_file(cfg, "sweep_runtime.csv", [&](std::ostream& f) { r.write_runtime_csv(f); });
    const auto agg = r.aggregate();
    std::size_t best = 0;
    int infeasible = 0;
    for (std::size_t k = 0; k < agg.size(); ++k) {
        if (agg[k].mean_ee > agg[best].mean_ee) best = k;
        infeasible += agg[k].infeasible;
    }
    write_file(cfg, "sweep_summary.json", [&](std::ostream& f) {
        f << json_summary("sweep", cfg, runtime,
                          {{"runs", static_cast<double>(r.runs.size())},
                           {"infeasible", static_cast<double>(infeasible)},
                           {"best_mean_ee", agg[best].mean_ee}});
    });
    out << "sweep: " << agg.size() << " points x " << cfg.realizations << " realizations, " << infeasible
        << " infeasible, best mean EE " << agg[best].mean_ee << " bit/J at " << point_label(r, agg[best].point)
        << ", " << runtime << " s -> " << cfg.output_dir << "\n";
}

void cmd_trace(const ExperimentConfig& cfg, std::ostream& out) {
    const auto start = std::chrono::steady_clock::now();
    const TraceRun run = convergence_trace(cfg);
    const double runtime = seconds_since(start);
    write_file(cfg, "trace.csv", [&](std::ostream& f) { run.trace.write_csv(f); });
    write_file(cfg, "trace_summary.json", [&](std::ostream& f) {
        f << json_summary("trace", cfg, runtime,
                          {{"iterations", static_cast<double>(run.solution.iterations)},
                           {"ee", run.solution.ee},
                           {"sum_se", run.solution.sum_se}});
    });
    out << "trace: " << to_string(run.solution.status) << " after " << run.solution.iterations
        << " iterations, EE " << run.solution.ee << " bit/J, sum SE " << run.solution.sum_se << " bit/s/Hz -> "
        << cfg.output_dir << "\n";
}

void cmd_robustness(const ExperimentConfig& cfg, std::ostream& out) {
    const auto start = std::chrono::steady_clock::now();
    const RobustnessResult r = robustness_study(cfg);
    const double runtime = seconds_since(start);
    write_file(cfg, "robustness.csv", [&](std::ostream& f) { r.write_csv(f); });
    const double sa = r.relative_spread("association");
    const double se = r.relative_spread("eta_init");
    write_file(cfg, "robustness_summary.json", [&](std::ostream& f) {
        f << json_summary("robustness", cfg, runtime, {{"association_spread", sa}, {"eta_init_spread", se}});
    });
    out << "robustness: relative EE spread " << 100.0 * sa << "% across association schemes, " << 100.0 * se
        << "% across eta initializations -> " << cfg.output_dir << "\n";
}

bool cmd_validate(const ExperimentConfig& cfg, std::ostream& out) {
    const auto start = std::chrono::steady_clock::now();
    const MCReport report = validation_study(cfg);
    const double runtime = seconds_since(start);
    write_file(cfg, "validate.csv", [&](std::ostream& f) { report.write_csv(f); });
    write_file(cfg, "validate_summary.json", [&](std::ostream& f) {
        f << json_summary("validate", cfg, runtime,
                          {{"checks", static_cast<double>(report.checks.size())}, {"max_abs_z", report.max_abs_z()}});
    });
    out << "validate: " << report.checks.size() << " terms over " << cfg.mc_configs << " configurations, max |z| "
        << report.max_abs_z() << " (limit " << report.tolerance_sigmas << ") "
        << (report.passed() ? "PASS" : "FAIL") << "\n";
    return report.passed();
}

void cmd_oracle(const ExperimentConfig& cfg, std::ostream& out) {
    const auto start = std::chrono::steady_clock::now();
    const OracleStudy study = oracle_study(cfg);
    const double runtime = seconds_since(start);
    write_file(cfg, "oracle.csv", [&](std::ostream& f) { study.write_csv(f); });
    write_file(cfg, "oracle_summary.json", [&](std::ostream& f) {
        f << json_summary("oracle", cfg, runtime,
                          {{"share_within_98pct", study.share_within(0.98)},
                           {"dominance_violations", static_cast<double>(study.dominance_violations())}});
    });
    out << "oracle: " << study.rows.size() << " instances, " << 100.0 * study.share_within(0.98)
        << "% within 0.98 of exhaustive search, " << study.dominance_violations() << " dominance violations\n";
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Energy-efficiency optimizer for uplink distributed massive MIMO", "dmimo"};
    app.require_subcommand(1);

    Options opts;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("-c,--config", opts.config, "JSON configuration file");
        sub->add_option("--seed", opts.seed, "Master seed");
        sub->add_option("-o,--out", opts.out, "Output directory");
        sub->add_option("-r,--realizations", opts.realizations, "Realizations per grid point");
        sub->add_option("--set", opts.sets, "Override a config key, e.g. --set geometry.num_aps=30");
    };

    using Handler = std::function<int(const ExperimentConfig&)>;
    std::map<CLI::App*, Handler> handlers;
    auto add = [&](const char* name, const char* help, Handler h) {
        CLI::App* sub = app.add_subcommand(name, help);
        add_common(sub);
        handlers[sub] = std::move(h);
    };
    add("sweep", "Run the configured parameter sweep", [&](const ExperimentConfig& c) {
        cmd_sweep(c, out);
        return 0;
    });
    add("trace", "Record the per-iteration trace of one run", [&](const ExperimentConfig& c) {
        cmd_trace(c, out);
        return 0;
    });
    add("robustness", "Compare association schemes and power initializations", [&](const ExperimentConfig& c) {
        cmd_robustness(c, out);
        return 0;
    });
    add("validate", "Monte Carlo check of the closed-form SINR terms", [&](const ExperimentConfig& c) {
        return cmd_validate(c, out) ? 0 : static_cast<int>(runtime_failure);
    });
    add("oracle", "Compare the optimizer with exhaustive search on tiny networks", [&](const ExperimentConfig& c) {
        cmd_oracle(c, out);
        return 0;
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? static_cast<int>(ok) : static_cast<int>(config_error);
    }

    try {
        const ExperimentConfig cfg = load(opts);
        for (const auto& [sub, handler] : handlers) {
            if (sub->parsed()) return handler(cfg);
        }
        return config_error;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return config_error;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return runtime_failure;
    }
}

}  // namespace dmimo::cli
