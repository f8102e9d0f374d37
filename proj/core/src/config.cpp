#include "dmimo/config.hpp"

#include "json.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <sstream>

namespace dmimo {

namespace {

using json = nlohmann::ordered_json;

double to_double(std::string_view key, std::string_view text) {
    double v = 0.0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end) throw ConfigError(std::string(key), "expected a number, got '" + std::string(text) + "'");
    return v;
}

long long to_integer(std::string_view key, std::string_view text) {
    long long v = 0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end) throw ConfigError(std::string(key), "expected an integer, got '" + std::string(text) + "'");
    return v;
}

int to_int(std::string_view key, std::string_view text) {
    const long long v = to_integer(key, text);
    if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
        throw ConfigError(std::string(key), "out of range");
    }
    return static_cast<int>(v);
}

bool to_bool(std::string_view key, std::string_view text) {
    if (text == "true" || text == "1") return true;
    if (text == "false" || text == "0") return false;
    throw ConfigError(std::string(key), "expected true or false, got '" + std::string(text) + "'");
}

using Setter = std::function<void(ExperimentConfig&, std::string_view, std::string_view)>;

template <class F>
Setter real(F field) {
    return [field](ExperimentConfig& c, std::string_view k, std::string_view v) { field(c) = to_double(k, v); };
}

template <class F>
Setter integer(F field) {
    return [field](ExperimentConfig& c, std::string_view k, std::string_view v) { field(c) = to_int(k, v); };
}

const std::map<std::string, Setter, std::less<>>& setters() {
    static const std::map<std::string, Setter, std::less<>> table = {
        {"geometry.side_m", real([](ExperimentConfig& c) -> double& { return c.system.geometry.side_m; })},
        {"geometry.num_aps", integer([](ExperimentConfig& c) -> int& { return c.system.geometry.num_aps; })},
        {"geometry.num_ues", integer([](ExperimentConfig& c) -> int& { return c.system.geometry.num_ues; })},
        {"geometry.antennas_per_ap", integer([](ExperimentConfig& c) -> int& { return c.system.geometry.antennas_per_ap; })},
        {"geometry.coherence_length", integer([](ExperimentConfig& c) -> int& { return c.system.geometry.coherence_length; })},
        {"geometry.pilot_length", integer([](ExperimentConfig& c) -> int& { return c.system.geometry.pilot_length; })},
        {"geometry.d0_m", real([](ExperimentConfig& c) -> double& { return c.system.geometry.d0_m; })},
        {"geometry.d1_m", real([](ExperimentConfig& c) -> double& { return c.system.geometry.d1_m; })},
        {"geometry.fixed_loss_db", real([](ExperimentConfig& c) -> double& { return c.system.geometry.fixed_loss_db; })},
        {"geometry.near_slope_db", real([](ExperimentConfig& c) -> double& { return c.system.geometry.near_slope_db; })},
        {"geometry.mid_slope_db", real([](ExperimentConfig& c) -> double& { return c.system.geometry.mid_slope_db; })},
        {"geometry.far_slope_db", real([](ExperimentConfig& c) -> double& { return c.system.geometry.far_slope_db; })},
        {"geometry.shadow_std_db", real([](ExperimentConfig& c) -> double& { return c.system.geometry.shadow_std_db; })},

        {"energy.p_ue_c_w", real([](ExperimentConfig& c) -> double& { return c.system.energy.p_ue_c; })},
        {"energy.p_ap_c_w", real([](ExperimentConfig& c) -> double& { return c.system.energy.p_ap_c; })},
        {"energy.p_proc_w", real([](ExperimentConfig& c) -> double& { return c.system.energy.p_proc; })},
        {"energy.p_fh_fix_w", real([](ExperimentConfig& c) -> double& { return c.system.energy.p_fh_fix; })},
        {"energy.p_sig_w", real([](ExperimentConfig& c) -> double& { return c.system.energy.p_sig; })},
        {"energy.p_cpu_fix_w", real([](ExperimentConfig& c) -> double& { return c.system.energy.p_cpu_fix; })},
        {"energy.p_cpu_lsfd_w", real([](ExperimentConfig& c) -> double& { return c.system.energy.p_cpu_lsfd; })},
        {"energy.p_cpu_deco_mw_per_gbps",
         [](ExperimentConfig& c, std::string_view k, std::string_view v) {
             c.system.energy.p_cpu_deco = EnergyConstants::deco_from_mw_per_gbps(to_double(k, v));
         }},
        {"energy.zeta", real([](ExperimentConfig& c) -> double& { return c.system.energy.zeta; })},
        {"energy.bandwidth_hz", real([](ExperimentConfig& c) -> double& { return c.system.energy.bandwidth_hz; })},
        {"energy.lsfd_per_link",
         [](ExperimentConfig& c, std::string_view k, std::string_view v) { c.system.energy.lsfd_per_link = to_bool(k, v); }},

        {"power.p_u_w", real([](ExperimentConfig& c) -> double& { return c.system.p_u_w; })},
        {"power.p_p_w", real([](ExperimentConfig& c) -> double& { return c.system.p_p_w; })},
        {"model.noise_figure_db", real([](ExperimentConfig& c) -> double& { return c.system.noise_figure_db; })},
        {"model.nu", real([](ExperimentConfig& c) -> double& { return c.system.nu; })},
        {"model.lsfd_mode",
         [](ExperimentConfig& c, std::string_view, std::string_view v) { c.system.lsfd_mode = parse_lsfd_mode(v); }},
        {"model.pilot_scheme",
         [](ExperimentConfig& c, std::string_view, std::string_view v) { c.system.pilot_scheme = parse_pilot_scheme(v); }},

        {"solver.eps", real([](ExperimentConfig& c) -> double& { return c.solver.eps; })},
        {"solver.max_iters", integer([](ExperimentConfig& c) -> int& { return c.solver.max_iters; })},
        {"solver.round_threshold", real([](ExperimentConfig& c) -> double& { return c.solver.round_threshold; })},
        {"solver.qos_tol", real([](ExperimentConfig& c) -> double& { return c.solver.qos_tol; })},
        {"solver.inner_max_iters", integer([](ExperimentConfig& c) -> int& { return c.solver.inner_max_iters; })},
        {"solver.polish_rounds", integer([](ExperimentConfig& c) -> int& { return c.solver.polish_rounds; })},
        {"solver.polish_candidates", integer([](ExperimentConfig& c) -> int& { return c.solver.polish_candidates; })},

        {"se_qos", real([](ExperimentConfig& c) -> double& { return c.se_qos; })},
        {"realizations", integer([](ExperimentConfig& c) -> int& { return c.realizations; })},
        {"seed",
         [](ExperimentConfig& c, std::string_view k, std::string_view v) {
             const long long s = to_integer(k, v);
             if (s < 0) throw ConfigError(std::string(k), "must be non-negative");
             c.seed = static_cast<std::uint64_t>(s);
         }},
        {"output_dir", [](ExperimentConfig& c, std::string_view, std::string_view v) { c.output_dir = std::string(v); }},
        {"init_scheme",
         [](ExperimentConfig& c, std::string_view, std::string_view v) { c.init_scheme = parse_association_scheme(v); }},
        {"eta_init", real([](ExperimentConfig& c) -> double& { return c.eta_init; })},
        {"workers", integer([](ExperimentConfig& c) -> int& { return c.workers; })},

        {"mc.trials",
         [](ExperimentConfig& c, std::string_view k, std::string_view v) { c.mc.trials = static_cast<long>(to_integer(k, v)); }},
        {"mc.tolerance_sigmas", real([](ExperimentConfig& c) -> double& { return c.mc.tolerance_sigmas; })},
        {"mc.configs", integer([](ExperimentConfig& c) -> int& { return c.mc_configs; })},
        {"oracle.instances", integer([](ExperimentConfig& c) -> int& { return c.oracle.instances; })},
        {"oracle.num_aps", integer([](ExperimentConfig& c) -> int& { return c.oracle.num_aps; })},
        {"oracle.num_ues", integer([](ExperimentConfig& c) -> int& { return c.oracle.num_ues; })},
        {"oracle.antennas", integer([](ExperimentConfig& c) -> int& { return c.oracle.antennas; })},
        {"oracle.eta_grid", integer([](ExperimentConfig& c) -> int& { return c.oracle.eta_grid; })},
    };
    return table;
}

std::string scalar_text(const std::string& key, const json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    if (v.is_number()) {
        std::ostringstream os;
        os.precision(17);
        os << v.get<double>();
        return os.str();
    }
    throw ConfigError(key, "expected a scalar value");
}

std::vector<double> number_list(const std::string& key, const json& v) {
    if (!v.is_array() || v.empty()) throw ConfigError(key, "expected a nonempty list of numbers");
    std::vector<double> out;
    for (const auto& x : v) {
        if (!x.is_number()) throw ConfigError(key, "expected a nonempty list of numbers");
        out.push_back(x.get<double>());
    }
    return out;
}

void set_axis(ExperimentConfig& cfg, const std::string& key, std::string_view name, const json& values) {
    SweepVariable var;
    try {
        var = parse_sweep_variable(name);
    } catch (const ConfigError& e) {
        throw ConfigError(key, e.what());
    }
    for (const auto& axis : cfg.sweep) {
        if (axis.variable == var) throw ConfigError(key, "axis listed twice");
    }
    cfg.sweep.push_back({var, number_list(key, values)});
}

void walk(ExperimentConfig& cfg, const std::string& prefix, const json& node) {
    for (auto it = node.begin(); it != node.end(); ++it) {
        const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
        if (key == "sweep") {
            if (!it->is_object()) throw ConfigError(key, "expected an object of axis lists");
            for (auto ax = it->begin(); ax != it->end(); ++ax) set_axis(cfg, key + "." + ax.key(), ax.key(), *ax);
        } else if (key.rfind("sweep.", 0) == 0) {
            set_axis(cfg, key, std::string_view(key).substr(6), *it);
        } else if (it->is_object()) {
            walk(cfg, key, *it);
        } else {
            apply_setting(cfg, key, scalar_text(key, *it));
        }
    }
}

}  // namespace

SweepVariable parse_sweep_variable(std::string_view name) {
    if (name == "se_qos") return SweepVariable::se_qos;
    if (name == "M") return SweepVariable::num_aps;
    if (name == "T") return SweepVariable::num_ues;
    if (name == "p_u") return SweepVariable::p_u;
    throw ConfigError("sweep", "unknown sweep variable '" + std::string(name) + "' (expected se_qos, M, T or p_u)");
}

std::string_view to_string(SweepVariable v) {
    switch (v) {
        case SweepVariable::se_qos: return "se_qos";
        case SweepVariable::num_aps: return "M";
        case SweepVariable::num_ues: return "T";
        case SweepVariable::p_u: return "p_u";
    }
    return "?";
}

void apply_setting(ExperimentConfig& cfg, std::string_view key, std::string_view value) {
    const auto& table = setters();
    const auto it = table.find(key);
    if (it == table.end()) throw ConfigError(std::string(key), "unknown key");
    try {
        it->second(cfg, key, value);
    } catch (const ConfigError& e) {
        if (e.key() == key) throw;
        throw ConfigError(std::string(key), "invalid value '" + std::string(value) + "'");
    }
}

void ExperimentConfig::validate() const {
    system.validate();
    solver.validate();
    mc.validate();
    if (realizations < 1) throw ConfigError("realizations", "must be at least 1");
    if (!(se_qos >= 0.0)) throw ConfigError("se_qos", "must be non-negative");
    if (!(eta_init >= 0.0 && eta_init <= 1.0)) throw ConfigError("eta_init", "must lie in [0, 1]");
    if (workers < 0) throw ConfigError("workers", "must be non-negative");
    if (mc_configs < 1) throw ConfigError("mc.configs", "must be at least 1");
    if (oracle.instances < 1) throw ConfigError("oracle.instances", "must be at least 1");
    if (oracle.num_aps < 1 || oracle.num_ues < 1 || oracle.num_aps * oracle.num_ues > kBruteForceMaxLinks ||
        oracle.num_ues > kBruteForceMaxUes) {
        throw ConfigError("oracle.num_aps", "tiny instances need M*T <= 12 and T <= 3");
    }
    if (oracle.antennas < 2) throw ConfigError("oracle.antennas", "must be at least 2");
    if (oracle.eta_grid < 2 || oracle.eta_grid > kBruteForceMaxGrid) {
        throw ConfigError("oracle.eta_grid", "must lie in [2, 21]");
    }
    for (const auto& axis : sweep) {
        const std::string key = "sweep." + std::string(to_string(axis.variable));
        if (axis.values.empty()) throw ConfigError(key, "values must be nonempty");
        for (double v : axis.values) {
            const bool integral = v == static_cast<double>(static_cast<long long>(v));
            switch (axis.variable) {
                case SweepVariable::se_qos:
                    if (!(v >= 0.0)) throw ConfigError(key, "values must be non-negative");
                    break;
                case SweepVariable::num_aps:
                case SweepVariable::num_ues:
                    if (!integral || v < 1.0) throw ConfigError(key, "values must be positive integers");
                    break;
                case SweepVariable::p_u:
                    if (!(v > 0.0)) throw ConfigError(key, "values must be positive");
                    break;
            }
        }
    }
}

std::size_t ExperimentConfig::grid_size() const {
    std::size_t n = 1;
    for (const auto& axis : sweep) n *= axis.values.size();
    return n;
}

std::vector<double> ExperimentConfig::grid_point(std::size_t index) const {
    std::vector<double> point(sweep.size());
    for (std::size_t k = sweep.size(); k-- > 0;) {
        const std::size_t n = sweep[k].values.size();
        point[k] = sweep[k].values[index % n];
        index /= n;
    }
    return point;
}

void ExperimentConfig::apply_point(const std::vector<double>& point, SystemConfig& sys, double& qos) const {
    sys = system;
    qos = se_qos;
    for (std::size_t k = 0; k < sweep.size(); ++k) {
        const double v = point[k];
        switch (sweep[k].variable) {
            case SweepVariable::se_qos: qos = v; break;
            case SweepVariable::num_aps: sys.geometry.num_aps = static_cast<int>(v); break;
            case SweepVariable::num_ues: sys.geometry.num_ues = static_cast<int>(v); break;
            case SweepVariable::p_u: sys.p_u_w = v; break;
        }
    }
}

ExperimentConfig parse_config(std::string_view json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError("", std::string("malformed config: ") + e.what());
    }
    if (!root.is_object()) throw ConfigError("", "config must be a JSON object");
    ExperimentConfig cfg;
    walk(cfg, "", root);
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("", "cannot open config file '" + path.string() + "'");
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str());
}

}  // namespace dmimo
