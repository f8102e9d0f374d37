#include "dmimo/energy.hpp"

namespace dmimo {

void EnergyConstants::validate() const {
    auto nonneg = [](double v, const char* key) {
        if (!(v >= 0.0)) throw ConfigError(key, "must be non-negative");
    };
    nonneg(p_ue_c, "energy.p_ue_c_w");
    nonneg(p_ap_c, "energy.p_ap_c_w");
    nonneg(p_proc, "energy.p_proc_w");
    nonneg(p_fh_fix, "energy.p_fh_fix_w");
    nonneg(p_sig, "energy.p_sig_w");
    nonneg(p_cpu_fix, "energy.p_cpu_fix_w");
    nonneg(p_cpu_lsfd, "energy.p_cpu_lsfd_w");
    nonneg(p_cpu_deco, "energy.p_cpu_deco_mw_per_gbps");
    if (!(zeta > 0.0 && zeta <= 1.0)) throw ConfigError("energy.zeta", "must lie in (0, 1]");
    if (!(bandwidth_hz > 0.0)) throw ConfigError("energy.bandwidth_hz", "must be positive");
}

double fixed_power(int num_aps, int num_ues, int antennas, const EnergyConstants& k) {
    return num_ues * k.p_ue_c + static_cast<double>(num_aps) * antennas * k.p_ap_c + num_aps * k.p_fh_fix +
           k.p_cpu_fix;
}

double circuit_power(const Vector& eta, double p_u, const Matrix& association, int antennas,
                     const EnergyConstants& k) {
    double p = eta.sum() * p_u / k.zeta + association.sum() * k.link_power(antennas);
    if (!k.lsfd_per_link) p += static_cast<double>(association.cols()) * k.p_cpu_lsfd;
    return p;
}

double total_power(double fixed, double circuit, double throughput_bps, const EnergyConstants& k) {
    return fixed + circuit + k.p_cpu_deco * throughput_bps;
}

double energy_efficiency(double sum_se, double total_power_w, double bandwidth_hz) {
    return bandwidth_hz * sum_se / total_power_w;
}

}  // namespace dmimo
