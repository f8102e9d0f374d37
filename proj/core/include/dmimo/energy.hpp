#pragma once

#include "dmimo/types.hpp"

namespace dmimo {

/// Power-consumption constants. Everything is in watts except `p_cpu_deco`
/// (watts per bit/s) and the bandwidth (Hz).
struct EnergyConstants {
    double p_ue_c = 0.1;
    double p_ap_c = 0.1;
    double p_proc = 0.8;
    double p_fh_fix = 0.825;
    double p_sig = 0.01;
    double p_cpu_fix = 5.0;
    double p_cpu_lsfd = 1.0;
    double p_cpu_deco = 1e-9;  // 1000 mW per Gbit/s
    double zeta = 0.4;
    double bandwidth_hz = 20e6;
    /// Charge the CPU LSFD power once per active AP-UE link (default) or once per UE.
    bool lsfd_per_link = true;

    void validate() const;

    /// Converts a deco figure quoted in mW per Gbit/s to W per bit/s.
    static double deco_from_mw_per_gbps(double mw_per_gbps) { return mw_per_gbps * 1e-3 / 1e9; }

    /// Cost of one active AP-UE link for an AP with `antennas` antennas.
    double link_power(int antennas) const {
        return (lsfd_per_link ? p_cpu_lsfd : 0.0) + antennas * p_proc + p_sig;
    }
};

/// T P_ue + M A P_ap + M P_fh + P_cpu.
double fixed_power(int num_aps, int num_ues, int antennas, const EnergyConstants& k);

/// Transmit power through the amplifier plus per-link processing, signalling and
/// LSFD costs. Affine in both eta and the (possibly relaxed) association.
double circuit_power(const Vector& eta, double p_u, const Matrix& association, int antennas,
                     const EnergyConstants& k);

/// fixed + circuit + p_cpu_deco * throughput[bit/s].
double total_power(double fixed, double circuit, double throughput_bps, const EnergyConstants& k);

/// w B sum_se / P_T in bit/J.
double energy_efficiency(double sum_se, double total_power_w, double bandwidth_hz);

}  // namespace dmimo
