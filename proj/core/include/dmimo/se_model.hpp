#pragma once

#include "dmimo/geometry.hpp"
#include "dmimo/types.hpp"

#include <cstdint>
#include <string_view>

namespace dmimo {

/// Thermal noise power in watts: -174 dBm/Hz over `bandwidth_hz` plus the noise figure.
double thermal_noise_w(double bandwidth_hz, double noise_figure_db);

/// Pre-log factor (1 - L_p / L_c) / 2.
double prelog_factor(int pilot_length, int coherence_length);

struct PowerVector {
    Vector eta;        // uplink power-control coefficients in [0, 1]
    double p_u = 0.1;  // max uplink power [W]
    double p_p = 0.1;  // pilot power [W]
};

enum class LinkRole : std::int8_t { none, strong, weak };

/// Strong/weak split of the served users at every AP.
struct Grouping {
    int num_aps = 0;
    int num_ues = 0;
    std::vector<LinkRole> roles;               // column-major M x T
    std::vector<std::vector<int>> strong_at;   // S_m
    std::vector<std::vector<int>> weak_at;     // W_m
    std::vector<std::vector<int>> strong_aps;  // Z_t
    std::vector<std::vector<int>> weak_aps;    // Q_t
    std::vector<int> l_strong;                 // distinct pilots among S_m

    LinkRole role(int m, int t) const { return roles[static_cast<std::size_t>(t) * num_aps + m]; }
};

enum class LsfdMode { uniform, matched };
LsfdMode parse_lsfd_mode(std::string_view name);

struct LSFDWeights {
    Matrix a;
};

struct SINRBreakdown {
    Vector ds, pc, bu, ni, n;
    Vector i;     // pc + bu + ni + n
    Vector sinr;  // ds / i, zero for a UE without usable channel
};

struct SEResult {
    Vector per_ue;
    double sum = 0.0;
};

/// MMSE estimate mean-square per antenna:
/// L_p p_p beta^2 / (sum over pilot sharers of L_p p_p beta + sigma2).
Matrix estimation_quality(const Matrix& beta, const PilotAssignment& pilots, double p_p,
                          int pilot_length, double sigma2);

/// A served UE is strong at AP m when beta_mt / max_m' beta_m't >= nu. Strong users
/// with the lowest beta are demoted to weak until the distinct-pilot count at
/// the AP fits min(L_p, A - 1). Links with d_mt > 0 count as served.
Grouping classify_users(const Matrix& beta, const Matrix& association, const PilotAssignment& pilots,
                        double nu, int antennas, int pilot_length);

LSFDWeights lsfd_weights(const Matrix& gamma, const Grouping& grouping, const Matrix& association,
                         LsfdMode mode);

/// Closed-form statistics behind the SE lower bound, with all powers expressed
/// relative to the noise power (rho = p_u / sigma2).
///
/// The coefficients depend only on the channel statistics, the grouping and the
/// LSFD weights, so one instance serves every (eta, D) evaluation of a solve.
class SinrModel {
public:
    SinrModel(const LSFCMatrix& lsfc, const PilotAssignment& pilots, const Grouping& grouping,
              const LSFDWeights& weights, int antennas, double rho);

    int num_aps() const { return num_aps_; }
    int num_ues() const { return num_ues_; }
    double rho() const { return rho_; }

    SINRBreakdown evaluate(const Vector& eta, const Matrix& association) const;

    /// Coherent gain of link (m, t): a_mt gamma_mt, times A on the weak branch.
    double signal(int m, int t) const { return signal_(m, t); }
    /// Variance factor of interferer u seen through link (m, t); u == t gives the
    /// beamforming-uncertainty factor.
    double variance(int t, int m, int u) const { return variance_[t](m, u); }
    double noise(int m, int t) const { return noise_(m, t); }
    /// Coherent leakage of pilot sharer sharers_of(t)[k] through link (m, t).
    const std::vector<int>& sharers_of(int t) const { return other_sharers_[t]; }
    double leakage(int t, int k, int m) const { return leakage_[t](m, k); }

    /// I_t = rho * sum_u eta_u K(t, u) + N_t and sqrt(DS_t) = sqrt(rho eta_t) S_t
    /// for a frozen association.
    struct FrozenAssociation {
        Vector gain;      // S_t
        Matrix coupling;  // K(t, u)
        Vector noise;     // N_t
    };
    FrozenAssociation freeze_association(const Matrix& association) const;

    /// Diagonal (d_mt^2) part of I_t for frozen powers: noise plus rho-weighted
    /// variances, per link.
    Matrix frozen_power_diagonal(const Vector& eta) const;

private:
    int num_aps_ = 0;
    int num_ues_ = 0;
    double rho_ = 0.0;
    Matrix signal_;
    Matrix noise_;
    std::vector<Matrix> variance_;  // per t: M x T
    std::vector<std::vector<int>> other_sharers_;
    std::vector<Matrix> leakage_;  // per t: M x |P_t \ {t}|
};

/// Convenience wrapper: builds the model for one evaluation.
SINRBreakdown sinr_terms(const PowerVector& power, const Matrix& association, const LSFDWeights& weights,
                         const LSFCMatrix& lsfc, const Grouping& grouping, const PilotAssignment& pilots,
                         int antennas, double sigma2);

/// SE_t = w log2(1 + Gamma_t) in bit/s/Hz.
SEResult sum_se(const SINRBreakdown& breakdown, double prelog);

}  // namespace dmimo
