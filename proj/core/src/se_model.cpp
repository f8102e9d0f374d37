#include "dmimo/se_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <string>

namespace dmimo {

double thermal_noise_w(double bandwidth_hz, double noise_figure_db) {
    const double dbm = -174.0 + 10.0 * std::log10(bandwidth_hz) + noise_figure_db;
    return std::pow(10.0, (dbm - 30.0) / 10.0);
}

double prelog_factor(int pilot_length, int coherence_length) {
    return (1.0 - static_cast<double>(pilot_length) / coherence_length) / 2.0;
}

LsfdMode parse_lsfd_mode(std::string_view name) {
    if (name == "uniform") return LsfdMode::uniform;
    if (name == "matched") return LsfdMode::matched;
    throw ConfigError("model.lsfd_mode", "unknown mode '" + std::string(name) + "'");
}

Matrix estimation_quality(const Matrix& beta, const PilotAssignment& pilots, double p_p,
                          int pilot_length, double sigma2) {
    const double scale = pilot_length * p_p;
    Matrix gamma(beta.rows(), beta.cols());
    for (Eigen::Index t = 0; t < beta.cols(); ++t) {
        for (Eigen::Index m = 0; m < beta.rows(); ++m) {
            double denom = sigma2;
            for (int u : pilots.sharers[t]) denom += scale * beta(m, u);
            gamma(m, t) = scale * beta(m, t) * beta(m, t) / denom;
        }
    }
    return gamma;
}

Grouping classify_users(const Matrix& beta, const Matrix& association, const PilotAssignment& pilots,
                        double nu, int antennas, int pilot_length) {
    const int M = static_cast<int>(beta.rows());
    const int T = static_cast<int>(beta.cols());
    Grouping g;
    g.num_aps = M;
    g.num_ues = T;
    g.roles.assign(static_cast<std::size_t>(M) * T, LinkRole::none);
    g.strong_at.assign(M, {});
    g.weak_at.assign(M, {});
    g.strong_aps.assign(T, {});
    g.weak_aps.assign(T, {});
    g.l_strong.assign(M, 0);

    const Vector peak = beta.colwise().maxCoeff().transpose();
    // Lowest AP index among the maximizers; at nu >= 1 only this AP qualifies.
    std::vector<int> best(T, 0);
    for (int t = 0; t < T; ++t) beta.col(t).maxCoeff(&best[t]);
    const int cap = std::max(0, std::min(pilot_length, antennas - 1));

    auto distinct_pilots = [&](const std::vector<int>& ues) {
        std::set<int> seen;
        for (int t : ues) seen.insert(pilots.pilot_of[t]);
        return static_cast<int>(seen.size());
    };

    for (int m = 0; m < M; ++m) {
        std::vector<int> strong;
        for (int t = 0; t < T; ++t) {
            if (association(m, t) <= 0.0) continue;
            const bool qualifies = nu >= 1.0 ? m == best[t] : beta(m, t) / peak[t] >= nu;
            if (peak[t] > 0.0 && qualifies) {
                strong.push_back(t);
            } else {
                g.weak_at[m].push_back(t);
            }
        }
        // Demote the weakest strong user until the pilot budget fits.
        while (!strong.empty() && distinct_pilots(strong) > cap) {
            auto weakest = std::min_element(strong.begin(), strong.end(), [&](int a, int b) {
                return beta(m, a) < beta(m, b) || (beta(m, a) == beta(m, b) && a > b);
            });
            g.weak_at[m].push_back(*weakest);
            strong.erase(weakest);
        }
        std::sort(g.weak_at[m].begin(), g.weak_at[m].end());
        g.strong_at[m] = strong;
        g.l_strong[m] = distinct_pilots(strong);
        for (int t : g.strong_at[m]) {
            g.roles[static_cast<std::size_t>(t) * M + m] = LinkRole::strong;
            g.strong_aps[t].push_back(m);
        }
        for (int t : g.weak_at[m]) {
            g.roles[static_cast<std::size_t>(t) * M + m] = LinkRole::weak;
            g.weak_aps[t].push_back(m);
        }
    }
    for (int t = 0; t < T; ++t) std::sort(g.weak_aps[t].begin(), g.weak_aps[t].end());
    return g;
}

LSFDWeights lsfd_weights(const Matrix& gamma, const Grouping& grouping, const Matrix& association,
                         LsfdMode mode) {
    LSFDWeights w;
    w.a = Matrix::Zero(gamma.rows(), gamma.cols());
    for (Eigen::Index t = 0; t < gamma.cols(); ++t) {
        for (Eigen::Index m = 0; m < gamma.rows(); ++m) {
            if (grouping.role(static_cast<int>(m), static_cast<int>(t)) == LinkRole::none) continue;
            w.a(m, t) = mode == LsfdMode::uniform ? association(m, t) : association(m, t) * gamma(m, t);
        }
        if (mode == LsfdMode::matched) {
            const double top = w.a.col(t).maxCoeff();
            if (top > 0.0) w.a.col(t) /= top;
        }
    }
    return w;
}

SinrModel::SinrModel(const LSFCMatrix& lsfc, const PilotAssignment& pilots, const Grouping& grouping,
                     const LSFDWeights& weights, int antennas, double rho)
    : num_aps_(static_cast<int>(lsfc.beta.rows())),
      num_ues_(static_cast<int>(lsfc.beta.cols())),
      rho_(rho) {
    const int M = num_aps_;
    const int T = num_ues_;
    const double A = antennas;
    for (int m = 0; m < M; ++m) {
        if (!grouping.strong_at[m].empty() && antennas - grouping.l_strong[m] <= 0) {
            throw GroupingInfeasible("AP " + std::to_string(m) + " has no spatial degree of freedom left (A=" +
                                     std::to_string(antennas) + ", L_S=" +
                                     std::to_string(grouping.l_strong[m]) + ")");
        }
    }

    const Matrix& beta = lsfc.beta;
    const Matrix& gamma = lsfc.gamma;
    signal_ = Matrix::Zero(M, T);
    noise_ = Matrix::Zero(M, T);
    variance_.assign(T, Matrix::Zero(M, T));
    other_sharers_.assign(T, {});
    leakage_.assign(T, Matrix());

    for (int t = 0; t < T; ++t) {
        for (int u : pilots.sharers[t]) {
            if (u != t) other_sharers_[t].push_back(u);
        }
        leakage_[t] = Matrix::Zero(M, static_cast<Eigen::Index>(other_sharers_[t].size()));
        for (int m = 0; m < M; ++m) {
            const LinkRole role = grouping.role(m, t);
            if (role == LinkRole::none) continue;
            const double a = weights.a(m, t);
            const double g = gamma(m, t);
            const double a2g = a * a * g;
            if (role == LinkRole::strong) {
                const double dof = A - grouping.l_strong[m];
                signal_(m, t) = a * g;
                noise_(m, t) = a2g / dof;
                for (int u = 0; u < T; ++u) variance_[t](m, u) = a2g * (beta(m, u) - gamma(m, u)) / dof;
            } else {
                signal_(m, t) = A * a * g;
                noise_(m, t) = A * a2g;
                for (int u = 0; u < T; ++u) variance_[t](m, u) = A * a2g * beta(m, u);
            }
            if (beta(m, t) > 0.0) {
                for (std::size_t k = 0; k < other_sharers_[t].size(); ++k) {
                    leakage_[t](m, static_cast<Eigen::Index>(k)) =
                        signal_(m, t) * beta(m, other_sharers_[t][k]) / beta(m, t);
                }
            }
        }
    }
}

SINRBreakdown SinrModel::evaluate(const Vector& eta, const Matrix& association) const {
    const int T = num_ues_;
    SINRBreakdown out;
    out.ds = Vector::Zero(T);
    out.pc = Vector::Zero(T);
    out.bu = Vector::Zero(T);
    out.ni = Vector::Zero(T);
    out.n = Vector::Zero(T);
    out.i = Vector::Zero(T);
    out.sinr = Vector::Zero(T);
    for (int t = 0; t < T; ++t) {
        const auto d = association.col(t);
        const Vector d2 = d.array().square();
        const double gain = d.dot(signal_.col(t));
        out.ds[t] = rho_ * eta[t] * gain * gain;
        for (std::size_t k = 0; k < other_sharers_[t].size(); ++k) {
            const double c = d.dot(leakage_[t].col(static_cast<Eigen::Index>(k)));
            out.pc[t] += rho_ * eta[other_sharers_[t][k]] * c * c;
        }
        const Vector per_user = variance_[t].transpose() * d2;
        for (int u = 0; u < T; ++u) {
            if (u == t) {
                out.bu[t] = rho_ * eta[t] * per_user[u];
            } else {
                out.ni[t] += rho_ * eta[u] * per_user[u];
            }
        }
        out.n[t] = d2.dot(noise_.col(t));
        out.i[t] = out.pc[t] + out.bu[t] + out.ni[t] + out.n[t];
        out.sinr[t] = out.i[t] > 0.0 ? out.ds[t] / out.i[t] : 0.0;
    }
    return out;
}

SinrModel::FrozenAssociation SinrModel::freeze_association(const Matrix& association) const {
    const int T = num_ues_;
    FrozenAssociation f;
    f.gain = Vector::Zero(T);
    f.coupling = Matrix::Zero(T, T);
    f.noise = Vector::Zero(T);
    for (int t = 0; t < T; ++t) {
        const auto d = association.col(t);
        const Vector d2 = d.array().square();
        f.gain[t] = d.dot(signal_.col(t));
        f.coupling.row(t) = (variance_[t].transpose() * d2).transpose();
        for (std::size_t k = 0; k < other_sharers_[t].size(); ++k) {
            const double c = d.dot(leakage_[t].col(static_cast<Eigen::Index>(k)));
            f.coupling(t, other_sharers_[t][k]) += c * c;
        }
        f.noise[t] = d2.dot(noise_.col(t));
    }
    return f;
}

Matrix SinrModel::frozen_power_diagonal(const Vector& eta) const {
    Matrix w = noise_;
    for (int t = 0; t < num_ues_; ++t) w.col(t) += rho_ * (variance_[t] * eta);
    return w;
}

SINRBreakdown sinr_terms(const PowerVector& power, const Matrix& association, const LSFDWeights& weights,
                         const LSFCMatrix& lsfc, const Grouping& grouping, const PilotAssignment& pilots,
                         int antennas, double sigma2) {
    const SinrModel model(lsfc, pilots, grouping, weights, antennas, power.p_u / sigma2);
    return model.evaluate(power.eta, association);
}

SEResult sum_se(const SINRBreakdown& breakdown, double prelog) {
    SEResult r;
    r.per_ue = breakdown.sinr.unaryExpr([prelog](double g) { return prelog * std::log2(1.0 + g); });
    r.sum = r.per_ue.sum();
    return r;
}

}  // namespace dmimo
