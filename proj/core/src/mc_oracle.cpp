#include "dmimo/mc_oracle.hpp"

#include "dmimo/csv.hpp"
#include "parallel.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <ostream>
#include <random>
#include <stdexcept>

namespace dmimo {

namespace {

using cplx = std::complex<double>;

constexpr long kChunk = 4096;

/// Compensated sum, so means do not depend on accumulation noise.
struct Kahan {
    double sum = 0.0;
    double carry = 0.0;
    void add(double x) {
        const double y = x - carry;
        const double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
};

MCEstimate estimate(const std::vector<double>& samples) {
    const double n = static_cast<double>(samples.size());
    Kahan s;
    for (double x : samples) s.add(x);
    const double mean = s.sum / n;
    Kahan sq;
    for (double x : samples) sq.add((x - mean) * (x - mean));
    const double var = samples.size() > 1 ? sq.sum / (n - 1.0) : 0.0;
    return {mean, std::sqrt(var / n)};
}

/// Circularly-symmetric complex Gaussian with variance `var`.
struct ComplexNormal {
    std::normal_distribution<double> half{0.0, std::sqrt(0.5)};
    cplx operator()(std::mt19937_64& rng, double scale) { return scale * cplx(half(rng), half(rng)); }
};

double z_score(double mc, double closed, double se) {
    const double diff = mc - closed;
    if (se > 0.0) return diff / se;
    const double ref = std::max(std::abs(closed), std::numeric_limits<double>::min());
    return std::abs(diff) <= 1e-12 * ref ? 0.0 : std::numeric_limits<double>::infinity();
}

/// Runs `trial(rng, index)` for every trial, chunked into fixed substreams so
/// results do not depend on the number of workers.
template <class Trial>
void run_trials(const MCConfig& mc, Trial&& trial) {
    const long chunks = (mc.trials + kChunk - 1) / kChunk;
    detail::parallel_for(static_cast<std::size_t>(chunks), 0, [&](std::size_t c) {
        auto rng = make_stream(mc.rng_seed, 0x6d63ULL + c);
        const long begin = static_cast<long>(c) * kChunk;
        const long end = std::min(mc.trials, begin + kChunk);
        for (long i = begin; i < end; ++i) trial(rng, i);
    });
}

}  // namespace

void MCConfig::validate() const {
    if (trials < 1) throw ConfigError("mc.trials", "must be at least 1");
    if (!(tolerance_sigmas > 0.0)) throw ConfigError("mc.tolerance_sigmas", "must be positive");
}

std::vector<MCEstimate> simulate_estimation(const Vector& beta_row, const PilotAssignment& pilots, double p_p,
                                            int pilot_length, double sigma2, int antennas, const MCConfig& mc) {
    mc.validate();
    const int T = static_cast<int>(beta_row.size());
    const double gain = pilot_length * p_p;
    std::vector<double> coeff(T);
    for (int t = 0; t < T; ++t) {
        double received = sigma2;
        for (int u : pilots.sharers[t]) received += gain * beta_row[u];
        coeff[t] = std::sqrt(gain) * beta_row[t] / received;
    }

    std::vector<std::vector<double>> samples(T, std::vector<double>(mc.trials));
    run_trials(mc, [&](std::mt19937_64& rng, long i) {
        ComplexNormal cn;
        std::vector<cplx> y(static_cast<std::size_t>(pilot_length) * antennas);
        for (auto& v : y) v = cn(rng, std::sqrt(sigma2));
        for (int t = 0; t < T; ++t) {
            const double amp = std::sqrt(gain * beta_row[t]);
            cplx* row = &y[static_cast<std::size_t>(pilots.pilot_of[t]) * antennas];
            for (int k = 0; k < antennas; ++k) row[k] += cn(rng, amp);
        }
        for (int t = 0; t < T; ++t) {
            const cplx* row = &y[static_cast<std::size_t>(pilots.pilot_of[t]) * antennas];
            double norm = 0.0;
            for (int k = 0; k < antennas; ++k) norm += std::norm(coeff[t] * row[k]);
            samples[t][i] = norm / antennas;
        }
    });

    std::vector<MCEstimate> out;
    out.reserve(T);
    for (int t = 0; t < T; ++t) out.push_back(estimate(samples[t]));
    return out;
}

double MCReport::max_abs_z() const {
    double z = 0.0;
    for (const auto& c : checks) z = std::max(z, std::abs(c.z));
    return z;
}

void MCReport::write_csv(std::ostream& os) const {
    csv::write_row(os, {"config", "term", "ap", "ue", "closed_form", "mc_mean", "std_error", "z"});
    for (const auto& c : checks) {
        csv::write_row(os, {std::to_string(c.config), c.term, c.ap < 0 ? std::string() : std::to_string(c.ap),
                            std::to_string(c.ue), csv::format_double(c.closed_form),
                            csv::format_double(c.mc_mean), csv::format_double(c.std_error),
                            csv::format_double(c.z)});
    }
}

MCReport mc_validate_mr_terms(const ProblemSpec& ps, const Vector& eta, const Matrix& association,
                              const MCConfig& mc) {
    mc.validate();
    const int M = ps.num_aps();
    const int T = ps.num_ues();
    const int A = ps.antennas;
    const Matrix& beta = ps.lsfc.beta;

    // A one-antenna pilot budget leaves no room for strong users, so every
    // served link lands on the maximum-ratio branch.
    const Grouping grouping = classify_users(beta, association, ps.pilots, ps.nu, 1, ps.pilot_length);
    const LSFDWeights weights = lsfd_weights(ps.lsfc.gamma, grouping, association, ps.lsfd_mode);
    const SinrModel model(ps.lsfc, ps.pilots, grouping, weights, A, ps.rho());
    const SINRBreakdown terms = model.evaluate(eta, association);

    const double gain = ps.pilot_length * ps.p_p;
    Matrix coeff = Matrix::Zero(M, T);
    Matrix pilot_amp = Matrix::Zero(M, T);
    for (int m = 0; m < M; ++m) {
        for (int t = 0; t < T; ++t) {
            double s = ps.sigma2;
            for (int u : ps.pilots.sharers[t]) s += gain * beta(m, u);
            coeff(m, t) = std::sqrt(gain) * beta(m, t) / s;
            pilot_amp(m, t) = std::sqrt(gain * beta(m, t));
        }
    }
    const double noise_amp = std::sqrt(ps.sigma2);
    const double rho = ps.rho();
    const Matrix weight = association.cwiseProduct(weights.a);

    const auto n = static_cast<std::size_t>(mc.trials);
    std::vector<std::vector<cplx>> x(T, std::vector<cplx>(n));
    std::vector<std::vector<double>> interference(T, std::vector<double>(n));
    std::vector<std::vector<double>> noise(T, std::vector<double>(n));

    run_trials(mc, [&](std::mt19937_64& rng, long i) {
        ComplexNormal cn;
        std::vector<cplx> xs(T), zs(T);
        std::vector<cplx> ys(static_cast<std::size_t>(T) * T);
        std::vector<cplx> g(static_cast<std::size_t>(T) * A), yp(static_cast<std::size_t>(ps.pilot_length) * A),
            nd(A), ghat(A);
        for (int m = 0; m < M; ++m) {
            for (auto& v : yp) v = cn(rng, noise_amp);
            for (auto& v : nd) v = cn(rng, noise_amp);
            for (int t = 0; t < T; ++t) {
                const double amp = std::sqrt(beta(m, t));
                cplx* pilot_row = &yp[static_cast<std::size_t>(ps.pilots.pilot_of[t]) * A];
                for (int k = 0; k < A; ++k) {
                    const cplx h = cn(rng, 1.0);
                    g[static_cast<std::size_t>(t) * A + k] = amp * h;
                    pilot_row[k] += pilot_amp(m, t) * h;
                }
            }
            for (int t = 0; t < T; ++t) {
                const double w = weight(m, t);
                if (w == 0.0) continue;
                const cplx* pilot_row = &yp[static_cast<std::size_t>(ps.pilots.pilot_of[t]) * A];
                for (int k = 0; k < A; ++k) ghat[k] = coeff(m, t) * pilot_row[k];
                for (int u = 0; u < T; ++u) {
                    cplx acc = 0.0;
                    for (int k = 0; k < A; ++k) acc += std::conj(ghat[k]) * g[static_cast<std::size_t>(u) * A + k];
                    ys[static_cast<std::size_t>(t) * T + u] += w * acc;
                }
                cplx acc = 0.0;
                for (int k = 0; k < A; ++k) acc += std::conj(ghat[k]) * nd[k];
                zs[t] += w * acc;
            }
        }
        for (int t = 0; t < T; ++t) {
            x[t][i] = ys[static_cast<std::size_t>(t) * T + t];
            double inter = 0.0;
            for (int u = 0; u < T; ++u) {
                if (u != t) inter += rho * eta[u] * std::norm(ys[static_cast<std::size_t>(t) * T + u]);
            }
            interference[t][i] = inter;
            noise[t][i] = std::norm(zs[t]) / ps.sigma2;
        }
    });

    MCReport report;
    report.tolerance_sigmas = mc.tolerance_sigmas;
    auto add = [&](const char* term, int t, double closed, const MCEstimate& e) {
        report.checks.push_back({0, term, t, -1, closed, e.mean, e.std_error, z_score(e.mean, closed, e.std_error)});
    };
    std::vector<double> buf(n);
    for (int t = 0; t < T; ++t) {
        double signal = 0.0;
        for (int m = 0; m < M; ++m) signal += association(m, t) * model.signal(m, t);
        for (std::size_t i = 0; i < n; ++i) buf[i] = x[t][i].real();
        const MCEstimate gain_est = estimate(buf);
        add("gain", t, signal, gain_est);
        // Spread about the sample mean; the mean's own error is O(1/n).
        for (std::size_t i = 0; i < n; ++i) buf[i] = rho * eta[t] * std::norm(x[t][i] - gain_est.mean);
        add("bu", t, terms.bu[t], estimate(buf));
        add("interference", t, terms.pc[t] + terms.ni[t], estimate(interference[t]));
        add("noise", t, terms.n[t], estimate(noise[t]));
    }
    return report;
}

Vector project_to_grid(const Vector& eta, int eta_grid) {
    if (eta_grid < 2) throw std::invalid_argument("eta grid needs at least two points");
    const double steps = eta_grid - 1;
    return (eta.cwiseMax(0.0).cwiseMin(1.0) * steps).array().round().matrix() / steps;
}

BruteForceResult brute_force_small(const ProblemSpec& ps, int eta_grid) {
    const int M = ps.num_aps();
    const int T = ps.num_ues();
    if (M * T > kBruteForceMaxLinks) throw std::invalid_argument("brute force limited to 12 links");
    if (T > kBruteForceMaxUes) throw std::invalid_argument("brute force limited to 3 UEs");
    if (eta_grid < 2 || eta_grid > kBruteForceMaxGrid) throw std::invalid_argument("eta grid must have 2..21 points");

    const int links = M * T;
    const double steps = eta_grid - 1;
    long eta_points = 1;
    for (int t = 0; t < T; ++t) eta_points *= eta_grid;

    BruteForceResult best;
    Matrix d(M, T);
    Vector eta(T);
    for (long mask = 0; mask < (1L << links); ++mask) {
        // Column-major link k maps to the bit of weight 2^(links - 1 - k), so
        // increasing masks visit associations in lexicographic order.
        for (int k = 0; k < links; ++k) d(k % M, k / M) = (mask >> (links - 1 - k)) & 1L ? 1.0 : 0.0;
        bool covered = true;
        for (int t = 0; t < T && covered; ++t) covered = d.col(t).sum() > 0.0;
        if (!covered) continue;

        const Grouping grouping = classify_users(ps.lsfc.beta, d, ps.pilots, ps.nu, ps.antennas, ps.pilot_length);
        const LSFDWeights weights = lsfd_weights(ps.lsfc.gamma, grouping, d, ps.lsfd_mode);
        const SinrModel model(ps.lsfc, ps.pilots, grouping, weights, ps.antennas, ps.rho());
        for (long e = 0; e < eta_points; ++e) {
            long rest = e;
            for (int t = T - 1; t >= 0; --t) {
                eta[t] = static_cast<double>(rest % eta_grid) / steps;
                rest /= eta_grid;
            }
            const Evaluation ev = evaluate_relaxed(ps, model, eta, d);
            if (ev.se.sum < ps.se_qos) continue;
            if (!best.feasible || ev.ee > best.ee) {
                best.feasible = true;
                best.ee = ev.ee;
                best.sum_se = ev.se.sum;
                best.association = d;
                best.eta = eta;
            }
        }
    }
    return best;
}

}  // namespace dmimo
