#include "dmimo/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace dmimo {

namespace {

constexpr std::uint64_t kApStream = 1;
constexpr std::uint64_t kUeStream = 2;
constexpr std::uint64_t kShadowStream = 3;

void require(bool ok, const char* key, const char* what) {
    if (!ok) throw ConfigError(key, what);
}

}  // namespace

void GeometryConfig::validate() const {
    require(side_m > 0.0, "geometry.side_m", "must be positive");
    require(num_aps >= 1, "geometry.num_aps", "must be at least 1");
    require(num_ues >= 1, "geometry.num_ues", "must be at least 1");
    require(antennas_per_ap >= 1, "geometry.antennas_per_ap", "must be at least 1");
    require(pilot_length >= 1, "geometry.pilot_length", "must be at least 1");
    require(coherence_length >= 1, "geometry.coherence_length", "must be at least 1");
    require(pilot_length <= coherence_length, "geometry.pilot_length",
            "must not exceed geometry.coherence_length");
    require(d0_m > 0.0 && d0_m < d1_m, "geometry.d0_m", "must satisfy 0 < d0 < d1");
    require(shadow_std_db >= 0.0, "geometry.shadow_std_db", "must be non-negative");
}

PilotScheme parse_pilot_scheme(std::string_view name) {
    if (name == "round_robin") return PilotScheme::round_robin;
    if (name == "random") return PilotScheme::random;
    throw ConfigError("model.pilot_scheme", "unknown scheme '" + std::string(name) + "'");
}

AssociationScheme parse_association_scheme(std::string_view name) {
    if (name == "top10_aps_per_ue") return AssociationScheme::top10_aps_per_ue;
    if (name == "top10_ues_per_ap") return AssociationScheme::top10_ues_per_ap;
    if (name == "all") return AssociationScheme::all;
    if (name == "lsfc95") return AssociationScheme::lsfc95;
    if (name == "random") return AssociationScheme::random;
    throw ConfigError("init_scheme", "unknown association scheme '" + std::string(name) + "'");
}

std::string_view to_string(AssociationScheme scheme) {
    switch (scheme) {
        case AssociationScheme::top10_aps_per_ue: return "top10_aps_per_ue";
        case AssociationScheme::top10_ues_per_ap: return "top10_ues_per_ap";
        case AssociationScheme::all: return "all";
        case AssociationScheme::lsfc95: return "lsfc95";
        case AssociationScheme::random: return "random";
    }
    return "unknown";
}

std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    return std::mt19937_64(seq);
}

Deployment place_network(const GeometryConfig& cfg) {
    cfg.validate();
    const double half = cfg.side_m / 2.0;
    std::uniform_real_distribution<double> coord(-half, half);
    auto fill = [&](std::vector<Point>& pts, int n, std::uint64_t stream) {
        auto rng = make_stream(cfg.rng_seed, stream);
        pts.resize(n);
        for (auto& p : pts) {
            p.x = coord(rng);
            p.y = coord(rng);
        }
    };
    Deployment dep;
    fill(dep.ap_positions, cfg.num_aps, kApStream);
    fill(dep.ue_positions, cfg.num_ues, kUeStream);
    return dep;
}

double wrap_distance(Point p, Point q, double side) {
    double best = std::numeric_limits<double>::infinity();
    for (int i = -1; i <= 1; ++i) {
        for (int j = -1; j <= 1; ++j) {
            const double dx = p.x - (q.x + i * side);
            const double dy = p.y - (q.y + j * side);
            best = std::min(best, std::hypot(dx, dy));
        }
    }
    return best;
}

double path_loss_db(double distance_m, const GeometryConfig& cfg) {
    const double d = std::max(distance_m, 1e-3) / 1000.0;
    const double d0 = cfg.d0_m / 1000.0;
    const double d1 = cfg.d1_m / 1000.0;
    // Anchored at d1 so that every slope change is continuous.
    const double at_d1 = -cfg.fixed_loss_db - cfg.far_slope_db * std::log10(d1);
    if (d > d1) return -cfg.fixed_loss_db - cfg.far_slope_db * std::log10(d);
    if (d > d0) return at_d1 - cfg.mid_slope_db * (std::log10(d) - std::log10(d1));
    const double at_d0 = at_d1 - cfg.mid_slope_db * (std::log10(d0) - std::log10(d1));
    return at_d0 - cfg.near_slope_db * (std::log10(d) - std::log10(d0));
}

LSFCMatrix compute_lsfc(const Deployment& dep, const GeometryConfig& cfg) {
    auto rng = make_stream(cfg.rng_seed, kShadowStream);
    const auto M = static_cast<Eigen::Index>(dep.ap_positions.size());
    const auto T = static_cast<Eigen::Index>(dep.ue_positions.size());
    std::normal_distribution<double> shadow(0.0, 1.0);
    LSFCMatrix out;
    out.beta.resize(M, T);
    out.gamma = Matrix::Zero(M, T);
    // Draw order is fixed (AP-major) so results only depend on the seed.
    for (Eigen::Index m = 0; m < M; ++m) {
        for (Eigen::Index t = 0; t < T; ++t) {
            const double d = wrap_distance(dep.ap_positions[m], dep.ue_positions[t], cfg.side_m);
            const double x = shadow(rng);
            double pl = path_loss_db(d, cfg);
            if (d > cfg.d1_m) pl += cfg.shadow_std_db * x;
            out.beta(m, t) = std::pow(10.0, pl / 10.0);
        }
    }
    return out;
}

PilotAssignment assign_pilots(const Matrix& beta, int pilot_length, PilotScheme scheme,
                              std::uint64_t seed) {
    if (pilot_length < 1) throw ConfigError("geometry.pilot_length", "must be at least 1");
    const int T = static_cast<int>(beta.cols());
    PilotAssignment pa;
    pa.pilot_of.resize(T);
    if (scheme == PilotScheme::round_robin) {
        for (int t = 0; t < T; ++t) pa.pilot_of[t] = t % pilot_length;
    } else {
        // Distinct pilots while they last, then uniform reuse.
        std::mt19937_64 rng(seed);
        std::vector<int> order(T);
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng);
        std::uniform_int_distribution<int> pick(0, pilot_length - 1);
        for (int i = 0; i < T; ++i) pa.pilot_of[order[i]] = i < pilot_length ? i : pick(rng);
    }
    pa.sharers.assign(T, {});
    for (int t = 0; t < T; ++t) {
        for (int u = 0; u < T; ++u) {
            if (pa.pilot_of[u] == pa.pilot_of[t]) pa.sharers[t].push_back(u);
        }
    }
    return pa;
}

Matrix initial_association(const Matrix& beta, AssociationScheme scheme, std::uint64_t seed) {
    const Eigen::Index M = beta.rows();
    const Eigen::Index T = beta.cols();
    Matrix d = Matrix::Zero(M, T);
    constexpr Eigen::Index kTop = 10;

    auto top_indices = [](const Vector& v, Eigen::Index k) {
        std::vector<Eigen::Index> idx(v.size());
        std::iota(idx.begin(), idx.end(), 0);
        std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] > v[b]; });
        idx.resize(std::min<Eigen::Index>(k, v.size()));
        return idx;
    };

    switch (scheme) {
        case AssociationScheme::all:
            d.setOnes();
            break;
        case AssociationScheme::top10_aps_per_ue:
            for (Eigen::Index t = 0; t < T; ++t) {
                for (auto m : top_indices(beta.col(t), kTop)) d(m, t) = 1.0;
            }
            break;
        case AssociationScheme::top10_ues_per_ap:
            for (Eigen::Index m = 0; m < M; ++m) {
                for (auto t : top_indices(beta.row(m).transpose(), kTop)) d(m, t) = 1.0;
            }
            break;
        case AssociationScheme::lsfc95:
            for (Eigen::Index t = 0; t < T; ++t) {
                const double peak = beta.col(t).maxCoeff();
                for (Eigen::Index m = 0; m < M; ++m) {
                    if (beta(m, t) >= 0.95 * peak) d(m, t) = 1.0;
                }
            }
            break;
        case AssociationScheme::random: {
            std::mt19937_64 rng(seed);
            std::bernoulli_distribution coin(0.5);
            for (Eigen::Index m = 0; m < M; ++m) {
                for (Eigen::Index t = 0; t < T; ++t) d(m, t) = coin(rng) ? 1.0 : 0.0;
            }
            break;
        }
    }

    for (Eigen::Index t = 0; t < T; ++t) {
        if (d.col(t).sum() < 1.0) {
            Eigen::Index best = 0;
            beta.col(t).maxCoeff(&best);
            d(best, t) = 1.0;
        }
    }
    return d;
}

}  // namespace dmimo
