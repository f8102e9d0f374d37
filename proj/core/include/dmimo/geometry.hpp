#pragma once

#include "dmimo/types.hpp"

#include <cstdint>
#include <random>
#include <string_view>

namespace dmimo {

/// Layout and propagation parameters for one network drop.
///
/// Path loss follows the three-slope law: flat below `d0_m`, `mid_slope_db`
/// dB/decade between the breakpoints and `far_slope_db` dB/decade beyond `d1_m`,
/// with distances expressed in km relative to `fixed_loss_db`. Shadowing is
/// applied only on the far slope.
struct GeometryConfig {
    double side_m = 1000.0;
    int num_aps = 20;
    int num_ues = 10;
    int antennas_per_ap = 8;
    int coherence_length = 200;
    int pilot_length = 5;

    double d0_m = 10.0;
    double d1_m = 50.0;
    double fixed_loss_db = 140.7;
    double near_slope_db = 0.0;
    double mid_slope_db = 20.0;
    double far_slope_db = 35.0;
    double shadow_std_db = 8.0;

    std::uint64_t rng_seed = 1;

    /// Throws ConfigError naming the first offending field.
    void validate() const;
};

struct Deployment {
    std::vector<Point> ap_positions;
    std::vector<Point> ue_positions;
};

/// beta is filled by compute_lsfc; gamma by estimation_quality.
struct LSFCMatrix {
    Matrix beta;
    Matrix gamma;
};

struct PilotAssignment {
    std::vector<int> pilot_of;
    /// sharers[t] holds every UE (t included) that uses pilot_of[t], ascending.
    std::vector<std::vector<int>> sharers;

    int num_ues() const { return static_cast<int>(pilot_of.size()); }
    bool share_pilot(int t, int u) const { return pilot_of[t] == pilot_of[u]; }
};

enum class PilotScheme { round_robin, random };

enum class AssociationScheme { top10_aps_per_ue, top10_ues_per_ap, all, lsfc95, random };

PilotScheme parse_pilot_scheme(std::string_view name);
AssociationScheme parse_association_scheme(std::string_view name);
std::string_view to_string(AssociationScheme scheme);

/// Independent generator for one named stream of a seed. APs, UEs, shadowing
/// and pilots draw from separate streams, so for a fixed seed the first M APs
/// and their fading do not depend on how many APs are placed in total.
std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t stream);

/// Uniform i.i.d. placement on the square centred at the origin.
Deployment place_network(const GeometryConfig& cfg);

/// Shortest distance on the torus of the given side (minimum over the 9 images).
double wrap_distance(Point p, Point q, double side);

/// Deterministic three-slope path loss in dB (negative), no shadowing.
double path_loss_db(double distance_m, const GeometryConfig& cfg);

/// Shadowing is drawn AP-major from the seed's shadowing stream.
LSFCMatrix compute_lsfc(const Deployment& dep, const GeometryConfig& cfg);

PilotAssignment assign_pilots(const Matrix& beta, int pilot_length, PilotScheme scheme,
                              std::uint64_t seed = 0);

/// Binary association; every UE column ends up with at least one serving AP
/// (orphans get their strongest AP).
Matrix initial_association(const Matrix& beta, AssociationScheme scheme, std::uint64_t seed = 0);

}  // namespace dmimo
