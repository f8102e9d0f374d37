#pragma once

#include "dmimo/problem.hpp"

#include <random>

namespace testing {

inline dmimo::SystemConfig small_system(int aps, int ues, int antennas = 8, int pilots = 5) {
    dmimo::SystemConfig sys;
    sys.geometry.num_aps = aps;
    sys.geometry.num_ues = ues;
    sys.geometry.antennas_per_ap = antennas;
    sys.geometry.pilot_length = pilots;
    return sys;
}

inline dmimo::ProblemSpec small_problem(int aps, int ues, std::uint64_t seed, double qos = 0.0, int antennas = 8,
                                        int pilots = 5) {
    return dmimo::draw_problem(small_system(aps, ues, antennas, pilots), qos, seed);
}

/// Problem from explicit large-scale fading, default system constants.
inline dmimo::ProblemSpec problem_from_beta(const dmimo::Matrix& beta, double qos = 0.0, int antennas = 8,
                                            int pilots = 5) {
    dmimo::SystemConfig sys = small_system(static_cast<int>(beta.rows()), static_cast<int>(beta.cols()), antennas,
                                           pilots);
    dmimo::LSFCMatrix lsfc;
    lsfc.beta = beta;
    auto pa = dmimo::assign_pilots(beta, pilots, dmimo::PilotScheme::round_robin);
    lsfc.gamma = dmimo::estimation_quality(beta, pa, sys.p_p_w, pilots, sys.sigma2());
    auto ps = dmimo::make_problem(lsfc, pa, sys.energy, antennas, pilots, sys.prelog(), sys.p_u_w, sys.sigma2(),
                                  qos, sys.nu, sys.lsfd_mode);
    ps.p_p = sys.p_p_w;
    return ps;
}

inline dmimo::Vector uniform_vector(std::mt19937_64& rng, int n, double lo, double hi) {
    std::uniform_real_distribution<double> u(lo, hi);
    dmimo::Vector v(n);
    for (auto& x : v) x = u(rng);
    return v;
}

inline dmimo::Matrix uniform_matrix(std::mt19937_64& rng, int rows, int cols, double lo, double hi) {
    std::uniform_real_distribution<double> u(lo, hi);
    dmimo::Matrix m(rows, cols);
    for (int c = 0; c < cols; ++c) {
        for (int r = 0; r < rows; ++r) m(r, c) = u(rng);
    }
    return m;
}

}  // namespace testing
