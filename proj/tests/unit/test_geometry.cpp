#include "dmimo/geometry.hpp"

#include "doctest.h"

#include <cmath>
#include <numeric>
#include <random>
#include <set>

using namespace dmimo;

TEST_SUITE("geometry") {

TEST_CASE("placement is reproducible and stays on the square") {
    GeometryConfig cfg;
    cfg.num_aps = 2;
    cfg.num_ues = 1;
    cfg.rng_seed = 42;
    const Deployment a = place_network(cfg);
    const Deployment b = place_network(cfg);
    REQUIRE(a.ap_positions.size() == 2);
    REQUIRE(a.ue_positions.size() == 1);
    for (std::size_t k = 0; k < 2; ++k) {
        CHECK(a.ap_positions[k].x == b.ap_positions[k].x);
        CHECK(a.ap_positions[k].y == b.ap_positions[k].y);
    }
    CHECK(a.ue_positions[0].x == b.ue_positions[0].x);

    cfg.num_aps = 200;
    cfg.num_ues = 100;
    for (const auto& p : place_network(cfg).ap_positions) {
        CHECK(std::abs(p.x) <= 500.0);
        CHECK(std::abs(p.y) <= 500.0);
    }
}

TEST_CASE("placement moments match the uniform law") {
    GeometryConfig cfg;
    cfg.num_aps = 10000;
    cfg.num_ues = 1;
    cfg.rng_seed = 3;
    const Deployment dep = place_network(cfg);
    const double n = 10000.0;
    double mean = 0.0;
    for (const auto& p : dep.ap_positions) mean += p.x;
    mean /= n;
    double var = 0.0;
    for (const auto& p : dep.ap_positions) var += (p.x - mean) * (p.x - mean);
    var /= n - 1.0;
    const double expected_var = 1000.0 * 1000.0 / 12.0;
    CHECK(std::abs(mean) <= 3.0 * std::sqrt(expected_var / n));
    CHECK(std::abs(var / expected_var - 1.0) <= 0.05);
}

TEST_CASE("adding APs keeps the existing layout") {
    GeometryConfig small;
    small.num_aps = 5;
    small.num_ues = 4;
    small.rng_seed = 9;
    GeometryConfig large = small;
    large.num_aps = 12;
    const Deployment a = place_network(small);
    const Deployment b = place_network(large);
    for (int m = 0; m < 5; ++m) CHECK(a.ap_positions[m].x == b.ap_positions[m].x);
    for (int t = 0; t < 4; ++t) CHECK(a.ue_positions[t].y == b.ue_positions[t].y);
    const Matrix ba = compute_lsfc(a, small).beta;
    const Matrix bb = compute_lsfc(b, large).beta;
    CHECK(ba == bb.topRows(5));
}

TEST_CASE("wrap-around distance") {
    CHECK(wrap_distance({3.0, 4.0}, {3.0, 4.0}, 1000.0) == 0.0);
    CHECK(wrap_distance({-490.0, 0.0}, {490.0, 0.0}, 1000.0) == doctest::Approx(20.0).epsilon(1e-12));
    CHECK(wrap_distance({-490.0, -490.0}, {490.0, 490.0}, 1000.0) ==
          doctest::Approx(20.0 * std::sqrt(2.0)).epsilon(1e-12));

    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> c(-500.0, 500.0);
    for (int k = 0; k < 1000; ++k) {
        const Point p{c(rng), c(rng)}, q{c(rng), c(rng)}, r{c(rng), c(rng)};
        const double pq = wrap_distance(p, q, 1000.0);
        CHECK(pq == doctest::Approx(wrap_distance(q, p, 1000.0)).epsilon(1e-12));
        CHECK(pq <= 1000.0 * std::sqrt(2.0) / 2.0 + 1e-9);
        CHECK(pq <= wrap_distance(p, r, 1000.0) + wrap_distance(r, q, 1000.0) + 1e-9);
    }
}

TEST_CASE("three-slope path loss") {
    GeometryConfig cfg;
    SUBCASE("continuous at both breakpoints") {
        for (double d : {cfg.d0_m, cfg.d1_m}) {
            CHECK(std::abs(path_loss_db(d * (1 - 1e-13), cfg) - path_loss_db(d * (1 + 1e-13), cfg)) < 1e-9);
        }
        const double at_d1 = -cfg.fixed_loss_db - cfg.far_slope_db * std::log10(cfg.d1_m / 1000.0);
        CHECK(path_loss_db(cfg.d1_m, cfg) == doctest::Approx(at_d1).epsilon(1e-12));
        const double at_d0 = at_d1 - cfg.mid_slope_db * std::log10(cfg.d0_m / cfg.d1_m);
        CHECK(path_loss_db(cfg.d0_m, cfg) == doctest::Approx(at_d0).epsilon(1e-12));
    }
    SUBCASE("hand value at 100 m") {
        GeometryConfig flat = cfg;
        flat.shadow_std_db = 0.0;
        Deployment dep;
        dep.ap_positions = {{0.0, 0.0}};
        dep.ue_positions = {{100.0, 0.0}};
        flat.num_aps = 1;
        flat.num_ues = 1;
        const double expected = std::pow(10.0, (-140.7 - 35.0 * std::log10(0.1)) / 10.0);
        CHECK(compute_lsfc(dep, flat).beta(0, 0) == doctest::Approx(expected).epsilon(1e-12));
    }
    SUBCASE("strictly decreasing beyond d0, flat below") {
        double prev = path_loss_db(cfg.d0_m, cfg);
        for (double d = cfg.d0_m + 1.0; d < 700.0; d += 7.0) {
            const double pl = path_loss_db(d, cfg);
            CHECK(pl < prev);
            prev = pl;
        }
        CHECK(path_loss_db(1.0, cfg) == doctest::Approx(path_loss_db(cfg.d0_m, cfg)).epsilon(1e-12));
    }
}

TEST_CASE("large-scale fading") {
    GeometryConfig cfg;
    cfg.num_aps = 3;
    cfg.num_ues = 2;
    cfg.shadow_std_db = 0.0;
    Deployment dep;
    dep.ap_positions = {{0.0, 0.0}, {200.0, 100.0}, {-300.0, 50.0}};
    dep.ue_positions = {{10.0, 20.0}, {10.0, 20.0}};
    const Matrix beta = compute_lsfc(dep, cfg).beta;
    CHECK(beta.col(0) == beta.col(1));

    GeometryConfig shadowed;
    shadowed.rng_seed = 17;
    const Deployment d2 = place_network(shadowed);
    const Matrix b1 = compute_lsfc(d2, shadowed).beta;
    const Matrix b2 = compute_lsfc(d2, shadowed).beta;
    CHECK(b1 == b2);
    CHECK((b1.array() > 0.0).all());

    // Shadowing leaves links inside d1 untouched.
    Deployment close;
    close.ap_positions = {{0.0, 0.0}};
    close.ue_positions = {{30.0, 0.0}};
    GeometryConfig one = shadowed;
    one.num_aps = 1;
    one.num_ues = 1;
    CHECK(compute_lsfc(close, one).beta(0, 0) ==
          doctest::Approx(std::pow(10.0, path_loss_db(30.0, one) / 10.0)).epsilon(1e-12));
}

TEST_CASE("pilot assignment") {
    const Matrix beta3 = Matrix::Ones(4, 3);
    const auto distinct = assign_pilots(beta3, 5, PilotScheme::round_robin);
    for (int t = 0; t < 3; ++t) CHECK(distinct.sharers[t] == std::vector<int>{t});

    const auto rr = assign_pilots(Matrix::Ones(2, 7), 5, PilotScheme::round_robin);
    CHECK(rr.pilot_of == std::vector<int>{0, 1, 2, 3, 4, 0, 1});
    CHECK(rr.sharers[5] == std::vector<int>{0, 5});

    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto pa = assign_pilots(Matrix::Ones(3, 11), 4, PilotScheme::random, seed);
        std::vector<int> seen(11, 0);
        for (int t = 0; t < 11; ++t) {
            CHECK(pa.pilot_of[t] >= 0);
            CHECK(pa.pilot_of[t] < 4);
            CHECK(std::count(pa.sharers[t].begin(), pa.sharers[t].end(), t) == 1);
            for (int u : pa.sharers[t]) CHECK(pa.pilot_of[u] == pa.pilot_of[t]);
            if (pa.sharers[t].front() == t) {
                for (int u : pa.sharers[t]) ++seen[u];
            }
        }
        for (int count : seen) CHECK(count == 1);
        const auto few = assign_pilots(Matrix::Ones(3, 4), 4, PilotScheme::random, seed);
        CHECK(std::set<int>(few.pilot_of.begin(), few.pilot_of.end()).size() == 4);
    }
    CHECK_THROWS_AS(assign_pilots(beta3, 0, PilotScheme::round_robin), ConfigError);
}

TEST_CASE("initial association schemes") {
    SUBCASE("all") { CHECK(initial_association(Matrix::Ones(3, 4), AssociationScheme::all) == Matrix::Ones(3, 4)); }
    SUBCASE("lsfc95 with one dominant AP") {
        Matrix beta = Matrix::Constant(4, 1, 1e-12);
        beta(2, 0) = 1e-10;
        const Matrix d = initial_association(beta, AssociationScheme::lsfc95);
        CHECK(d.sum() == 1.0);
        CHECK(d(2, 0) == 1.0);
    }
    SUBCASE("top-10 capped by the AP count") {
        std::mt19937_64 rng(1);
        std::uniform_real_distribution<double> u(1e-12, 1e-9);
        Matrix beta(4, 3);
        for (auto& x : beta.reshaped()) x = u(rng);
        CHECK(initial_association(beta, AssociationScheme::top10_aps_per_ue) == Matrix::Ones(4, 3));
    }
    SUBCASE("every scheme covers every UE") {
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            GeometryConfig cfg;
            cfg.num_aps = 15;
            cfg.num_ues = 25;
            cfg.rng_seed = seed;
            const Matrix beta = compute_lsfc(place_network(cfg), cfg).beta;
            for (auto scheme : {AssociationScheme::top10_aps_per_ue, AssociationScheme::top10_ues_per_ap,
                                AssociationScheme::all, AssociationScheme::lsfc95, AssociationScheme::random}) {
                const Matrix d = initial_association(beta, scheme, seed);
                CHECK((d.array() == 0.0 || d.array() == 1.0).all());
                CHECK(d.colwise().sum().minCoeff() >= 1.0);
            }
        }
    }
    SUBCASE("names round-trip") {
        for (auto scheme : {AssociationScheme::top10_aps_per_ue, AssociationScheme::top10_ues_per_ap,
                            AssociationScheme::all, AssociationScheme::lsfc95, AssociationScheme::random}) {
            CHECK(parse_association_scheme(to_string(scheme)) == scheme);
        }
        CHECK_THROWS_AS(parse_association_scheme("nearest"), ConfigError);
    }
}

TEST_CASE("configuration checks name the offending key") {
    GeometryConfig cfg;
    cfg.num_aps = 0;
    try {
        cfg.validate();
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.key() == "geometry.num_aps");
    }
    GeometryConfig p;
    p.pilot_length = 300;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    GeometryConfig d;
    d.d0_m = 60.0;
    CHECK_THROWS_AS(d.validate(), ConfigError);
}

}
