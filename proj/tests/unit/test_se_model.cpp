#include "dmimo/se_model.hpp"

#include "helpers.hpp"

#include "doctest.h"

#include <cmath>
#include <random>

using namespace dmimo;

namespace {

PilotAssignment distinct_pilots(int ues) { return assign_pilots(Matrix::Ones(1, ues), ues, PilotScheme::round_robin); }

SinrModel build(const Matrix& beta, const PilotAssignment& pa, const Matrix& d, int antennas, double rho,
                double p_p = 0.1, double sigma2 = 1e-12, double nu = 0.95, int pilot_length = 5) {
    LSFCMatrix lsfc;
    lsfc.beta = beta;
    lsfc.gamma = estimation_quality(beta, pa, p_p, pilot_length, sigma2);
    const Grouping g = classify_users(beta, d, pa, nu, antennas, pilot_length);
    const LSFDWeights w = lsfd_weights(lsfc.gamma, g, d, LsfdMode::uniform);
    return SinrModel(lsfc, pa, g, w, antennas, rho);
}

}  // namespace

TEST_SUITE("se_model") {

TEST_CASE("noise power and pre-log") {
    const double w = thermal_noise_w(20e6, 9.0);
    CHECK(10.0 * std::log10(w) + 30.0 == doctest::Approx(-174.0 + 10.0 * std::log10(20e6) + 9.0));
    CHECK(w == doctest::Approx(6.3e-13).epsilon(0.01));
    CHECK(prelog_factor(5, 200) == doctest::Approx(0.4875));
    CHECK(prelog_factor(0, 200) == doctest::Approx(0.5));
}

TEST_CASE("estimation quality") {
    const double pp = 0.1, sigma2 = 1e-12;
    const int lp = 5;
    SUBCASE("single pilot user") {
        Matrix beta(1, 1);
        beta << 1e-10;
        const Matrix g = estimation_quality(beta, distinct_pilots(1), pp, lp, sigma2);
        CHECK(g(0, 0) == doctest::Approx(lp * pp * 1e-20 / (lp * pp * 1e-10 + sigma2)));
        CHECK(g(0, 0) < beta(0, 0));
    }
    SUBCASE("pilot sharers lower each other") {
        Matrix beta(1, 2);
        beta << 2e-10, 1e-10;
        const auto shared = assign_pilots(beta, 1, PilotScheme::round_robin);
        const Matrix g = estimation_quality(beta, shared, pp, lp, sigma2);
        const double denom = lp * pp * 3e-10 + sigma2;
        CHECK(g(0, 0) == doctest::Approx(lp * pp * 4e-20 / denom));
        CHECK(g(0, 1) == doctest::Approx(lp * pp * 1e-20 / denom));
        const Matrix alone = estimation_quality(beta, distinct_pilots(2), pp, lp, sigma2);
        CHECK(g(0, 0) < alone(0, 0));
    }
    SUBCASE("bounded by the fading") {
        std::mt19937_64 rng(4);
        const Matrix beta = testing::uniform_matrix(rng, 6, 9, 1e-14, 1e-8);
        const Matrix g = estimation_quality(beta, assign_pilots(beta, 4, PilotScheme::round_robin), pp, 4, sigma2);
        CHECK((g.array() > 0.0).all());
        CHECK((g.array() <= beta.array()).all());
    }
}

TEST_CASE("strong and weak split") {
    const auto pa = distinct_pilots(3);
    SUBCASE("relative threshold") {
        Matrix beta(2, 3);
        beta << 1.0, 1.0, 0.5,
                0.96, 0.5, 1.0;
        const Grouping g = classify_users(beta, Matrix::Ones(2, 3), pa, 0.95, 8, 5);
        CHECK(g.role(0, 0) == LinkRole::strong);
        CHECK(g.role(1, 0) == LinkRole::strong);
        CHECK(g.role(0, 1) == LinkRole::strong);
        CHECK(g.role(1, 1) == LinkRole::weak);
        CHECK(g.role(0, 2) == LinkRole::weak);
        CHECK(g.role(1, 2) == LinkRole::strong);
    }
    SUBCASE("nu of one keeps only the lowest-index best AP") {
        Matrix beta(3, 1);
        beta << 0.5, 1.0, 1.0;
        const Grouping g = classify_users(beta, Matrix::Ones(3, 1), distinct_pilots(1), 1.0, 8, 5);
        CHECK(g.role(0, 0) == LinkRole::weak);
        CHECK(g.role(1, 0) == LinkRole::strong);
        CHECK(g.role(2, 0) == LinkRole::weak);
    }
    SUBCASE("pilot budget demotes the weakest strong users") {
        Matrix beta(1, 3);
        beta << 3.0, 1.0, 2.0;
        const Grouping g = classify_users(beta, Matrix::Ones(1, 3), pa, 0.95, 3, 5);
        CHECK(g.l_strong[0] == 2);
        CHECK(g.strong_at[0] == std::vector<int>{0, 2});
        CHECK(g.weak_at[0] == std::vector<int>{1});
    }
    SUBCASE("shared pilots count once") {
        // Seven UEs, five pilots: the seven strong users occupy exactly five pilots.
        const Matrix beta = Matrix::Ones(1, 7);
        const auto rr = assign_pilots(beta, 5, PilotScheme::round_robin);
        const Grouping g = classify_users(beta, Matrix::Ones(1, 7), rr, 0.95, 8, 5);
        CHECK(g.strong_at[0].size() == 7);
        CHECK(g.l_strong[0] == 5);
        const Grouping tight = classify_users(beta, Matrix::Ones(1, 7), rr, 0.95, 4, 5);
        CHECK(tight.l_strong[0] == 3);
    }
    SUBCASE("single-antenna APs have no strong users") {
        const Grouping g = classify_users(Matrix::Ones(2, 3), Matrix::Ones(2, 3), pa, 0.95, 1, 5);
        for (int m = 0; m < 2; ++m) CHECK(g.strong_at[m].empty());
    }
    SUBCASE("invariants on random drops") {
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            const ProblemSpec ps = testing::small_problem(12, 15, seed, 0.0, 4, 5);
            std::mt19937_64 rng(seed);
            std::bernoulli_distribution coin(0.4);
            Matrix d(12, 15);
            for (auto& x : d.reshaped()) x = coin(rng) ? 1.0 : 0.0;
            const Grouping g = classify_users(ps.lsfc.beta, d, ps.pilots, 0.95, 4, 5);
            for (int m = 0; m < 12; ++m) {
                CHECK(g.l_strong[m] <= 3);
                for (int t = 0; t < 15; ++t) {
                    CHECK((g.role(m, t) == LinkRole::none) == (d(m, t) == 0.0));
                }
                CHECK(g.strong_at[m].size() + g.weak_at[m].size() == static_cast<std::size_t>(d.row(m).sum()));
            }
        }
    }
}

TEST_CASE("LSFD weights") {
    Matrix gamma(2, 1);
    gamma << 4.0, 1.0;
    const auto pa = distinct_pilots(1);
    const Matrix d = Matrix::Ones(2, 1);
    const Grouping g = classify_users(gamma, d, pa, 0.95, 8, 5);
    CHECK(lsfd_weights(gamma, g, d, LsfdMode::uniform).a == d);
    const Matrix matched = lsfd_weights(gamma, g, d, LsfdMode::matched).a;
    CHECK(matched(0, 0) == doctest::Approx(1.0));
    CHECK(matched(1, 0) == doctest::Approx(0.25));
    Matrix half = d;
    half(1, 0) = 0.0;
    CHECK(lsfd_weights(gamma, classify_users(gamma, half, pa, 0.95, 8, 5), half, LsfdMode::uniform).a(1, 0) == 0.0);
    CHECK(parse_lsfd_mode("matched") == LsfdMode::matched);
    CHECK_THROWS_AS(parse_lsfd_mode("optimal"), ConfigError);
}

TEST_CASE("single-link SINR by hand") {
    Matrix beta(1, 1);
    beta << 1e-10;
    const auto pa = distinct_pilots(1);
    const double pp = 0.1, sigma2 = 1e-12, rho = 0.1 / sigma2, eta = 0.6;
    const double gamma = estimation_quality(beta, pa, pp, 5, sigma2)(0, 0);
    Vector e(1);
    e << eta;
    SUBCASE("weak branch") {
        const int A = 1;
        const SINRBreakdown r = build(beta, pa, Matrix::Ones(1, 1), A, rho).evaluate(e, Matrix::Ones(1, 1));
        CHECK(r.ds[0] == doctest::Approx(rho * eta * A * A * gamma * gamma));
        CHECK(r.bu[0] == doctest::Approx(rho * eta * A * gamma * 1e-10));
        CHECK(r.n[0] == doctest::Approx(A * gamma));
        CHECK(r.sinr[0] == doctest::Approx(rho * eta * A * gamma / (rho * eta * 1e-10 + 1.0)));
    }
    SUBCASE("strong branch") {
        const int A = 8;
        const SINRBreakdown r = build(beta, pa, Matrix::Ones(1, 1), A, rho).evaluate(e, Matrix::Ones(1, 1));
        const double expected = rho * eta * gamma * (A - 1) / (rho * eta * (1e-10 - gamma) + 1.0);
        CHECK(r.sinr[0] == doctest::Approx(expected));
        CHECK(r.pc[0] == 0.0);
        CHECK(r.ni[0] == 0.0);
    }
}

TEST_CASE("SINR properties") {
    const ProblemSpec ps = testing::small_problem(8, 9, 11);
    const SinrModel model = candidate_model(ps);
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 30; ++trial) {
        const Vector eta = testing::uniform_vector(rng, 9, 0.05, 1.0);
        const Matrix d = testing::uniform_matrix(rng, 8, 9, 0.0, 1.0);
        const SINRBreakdown base = model.evaluate(eta, d);
        CHECK((base.sinr.array() >= 0.0).all());
        CHECK(base.i.isApprox(base.pc + base.bu + base.ni + base.n));

        // Frozen-association form reproduces the full evaluation.
        const auto frozen = model.freeze_association(d);
        const Vector i = model.rho() * (frozen.coupling * eta) + frozen.noise;
        CHECK(i.isApprox(base.i, 1e-10));
        const Vector ds = model.rho() * eta.cwiseProduct(frozen.gain.cwiseAbs2());
        CHECK(ds.isApprox(base.ds, 1e-10));

        // Own power helps, other power does not.
        const int t = trial % 9;
        Vector up = eta;
        up[t] = std::min(1.0, eta[t] * 1.5);
        const SINRBreakdown raised = model.evaluate(up, d);
        CHECK(raised.sinr[t] >= base.sinr[t] * (1 - 1e-12));
        for (int u = 0; u < 9; ++u) {
            if (u != t) CHECK(raised.sinr[u] <= base.sinr[u] * (1 + 1e-12));
        }

        // Dropping a link never raises the desired signal.
        Matrix less = d;
        less(trial % 8, t) = 0.0;
        CHECK(model.evaluate(eta, less).ds[t] <= base.ds[t] * (1 + 1e-12));
    }
    const SINRBreakdown off = model.evaluate(Vector::Zero(9), Matrix::Ones(8, 9));
    CHECK(off.sinr.isZero());
    CHECK(off.n.minCoeff() > 0.0);
}

TEST_CASE("sum SE") {
    SINRBreakdown r;
    r.sinr = Vector(2);
    r.sinr << 1.0, 3.0;
    const SEResult se = sum_se(r, 0.5);
    CHECK(se.per_ue[0] == doctest::Approx(0.5));
    CHECK(se.per_ue[1] == doctest::Approx(1.0));
    CHECK(se.sum == doctest::Approx(1.5));
}

TEST_CASE("an AP without spare antennas is rejected") {
    Matrix beta = Matrix::Ones(1, 2);
    const auto pa = distinct_pilots(2);
    LSFCMatrix lsfc{beta, estimation_quality(beta, pa, 0.1, 5, 1.0)};
    Grouping g = classify_users(beta, Matrix::Ones(1, 2), pa, 0.95, 2, 5);
    g.strong_at[0] = {0, 1};
    g.l_strong[0] = 2;
    const LSFDWeights w{Matrix::Ones(1, 2)};
    CHECK_THROWS_AS(SinrModel(lsfc, pa, g, w, 2, 1.0), GroupingInfeasible);
}

}
