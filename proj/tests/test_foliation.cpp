#include <doctest.h>

#include <numbers>

#include "helpers.hpp"
#include "pft/errors.hpp"
#include "pft/foliation.hpp"

using namespace pft;
using testutil::max_abs;
using testutil::periodic;

TEST_CASE("unboosted inertial foliation") {
    LatticeSpec s = periodic(16, 0.25, 1.0);
    Foliation f = build_inertial(s, 0.0, 0.0, 1.0, 4);
    REQUIRE(f.n_steps() == 4);
    for (int k = 0; k <= 4; ++k) {
        CHECK(max_abs(f.leaves()[k].t().array() - 0.25 * k) < 1e-15);
        CHECK(max_abs(f.leaves()[k].x() - s.labels()) == 0.0);
    }
    for (int k = 0; k < 4; ++k) {
        StepDecomposition d = decompose_deformation(f, k);
        CHECK(max_abs(d.lapse.array() - 1.0) < 1e-12);
        CHECK(max_abs(d.shift) < 1e-12);
    }
}

TEST_CASE("boosted inertial foliation has unit lapse and no shift") {
    LatticeSpec s = periodic(16, 0.25, 1.0);
    const double w = 0.5;
    Foliation f = build_inertial(s, w, 0.0, 2.0, 3);
    for (int k = 0; k < 3; ++k) {
        StepDecomposition d = decompose_deformation(f, k);
        CHECK(max_abs(d.lapse.array() - 1.0) < 1e-12);
        CHECK(max_abs(d.shift) < 1e-12);
        DeformationVector c = unit_conormal(f.leaves()[k]);
        CHECK(max_abs(c.v0.array() - std::cosh(w)) < 1e-12);
        CHECK(max_abs(c.v1.array() - std::sinh(w)) < 1e-12);
    }
}

TEST_CASE("single-step foliation") {
    LatticeSpec s = periodic(16, 0.25, 1.0);
    Embedding a = Embedding::flat(s), b = testutil::bump(s, 0.5, 0.1, 1.0);
    Foliation f = build_interpolating(a, b, Schedule{}, 1);
    REQUIRE(f.leaves().size() == 2);
    DeformationVector d = difference(f.leaves()[0], f.leaves()[1]);
    CHECK(max_abs(d.v0 - (b.t() - a.t())) == 0.0);
}

TEST_CASE("identical endpoints give identical leaves") {
    LatticeSpec s = periodic(16, 0.25, 1.0);
    Embedding a = testutil::bump(s, 0.2, 0.1, 1.0);
    for (ScheduleKind k : {ScheduleKind::Linear, ScheduleKind::Smoothstep, ScheduleKind::Bump}) {
        Foliation f = build_interpolating(a, a, Schedule{k, 0.2, 1.0, 0.0}, 5);
        for (const auto& l : f.leaves()) CHECK(l.same_geometry(a));
        CHECK_FALSE(f.is_foliation());
    }
}

TEST_CASE("linear interpolation between flat slices is the inertial foliation") {
    LatticeSpec s = periodic(16, 0.25, 1.0);
    Foliation a = build_interpolating(Embedding::flat(s, 0.0), Embedding::flat(s, 1.5), Schedule{}, 6);
    Foliation b = build_inertial(s, 0.0, 0.0, 1.5, 6);
    for (int k = 0; k <= 6; ++k) {
        CHECK(max_abs(a.leaves()[k].t() - b.leaves()[k].t()) < 1e-15);
        CHECK(max_abs(a.leaves()[k].x() - b.leaves()[k].x()) < 1e-15);
    }
}

TEST_CASE("bump schedule validity follows the timelike inequality") {
    // fraction s + A sin(pi s) g(x) advances at every site iff 1 - pi A > 0 at the peak
    LatticeSpec s = periodic(32, 0.25, 1.0);
    Embedding a = Embedding::flat(s, 0.0), b = Embedding::flat(s, 1.0);
    const double crit = 1.0 / std::numbers::pi;
    CHECK_NOTHROW(build_interpolating(a, b, Schedule{ScheduleKind::Bump, 0.9 * crit, 1.0, 0.0}, 200));
    CHECK_THROWS_AS(build_interpolating(a, b, Schedule{ScheduleKind::Bump, 1.1 * crit, 1.0, 0.0}, 200),
                    NonTimelikeDeformation);
}

TEST_CASE("bump endpoint must lie to the future") {
    LatticeSpec s = periodic(32, 0.25, 1.0);
    const double tau = 0.5;
    Embedding a = Embedding::flat(s, 0.0);
    CHECK_NOTHROW(build_interpolating(a, testutil::bump(s, tau, 0.5 * tau, 1.0), Schedule{}, 50));
    CHECK_THROWS_AS(build_interpolating(a, testutil::bump(s, tau, -1.5 * tau, 1.0), Schedule{}, 50),
                    NonTimelikeDeformation);
}

TEST_CASE("pure spatial drag is not a foliation") {
    LatticeSpec s = periodic(16, 0.25, 1.0);
    Embedding a = Embedding::flat(s);
    Embedding b = translate(a, DeformationVector::constant(16, 0.0, 0.25), 1.0);
    CHECK_THROWS_AS(Foliation({a, b}, {0.0, 1.0}), NonTimelikeDeformation);
    Foliation u = Foliation::unchecked({a, b}, {0.0, 1.0});
    CHECK(u.non_foliating_steps() == std::vector<int>{0});
}

TEST_CASE("tilted leaves decompose like the 2x2 projection") {
    LatticeSpec s = periodic(16, 0.25, 1.0);
    const double lam = 0.4, dt = 0.1;
    Foliation f({testutil::tilted(s, lam, 0.0), testutil::tilted(s, lam, dt)}, {0.0, dt});
    StepDecomposition d = decompose_deformation(f, 0);
    // (1, 0) = N (1, lam)/sqrt(1 - lam^2) + N^x (lam, 1)
    Eigen::Matrix2d a;
    a << 1 / std::sqrt(1 - lam * lam), lam, lam / std::sqrt(1 - lam * lam), 1;
    Eigen::Vector2d sol = a.fullPivLu().solve(Eigen::Vector2d(1.0, 0.0));
    CHECK(max_abs(d.lapse.array() - sol[0]) < 1e-12);
    CHECK(max_abs(d.shift.array() - sol[1]) < 1e-12);
    CHECK(d.residual < 1e-12);
}

TEST_CASE("decomposition reconstructs every generated step") {
    LatticeSpec s = periodic(32, 0.25, 1.0);
    Foliation f = build_interpolating(Embedding::flat(s), testutil::bump(s, 1.0, 0.3, 1.0),
                                      Schedule{ScheduleKind::Bump, 0.1, 1.0, 0.5}, 40);
    for (int k = 0; k < f.n_steps(); ++k) CHECK(decompose_deformation(f, k).residual < 1e-12);
}
