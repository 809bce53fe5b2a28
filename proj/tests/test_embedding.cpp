#include <doctest.h>

#include <random>
#include <sstream>

#include "helpers.hpp"
#include "pft/errors.hpp"
#include "pft/io.hpp"

using namespace pft;
using testutil::fixed;
using testutil::max_abs;
using testutil::periodic;

TEST_CASE("induced metric of flat, boosted and tilted slices") {
    LatticeSpec s = periodic(32, 0.25, 1.0);
    Embedding flat = Embedding::flat(s);
    CHECK(max_abs(induced_metric(flat).array() - 1.0) == 0.0);
    CHECK(max_abs(induced_metric(boost(flat, 0.7)).array() - 1.0) < 1e-14);
    const double lam = 0.6;
    CHECK(max_abs(induced_metric(testutil::tilted(s, lam)).array() - (1 - lam * lam)) < 1e-14);
}

TEST_CASE("unit normal and conormal") {
    LatticeSpec s = periodic(16, 0.5, 1.0);
    Embedding flat = Embedding::flat(s);
    DeformationVector n = unit_normal(flat);
    CHECK(max_abs(n.v0.array() - 1.0) == 0.0);
    CHECK(max_abs(n.v1) == 0.0);

    const double w = 0.4;
    DeformationVector c = unit_conormal(boost(flat, w));
    CHECK(max_abs(c.v0.array() - std::cosh(w)) < 1e-13);
    CHECK(max_abs(c.v1.array() - std::sinh(w)) < 1e-13);

    const double lam = 0.3;
    DeformationVector nt = unit_normal(testutil::tilted(s, lam));
    const double norm = 1.0 / std::sqrt(1 - lam * lam);
    CHECK(max_abs(nt.v0.array() - norm) < 1e-14);
    CHECK(max_abs(nt.v1.array() - lam * norm) < 1e-14);
}

TEST_CASE("extrinsic curvature of a flat slice vanishes") {
    LatticeSpec s = fixed(20, 0.3, 0.0);
    CHECK(max_abs(extrinsic_curvature_trace(Embedding::flat(s, 1.5))) == 0.0);
    CHECK(max_abs(extrinsic_curvature_trace(boost(Embedding::flat(s), 0.5))) < 1e-12);
}

TEST_CASE("extrinsic curvature of a hyperbola converges to 1/R") {
    const double R = 2.0;
    double prev = 0.0;
    for (int n : {32, 64, 128}) {
        LatticeSpec s = fixed(n, 2.0 / n, 0.0);
        Eigen::VectorXd eta = s.labels();
        Eigen::VectorXd t = R * eta.array().cosh(), x = R * eta.array().sinh();
        Embedding h(s, t, x);
        Eigen::VectorXd k = extrinsic_curvature_trace(h);
        const double err = max_abs(k.segment(1, n - 2).cwiseAbs().array() - 1.0 / R);
        if (prev > 0.0) CHECK(prev / err > 3.5);
        prev = err;
    }
    CHECK(prev < 1e-4);
}

TEST_CASE("extrinsic curvature of a Gaussian bump converges to the analytic value") {
    const double eps = 0.2;
    double prev = 0.0;
    for (int n : {64, 128, 256}) {
        LatticeSpec s = fixed(n, 12.0 / n, 0.0);
        Embedding e = testutil::bump(s, 0.0, eps, 1.0);
        Eigen::VectorXd k = extrinsic_curvature_trace(e);
        double err = 0.0;
        for (int i = 1; i + 1 < n; ++i) {
            const double x = s.label(i), g = std::exp(-x * x);
            const double t1 = -2 * eps * x * g, t2 = eps * (4 * x * x - 2) * g;
            err = std::max(err, std::abs(k[i] - t2 / std::pow(1 - t1 * t1, 1.5)));
        }
        if (prev > 0.0) CHECK(prev / err > 3.5);
        prev = err;
    }
}

TEST_CASE("translate shifts coordinates and composes in the parameter") {
    LatticeSpec s = periodic(16, 0.5, 1.0);
    Embedding flat = Embedding::flat(s);
    Embedding e = translate(flat, DeformationVector::constant(16, 1.0, 0.0), 2.5);
    CHECK((e.t().array() == 2.5).all());
    CHECK((e.x().array() == flat.x().array()).all());

    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    DeformationVector v(Eigen::VectorXd::Constant(16, 1.0), Eigen::VectorXd::Zero(16));
    for (int i = 0; i < 16; ++i) v.v0[i] += 0.2 * u(rng);
    const double s1 = 0.37, s2 = 0.61;
    Embedding a = translate(translate(flat, v, s1), v, s2);
    Embedding b = translate(flat, v, s1 + s2);
    CHECK(a.same_geometry(b));
}

TEST_CASE("translate rejects non-spacelike results") {
    LatticeSpec s = periodic(16, 0.5, 1.0);
    DeformationVector v = DeformationVector::zero(16);
    v.v0[3] = 1.0;
    CHECK_THROWS_AS(translate(Embedding::flat(s), v, 2.0), NotSpacelike);
}

TEST_CASE("inertial family from a boosted seed") {
    LatticeSpec s = periodic(16, 0.5, 1.0);
    const double w = 0.3, t = 0.8;
    Embedding seed = boost(Embedding::flat(s), w);
    Embedding e = translate(seed, DeformationVector::constant(16, std::cosh(w), -std::sinh(w)), t);
    // still a boosted flat slice, moved by t along its own normal
    DeformationVector c = unit_conormal(e);
    CHECK(max_abs(c.v0.array() - std::cosh(w)) < 1e-12);
    Eigen::VectorXd proper = std::cosh(w) * e.t() + std::sinh(w) * e.x();
    CHECK(max_abs(proper.array() - t) < 1e-12);
}

TEST_CASE("boost of a flat slice") {
    LatticeSpec s = periodic(16, 0.5, 1.0);
    const double w = 0.45;
    Embedding flat = Embedding::flat(s);
    Embedding b = boost(flat, w);
    CHECK(max_abs(b.t() + std::sinh(w) * s.labels()) < 1e-14);
    CHECK(max_abs(b.x() - std::cosh(w) * s.labels()) < 1e-14);
    Embedding bb = boost(boost(flat, 0.2), 0.25);
    CHECK(max_abs(bb.t() - boost(flat, 0.45).t()) < 1e-12);
    CHECK(max_abs(bb.x() - boost(flat, 0.45).x()) < 1e-12);
    CHECK(boost(flat, 0.0).same_geometry(flat));
}

TEST_CASE("special conformal image of a flat window") {
    const double alpha = 1.0;
    const int n = 20;
    LatticeSpec s = fixed(n, 1.8 / n, 0.0);
    Eigen::VectorXd x = s.labels().array() + alpha;  // inside (0, 2 alpha)
    Embedding e(s, Eigen::VectorXd::Zero(n), x);
    Embedding img = special_conformal(e, alpha);
    CHECK(max_abs(img.t()) == 0.0);
    // direct evaluation; the image runs against the label, so samples come back reversed
    for (int i = 0; i < n; ++i) {
        const double X = x[n - 1 - i];
        const double beta = 2 * X / alpha - X * X / (alpha * alpha);
        CHECK(img.x()[i] == doctest::Approx((X - X * X / alpha) / beta).epsilon(1e-14));
    }
}

TEST_CASE("special conformal map is singular where beta vanishes") {
    const double alpha = 1.0;
    LatticeSpec s = fixed(9, 0.25, 0.0);
    Eigen::VectorXd x = s.labels().array() + 2 * alpha - s.label(4);  // site 4 at x = 2 alpha
    CHECK_THROWS_AS(special_conformal(Embedding(s, Eigen::VectorXd::Zero(9), x), alpha), SingularConformalMap);
}

TEST_CASE("lapse and shift reconstruct the deformation") {
    LatticeSpec s = periodic(16, 0.5, 1.0);
    Embedding e = testutil::bump(s, 0.0, 0.3, 1.5);
    DeformationVector v = DeformationVector::constant(16, 1.2, 0.3);
    LapseShift ls = lapse_shift(e, v);
    DeformationVector n = unit_normal(e);
    Tangent tg = tangent(e);
    CHECK(max_abs(ls.lapse.cwiseProduct(n.v0) + ls.shift.cwiseProduct(tg.dt) - v.v0) < 1e-12);
    CHECK(max_abs(ls.lapse.cwiseProduct(n.v1) + ls.shift.cwiseProduct(tg.dx) - v.v1) < 1e-12);
}

TEST_CASE("embedding CSV round trip is exact") {
    LatticeSpec s = periodic(16, 0.3, 1.0);
    Embedding e = boost(testutil::bump(s, 0.1, 0.2, 0.7), 0.3);
    std::stringstream ss;
    write_embedding_csv(ss, e);
    Embedding r = read_embedding_csv(ss);
    CHECK(r.same_geometry(e));
    CHECK(r.id() == e.id());
    CHECK(r.spec() == e.spec());
}

TEST_CASE("embedding ids are content hashes") {
    LatticeSpec s = periodic(16, 0.3, 1.0);
    CHECK(Embedding::flat(s).id() == Embedding::flat(s).id());
    CHECK(Embedding::flat(s).id() != Embedding::flat(s, 1e-12).id());
}

TEST_CASE("lattice validation") {
    CHECK_THROWS_AS(LatticeSpec(2, 0.1, 1.0, Boundary::Periodic).validate(), InvalidLattice);
    CHECK_THROWS_AS(LatticeSpec(8, -0.1, 1.0, Boundary::Periodic).validate(), InvalidLattice);
    CHECK_THROWS_AS(LatticeSpec(8, 0.1, -1.0, Boundary::Periodic).validate(), InvalidLattice);
    CHECK(boundary_from_string("fixed-zero") == Boundary::FixedZero);
}
