#include <doctest.h>

#include <numbers>

#include "helpers.hpp"
#include "pft/errors.hpp"
#include "pft/evolve.hpp"
#include "pft/foliation.hpp"
#include "pft/relational.hpp"

using namespace pft;
using testutil::fixed;
using testutil::max_abs;
using testutil::periodic;

namespace {

SmearedHamiltonian oscillators(int n, double w) {
    SmearedHamiltonian h;
    h.matrix = SpMat(2 * n, 2 * n);
    h.matrix.setIdentity();
    h.matrix *= w;
    return h;
}

GaussianState packet_state(const LatticeSpec& s, const Embedding& e) {
    return GaussianState::vacuum(s, e).displaced(testutil::packet(s, 0.7, 1.0), testutil::packet(s, 0.1, 0.8, 0.3));
}

}  // namespace

TEST_CASE("decoupled oscillators rotate in phase space") {
    const int n = 4;
    const double w = 1.7;
    LatticeSpec s = periodic(n, 1.0, 1.0);
    GaussianState st = GaussianState::vacuum(s, Embedding::flat(s)).displaced(Eigen::VectorXd::LinSpaced(n, 0.2, 1.0),
                                                                              Eigen::VectorXd::Constant(n, -0.4));
    double prev = 0.0;
    for (double dt : {0.1, 0.05}) {
        GaussianState out = step(st, oscillators(n, w), dt);
        // the midpoint rule rotates by 2 atan(w dt / 2)
        const double th = 2 * std::atan(0.5 * w * dt);
        Eigen::VectorXd phi = std::cos(th) * st.mean.head(n) + std::sin(th) * st.mean.tail(n);
        Eigen::VectorXd p = -std::sin(th) * st.mean.head(n) + std::cos(th) * st.mean.tail(n);
        CHECK(max_abs(out.mean.head(n) - phi) < 1e-14);
        CHECK(max_abs(out.mean.tail(n) - p) < 1e-14);
        const double exact = std::cos(w * dt) * st.mean[0] + std::sin(w * dt) * st.mean[n];
        const double err = std::abs(out.mean[0] - exact);
        if (prev > 0.0) CHECK(prev / err > 7.0);
        prev = err;
    }
}

TEST_CASE("zero generator is the identity") {
    LatticeSpec s = periodic(8, 0.5, 1.0);
    GaussianState st = packet_state(s, Embedding::flat(s));
    GaussianState out = step(st, oscillators(8, 0.0), 0.3);
    CHECK(max_abs(out.mean - st.mean) == 0.0);
    CHECK(max_abs(out.cov - st.cov) == 0.0);
}

TEST_CASE("flat vacuum is stationary") {
    LatticeSpec s = periodic(32, 0.25, 1.0);
    Embedding e = Embedding::flat(s);
    GaussianState vac = GaussianState::vacuum(s, e);
    SmearedHamiltonian h = flat_hamiltonian(s, 0.0);
    for (double dt : {0.01, 0.06}) CHECK(max_abs(step(vac, h, dt).cov - vac.cov) < 1e-12);
    GaussianState ev = evolve_foliation(vac, build_inertial(s, 0.0, 0.0, 1.0, 40));
    CHECK(max_abs(ev.cov - vac.cov) < 1e-12);
    CHECK(ev.purity_defect() < 1e-10);
}

TEST_CASE("single-step foliation is a single step") {
    LatticeSpec s = periodic(16, 0.25, 1.0);
    Embedding a = Embedding::flat(s), b = testutil::bump(s, 0.05, 0.01, 1.0);
    GaussianState st = packet_state(s, a);
    GaussianState f = evolve_foliation(st, build_interpolating(a, b, Schedule{}, 1));
    DeformationVector v = difference(a, b);
    GaussianState d = step(st, smear_flux(s, interpolate(a, b, 0.5), v), 1.0);
    CHECK(max_abs(f.mean - d.mean) < 1e-13);
    CHECK(max_abs(f.cov - d.cov) < 1e-13);
    CHECK(f.embedding_id == b.id());
}

TEST_CASE("large steps are rejected") {
    LatticeSpec s = periodic(16, 0.25, 1.0);
    GaussianState st = GaussianState::vacuum(s, Embedding::flat(s));
    CHECK_THROWS_AS(step(st, flat_hamiltonian(s, 0.0), 0.5), StepTooLarge);
}

TEST_CASE("evolution must start on the first leaf") {
    LatticeSpec s = periodic(16, 0.25, 1.0);
    GaussianState st = GaussianState::vacuum(s, Embedding::flat(s, 0.3));
    CHECK_THROWS_AS(evolve_foliation(st, build_inertial(s, 0.0, 0.0, 1.0, 10)), LeafMismatch);
}

TEST_CASE("frame change to the same slice is the identity") {
    LatticeSpec s = periodic(16, 0.25, 1.0);
    Embedding e = testutil::bump(s, 0.0, 0.2, 1.0);
    Propagator p = frame_change_unitary(s, e, e);
    CHECK(max_abs(p.S - Eigen::MatrixXd::Identity(32, 32)) == 0.0);
    CHECK(p.phase_increment == 0.0);
}

TEST_CASE("frame change along a time translation matches inertial evolution") {
    LatticeSpec s = periodic(32, 0.25, 1.0);
    Embedding a = Embedding::flat(s), b = Embedding::flat(s, 0.8);
    FrameChangeOptions fo;
    fo.substeps = 64;
    GaussianState st = packet_state(s, a);
    GaussianState x = frame_change_unitary(s, a, b, fo).apply(st, b.id());
    GaussianState y = evolve_foliation(st, build_inertial(s, 0.0, 0.0, 0.8, 64));
    CHECK(max_abs(x.mean - y.mean) < 1e-10);
    CHECK(max_abs(x.cov - y.cov) < 1e-10);
    GaussianState z = apply_frame_change(st, a, b, fo);
    CHECK(max_abs(x.mean - z.mean) < 1e-12);
}

TEST_CASE("propagators are symplectic and preserve purity") {
    LatticeSpec s = periodic(32, 0.25, 1.0);
    Embedding a = Embedding::flat(s), b = boost(testutil::bump(s, 0.5, 0.2, 1.0), 0.2);
    Propagator p = frame_change_unitary(s, a, b);
    CHECK(symplectic_drift(p.S) < 1e-10);
    CHECK(symplectic_drift(p.inverse().after(p).S) < 1e-10);
    CHECK(max_abs(p.inverse().after(p).S - Eigen::MatrixXd::Identity(64, 64)) < 1e-10);
    CHECK(p.apply(GaussianState::vacuum(s, a), b.id()).purity_defect() < 1e-8);
}

TEST_CASE("symplectic projection repairs a perturbed matrix") {
    LatticeSpec s = periodic(8, 0.5, 1.0);
    Eigen::MatrixXd S = frame_change_unitary(s, Embedding::flat(s), Embedding::flat(s, 0.5)).S;
    S(0, 3) += 1e-7;
    const double before = symplectic_drift(S);
    CHECK(symplectic_drift(symplectic_projection(S)) < 1e-3 * before);
}

TEST_CASE("Tomonaga-Schwinger residual of the vacuum family") {
    LatticeSpec s = periodic(32, 0.25, 1.0);
    Embedding e = Embedding::flat(s);
    PhysicalFamily fam(e, GaussianState::vacuum(s, e));
    std::vector<double> r;
    for (double eps : {1e-2, 5e-3, 2.5e-3}) r.push_back(ts_residual(s, fam.rule(), e, 10, eps).residual);
    for (std::size_t i = 1; i < r.size(); ++i) CHECK(std::log2(r[i - 1] / r[i]) > 1.0);
    CHECK_THROWS_AS(ts_residual(s, fam.rule(), e, 10, 0.0), DegenerateInput);
}

TEST_CASE("boundary sites of fixed-zero lattices are flagged") {
    LatticeSpec s = fixed(16, 0.25, 1.0);
    Embedding e = Embedding::flat(s);
    PhysicalFamily fam(e, GaussianState::vacuum(s, e));
    CHECK(ts_residual(s, fam.rule(), e, 0, 1e-3).boundary_site);
    CHECK(ts_residual(s, fam.rule(), e, 15, 1e-3).boundary_site);
    CHECK_FALSE(ts_residual(s, fam.rule(), e, 7, 1e-3).boundary_site);
}

TEST_CASE("classical leapfrog keeps a standing wave") {
    const int n = 64;
    const double dx = 0.25, m = 1.0;
    LatticeSpec s = periodic(n, dx, m);
    const double k = 2 * std::numbers::pi * 3 / (n * dx);
    const double w = std::sqrt(m * m + 4 / (dx * dx) * std::pow(std::sin(k * dx / 2), 2));
    Eigen::VectorXd phi0 = (k * s.labels().array()).cos();
    Eigen::VectorXd out = classical_leapfrog(s, phi0, Eigen::VectorXd::Zero(n), 1.0, 4000);
    CHECK(max_abs(out - std::cos(w) * phi0) < 1e-5);
}
