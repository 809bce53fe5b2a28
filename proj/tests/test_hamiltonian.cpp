#include <doctest.h>

#include "helpers.hpp"
#include "pft/errors.hpp"
#include "pft/evolve.hpp"
#include "pft/hamiltonian.hpp"

using namespace pft;
using testutil::fixed;
using testutil::max_abs;
using testutil::periodic;

TEST_CASE("flat normal flux is the lattice Klein-Gordon Hamiltonian") {
    const int n = 10;
    const double dx = 0.3, m = 1.4;
    LatticeSpec s = periodic(n, dx, m);
    Eigen::MatrixXd got = Eigen::MatrixXd(smear_flux(s, Embedding::flat(s), DeformationVector::constant(n, 1, 0)).matrix);
    // sum dx (pi^2/2 + ((phi_{i+1} - phi_i)/dx)^2/2 + m^2 phi^2/2), p = dx pi
    Eigen::MatrixXd want = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    for (int i = 0; i < n; ++i) {
        const int r = (i + 1) % n;
        want(n + i, n + i) = 1.0 / dx;
        want(i, i) += dx * m * m + 2.0 / dx;
        want(i, r) -= 1.0 / dx;
        want(r, i) -= 1.0 / dx;
    }
    CHECK(max_abs(got - want) < 1e-12);
}

TEST_CASE("tangential flux translates field data") {
    const int n = 128;
    const double dx = 0.1, shift = 0.3;
    LatticeSpec s = periodic(n, dx, 1.0);
    Embedding e = Embedding::flat(s);
    SmearedHamiltonian h = smear_flux(s, e, DeformationVector::constant(n, 0.0, 1.0));
    CHECK(max_abs(Eigen::MatrixXd(h.perp)) == 0.0);
    GaussianState st = GaussianState::vacuum(s, e).displaced(testutil::packet(s, 1.0, 1.0), Eigen::VectorXd::Zero(n));
    const int steps = 300;
    for (int k = 0; k < steps; ++k) st = step(st, h, shift / steps);
    // moving the slice by +shift samples the field at x + shift
    Eigen::VectorXd want = testutil::packet(s, 1.0, 1.0, -shift);
    CHECK(max_abs(st.mean.head(n) - want) < 5e-3);
}

TEST_CASE("boosted inertial generator is the boosted flat Hamiltonian") {
    LatticeSpec s = periodic(16, 0.25, 1.0);
    const double w = 0.35;
    SmearedHamiltonian a = smear_flux(s, boost(Embedding::flat(s), w),
                                      DeformationVector::constant(16, std::cosh(w), -std::sinh(w)));
    SmearedHamiltonian b = flat_hamiltonian(s, w);
    CHECK(max_abs(Eigen::MatrixXd(a.matrix - b.matrix)) < 1e-12);
}

TEST_CASE("normal and parallel parts add up to the flux") {
    LatticeSpec s = periodic(16, 0.25, 0.6);
    Embedding e = boost(testutil::bump(s, 0.0, 0.2, 1.0), 0.2);
    SmearedHamiltonian h = smear_flux(s, e, DeformationVector::constant(16, 1.2, 0.4));
    CHECK(max_abs(h.perp_form().matrix + h.par_form().matrix - h.form().matrix) < 1e-13);
    CHECK(h.anomaly_rate == 0.0);
}

TEST_CASE("anomaly potential of flat slices vanishes") {
    LatticeSpec s = fixed(32, 0.25, 0.0);
    DeformationVector a = anomaly_potential(s, Embedding::flat(s, 0.7));
    CHECK(max_abs(a.v0) == 0.0);
    CHECK(max_abs(a.v1) == 0.0);
    CHECK(integrated_anomaly(s, Embedding::flat(s), DeformationVector::constant(32, 1, 0)) == 0.0);
    CHECK(smear_flux(s, Embedding::flat(s), DeformationVector::constant(32, 1, 0)).anomaly_rate == 0.0);
}

TEST_CASE("anomaly potential of a bump converges to the analytic expression") {
    const double eps = 0.2;
    double prev = 0.0;
    for (int n : {64, 128, 256}) {
        LatticeSpec s = fixed(n, 12.0 / n, 0.0);
        DeformationVector a = anomaly_potential(s, testutil::bump(s, 0.0, eps, 1.0));
        double err = 0.0;
        for (int i = 2; i + 2 < n; ++i) {
            const double x = s.label(i), g = std::exp(-x * x);
            const double t0 = eps * g, t1 = -2 * eps * x * g, t2 = eps * (4 * x * x - 2) * g;
            const double t3 = eps * (12 * x - 8 * x * x * x) * g;
            const double gam = 1 - t1 * t1, sg = std::sqrt(gam);
            const double k = t2 / std::pow(gam, 1.5);
            const double dk = t3 / std::pow(gam, 1.5) + 3 * t1 * t2 * t2 / std::pow(gam, 2.5);
            // X_mu = (-T, X), n_mu = (-1, T') / sqrt(gamma)
            const double a0 = sg * (-t0 * dk + k * k / sg);
            const double a1 = sg * (x * dk - k * k * t1 / sg);
            err = std::max({err, std::abs(a.v0[i] - a0), std::abs(a.v1[i] - a1)});
        }
        if (prev > 0.0) CHECK(prev / err > 3.0);
        prev = err;
    }
}

TEST_CASE("anomaly on a hyperbola segment is finite and nonzero") {
    LatticeSpec s = fixed(32, 1.0 / 32, 0.0);
    Eigen::VectorXd eta = s.labels();
    Embedding h(s, 2.0 * eta.array().cosh(), 2.0 * eta.array().sinh());
    DeformationVector a = anomaly_potential(s, h);
    CHECK(a.v0.allFinite());
    CHECK(max_abs(a.v0) > 0.0);
}

TEST_CASE("anomaly over half of a bump does not integrate away") {
    LatticeSpec s = fixed(128, 0.125, 0.0);
    Embedding e = testutil::bump(s, 0.0, 0.3, 1.0);
    Eigen::VectorXd mask = (s.labels().array() < 0.0).cast<double>();
    CHECK(std::abs(partial_anomaly(s, e, DeformationVector::constant(128, 1, 0), mask)) > 1e-3);
}

TEST_CASE("anomaly needs a massless field") {
    LatticeSpec s = fixed(16, 0.25, 1.0);
    CHECK_THROWS_AS(anomaly_potential(s, Embedding::flat(s)), MassiveField);
}
