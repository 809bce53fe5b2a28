#include <doctest.h>

#include <algorithm>
#include <complex>
#include <numbers>
#include <random>

#include "helpers.hpp"
#include "pft/errors.hpp"
#include "pft/hamiltonian.hpp"
#include "pft/relational.hpp"

using namespace pft;
using testutil::max_abs;
using testutil::periodic;

namespace {

GaussianState coherent(const LatticeSpec& s, const Embedding& e) {
    return GaussianState::vacuum(s, e).displaced(testutil::packet(s, 0.6, 0.8), testutil::packet(s, -0.05, 1.0, 0.4));
}

}  // namespace

TEST_CASE("reduction at the anchor returns the anchor state") {
    LatticeSpec s = periodic(16, 0.25, 1.0);
    Embedding e = testutil::bump(s, 0.0, 0.2, 1.0);
    GaussianState st = coherent(s, Embedding::flat(s));
    st.embedding_id = e.id();
    PhysicalFamily fam = reduce_inverse(st, e);
    GaussianState r = reduce(fam, e);
    CHECK(max_abs(r.mean - st.mean) == 0.0);
    CHECK(max_abs(r.cov - st.cov) == 0.0);
    CHECK(r.embedding_id == st.embedding_id);
}

TEST_CASE("reduction at a time-translated anchor is inertial evolution") {
    LatticeSpec s = periodic(32, 0.25, 1.0);
    Embedding a = Embedding::flat(s), b = Embedding::flat(s, 0.6);
    FrameChangeOptions fo;
    fo.substeps = 48;
    PhysicalFamily fam(a, coherent(s, a), fo);
    GaussianState r = reduce(fam, b);
    GaussianState want = evolve_foliation(coherent(s, a), build_inertial(s, 0.0, 0.0, 0.6, 48));
    CHECK(max_abs(r.mean - want.mean) < 1e-10);
    CHECK(max_abs(r.cov - want.cov) < 1e-10);
}

TEST_CASE("reduce after reduce_inverse is the identity") {
    LatticeSpec s = periodic(16, 0.25, 1.0);
    Embedding a = Embedding::flat(s), b = testutil::bump(s, 0.4, 0.1, 1.0);
    PhysicalFamily fam(a, coherent(s, a));
    GaussianState at_b = reduce(fam, b);
    GaussianState round = reduce(reduce_inverse(at_b, b), b);
    CHECK(max_abs(round.mean - at_b.mean) < 1e-12);
    CHECK(max_abs(round.cov - at_b.cov) < 1e-12);
}

TEST_CASE("family consistency and fault detection") {
    LatticeSpec s = periodic(16, 0.25, 1.0);
    Embedding a = Embedding::flat(s);
    PhysicalFamily fam(a, coherent(s, a));
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<Embedding> embs;
    for (int i = 0; i < 3; ++i) embs.push_back(Embedding::flat(s, u(rng)));
    // inertial routes differ only by midpoint-rule error in the substep size
    for (int i = 0; i < 3; ++i) {
        double d[2];
        for (int r = 0; r < 2; ++r) {
            FrameChangeOptions fo;
            fo.substeps = 32 << r;
            d[r] = consistency_defect(PhysicalFamily(a, coherent(s, a), fo), embs[i], embs[(i + 1) % 3]);
        }
        CHECK(d[0] / d[1] > 3.5);
    }

    // a rule that forgets the dynamics off the anchor
    PhysicalFamily broken = fam.with_rule([&](const Embedding& e) {
        GaussianState st = fam.anchor_state();
        st.embedding_id = e.id();
        return st;
    });
    CHECK(consistency_defect(broken, embs[0], embs[1]) > 1e-3);
}

TEST_CASE("curved routes agree in the continuum limit") {
    double prev = 0.0;
    for (int n : {16, 32, 64}) {
        LatticeSpec s = periodic(n, 4.0 / n, 1.0);
        Embedding a = Embedding::flat(s);
        PhysicalFamily fam(a, coherent(s, a));
        const double d = consistency_defect(fam, testutil::bump(s, 0.2, 0.1, 1.0), testutil::bump(s, 0.4, 0.05, 1.0));
        if (prev > 0.0) CHECK(prev / d > 3.0);
        prev = d;
    }
}

TEST_CASE("unreachable embeddings are reported") {
    LatticeSpec s = periodic(16, 0.25, 1.0);
    LatticeSpec other = periodic(8, 0.25, 1.0);
    Embedding a = Embedding::flat(s);
    PhysicalFamily fam(a, GaussianState::vacuum(s, a));
    CHECK_THROWS(reduce(fam, Embedding::flat(other)));
    CHECK_THROWS_AS(PhysicalFamily(Embedding::flat(s, 1.0), GaussianState::vacuum(s, a)), LeafMismatch);
}

TEST_CASE("Dirac expectations") {
    const int n = 16;
    const double dx = 0.25;
    LatticeSpec s = periodic(n, dx, 1.0);
    Embedding e = Embedding::flat(s);
    PhysicalFamily fam(e, GaussianState::vacuum(s, e));
    CHECK(dirac_expectation(fam, QuadraticForm(Eigen::MatrixXd::Zero(2 * n, 2 * n), 1.0), e) == 1.0);

    // sum_i dx phi_i^2 in the vacuum: sum_k 1 / (2 omega_k)
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    m.topLeftCorner(n, n) = 2 * dx * Eigen::MatrixXd::Identity(n, n);
    double want = 0.0;
    for (int j = -(n - 1) / 2; j <= n / 2; ++j) want += 0.5 / lattice_omega(s, 2 * std::numbers::pi * j / (n * dx));
    CHECK(dirac_expectation(fam, QuadraticForm(m), e) == doctest::Approx(want).epsilon(1e-12));

    std::mt19937_64 rng(9);
    QuadraticForm a(testutil::random_symmetric(2 * n, rng), 0.3);
    CHECK(std::abs(dirac_expectation(fam, a, Embedding::flat(s, 0.3)) - dirac_expectation(fam, a, Embedding::flat(s, 0.9))) <
          1e-10);
    CHECK_THROWS_AS(dirac_expectation(fam, QuadraticForm::zero(10), e), DimensionMismatch);
}

TEST_CASE("Heisenberg observables") {
    const int n = 16;
    LatticeSpec s = periodic(n, 0.25, 1.0);
    Embedding e0 = Embedding::flat(s), eq = testutil::bump(s, 0.4, 0.2, 1.0);
    std::mt19937_64 rng(13);
    QuadraticForm a0(testutil::random_symmetric(2 * n, rng), -0.2);

    QuadraticForm same = heisenberg_observable(s, a0, e0, e0);
    CHECK(max_abs(same.matrix - a0.matrix) == 0.0);
    CHECK(same.offset == a0.offset);

    QuadraticForm ah = heisenberg_observable(s, a0, eq, e0);
    Eigen::MatrixXd om = symplectic_omega(n);
    auto spectrum = [](const Eigen::MatrixXd& x) {
        Eigen::VectorXcd ev = Eigen::EigenSolver<Eigen::MatrixXd>(x).eigenvalues();
        std::vector<double> v;
        for (int i = 0; i < ev.size(); ++i) v.push_back(std::abs(ev[i]));
        std::sort(v.begin(), v.end());
        return v;
    };
    auto s0 = spectrum(om * a0.matrix), s1 = spectrum(om * ah.matrix);
    for (std::size_t i = 0; i < s0.size(); ++i) CHECK(s1[i] == doctest::Approx(s0[i]).epsilon(1e-9));

    GaussianState st = coherent(s, e0);
    PhysicalFamily fam(e0, st);
    CHECK(std::abs(st.expectation(ah) - reduce(fam, eq).expectation(a0)) < 1e-10);
}

TEST_CASE("Heisenberg equation residual") {
    const int n = 16, site = 6;
    LatticeSpec s = periodic(n, 0.25, 1.0);
    Embedding e = Embedding::flat(s);
    std::mt19937_64 rng(17);
    QuadraticForm a0(testutil::random_symmetric(2 * n, rng));
    std::vector<double> r;
    for (double eps : {1e-2, 5e-3, 2.5e-3}) r.push_back(heisenberg_equation_residual(s, a0, e, site, eps));
    for (std::size_t i = 1; i < r.size(); ++i) CHECK(std::log2(r[i - 1] / r[i]) > 1.9);
    CHECK_THROWS_AS(heisenberg_equation_residual(s, a0, e, site, 0.0), DegenerateInput);

    // an observable supported away from the deformed site commutes with every generator involved
    Eigen::MatrixXd far = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    far(site + 4, site + 4) = 1.0;
    far(n + site + 5, n + site + 5) = 0.5;
    CHECK(heisenberg_equation_residual(s, QuadraticForm(far), e, site, 1e-2) < 1e-12);
}
