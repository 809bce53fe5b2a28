#include "pft/lattice.hpp"

#include <string>

#include "pft/errors.hpp"

namespace pft {

const char* to_string(Boundary b) {
    return b == Boundary::Periodic ? "periodic" : "fixed-zero";
}

Boundary boundary_from_string(const std::string& s) {
    if (s == "periodic") return Boundary::Periodic;
    if (s == "fixed-zero" || s == "fixed_zero") return Boundary::FixedZero;
    throw InvalidLattice("unknown boundary '" + s + "'");
}

LatticeSpec::LatticeSpec(int n, double dx, double m, Boundary b)
    : n_sites(n), spacing(dx), mass(m), boundary(b) {
    validate();
}

void LatticeSpec::validate() const {
    if (n_sites < 4) throw InvalidLattice("n_sites must be >= 4");
    if (!(spacing > 0.0)) throw InvalidLattice("spacing must be > 0");
    if (!(mass >= 0.0)) throw InvalidLattice("mass must be >= 0");
}

double LatticeSpec::label(int i) const {
    if (periodic()) return (i - n_sites / 2) * spacing;
    return (i - 0.5 * (n_sites - 1)) * spacing;
}

Eigen::VectorXd LatticeSpec::labels() const {
    Eigen::VectorXd x(n_sites);
    for (int i = 0; i < n_sites; ++i) x[i] = label(i);
    return x;
}

Eigen::MatrixXd symplectic_omega(int n) {
    Eigen::MatrixXd O = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    O.topRightCorner(n, n).setIdentity();
    O.bottomLeftCorner(n, n) = -Eigen::MatrixXd::Identity(n, n);
    return O;
}

}  // namespace pft
