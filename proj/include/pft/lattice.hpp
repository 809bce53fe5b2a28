#pragma once

#include <string>

#include <Eigen/Dense>

namespace pft {

enum class Boundary { Periodic, FixedZero };

const char* to_string(Boundary b);
Boundary boundary_from_string(const std::string& s);

/// Spatial lattice. Sites sit at labels x_i; the field vanishes on ghost
/// sites i = -1 and i = N for fixed-zero boundaries.
struct LatticeSpec {
    int n_sites = 0;
    double spacing = 0.0;
    double mass = 0.0;
    Boundary boundary = Boundary::Periodic;

    LatticeSpec() = default;
    LatticeSpec(int n, double dx, double m, Boundary b);

    /// Throws InvalidLattice unless n_sites >= 4, spacing > 0, mass >= 0.
    void validate() const;

    double length() const { return n_sites * spacing; }
    bool periodic() const { return boundary == Boundary::Periodic; }
    int dim() const { return 2 * n_sites; }

    /// Site labels, centred on the origin.
    Eigen::VectorXd labels() const;
    double label(int i) const;

    bool operator==(const LatticeSpec&) const = default;
    /// Same sites, spacing and boundary; the mass is a property of the field.
    bool same_lattice(const LatticeSpec& o) const {
        return n_sites == o.n_sites && spacing == o.spacing && boundary == o.boundary;
    }
};

/// Standard symplectic matrix [[0, I], [-I, 0]] on z = (phi, p).
Eigen::MatrixXd symplectic_omega(int n_sites);

}  // namespace pft
