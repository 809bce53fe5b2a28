#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "pft/lattice.hpp"

namespace pft {

/// Per-site components (v^0, v^1) of a vector field along an embedding.
struct DeformationVector {
    Eigen::VectorXd v0;
    Eigen::VectorXd v1;

    DeformationVector() = default;
    DeformationVector(Eigen::VectorXd a, Eigen::VectorXd b);
    static DeformationVector constant(int n, double a, double b);
    static DeformationVector zero(int n) { return constant(n, 0.0, 0.0); }

    int size() const { return static_cast<int>(v0.size()); }
    bool finite() const;
    bool operator==(const DeformationVector& o) const;
};

/// A spacelike curve x -> (T(x), X(x)) sampled at the lattice labels.
/// Periodic embeddings close up to a constant offset: T(x + L) = T(x) + wrap_t
/// and X(x + L) = X(x) + wrap_x.
class Embedding {
public:
    /// Default link margin is 1e-8 * spacing.
    Embedding(const LatticeSpec& spec, Eigen::VectorXd t, Eigen::VectorXd x,
              double margin = -1.0);
    Embedding(const LatticeSpec& spec, Eigen::VectorXd t, Eigen::VectorXd x,
              double wrap_t, double wrap_x, double margin = -1.0);

    /// T = t, X = x labels.
    static Embedding flat(const LatticeSpec& spec, double t = 0.0);

    const LatticeSpec& spec() const { return spec_; }
    const Eigen::VectorXd& t() const { return t_; }
    const Eigen::VectorXd& x() const { return x_; }
    double wrap_t() const { return wrap_t_; }
    double wrap_x() const { return wrap_x_; }
    double margin() const { return margin_; }
    int size() const { return static_cast<int>(t_.size()); }

    /// Content hash of the sampled coordinates; stable across runs.
    std::string id() const;

    /// Same lattice, wrap and coordinates (bitwise).
    bool same_geometry(const Embedding& o) const;

    /// True when T and X are affine in the label to rounding.
    bool is_affine(double tol = 1e-10) const;

    struct Orbit {
        std::shared_ptr<const Embedding> base;
        DeformationVector v;
        double s = 0.0;
    };
    /// Set when the embedding was produced by translate(); lets repeated
    /// translations along the same field compose in the parameter.
    const std::optional<Orbit>& orbit() const { return orbit_; }

private:
    friend Embedding translate(const Embedding&, const DeformationVector&, double);
    void check_spacelike() const;

    LatticeSpec spec_;
    Eigen::VectorXd t_, x_;
    double wrap_t_ = 0.0, wrap_x_ = 0.0;
    double margin_ = 0.0;
    std::optional<Orbit> orbit_;
};

/// Label derivatives d/dx of T and X (centred; one-sided second order at
/// fixed-zero ends; wrap offsets applied across the periodic seam).
struct Tangent {
    Eigen::VectorXd dt, dx;
};
Tangent tangent(const Embedding& e);
Tangent second_derivative(const Embedding& e);

/// gamma = X'^2 - T'^2. Throws NotSpacelike if any value is <= 0.
Eigen::VectorXd induced_metric(const Embedding& e);

/// Future-pointing unit normal n^mu = (X', T') / sqrt(gamma).
DeformationVector unit_normal(const Embedding& e);

/// Conormal n_nu = eps_{nu rho} X'^rho / sqrt(gamma) = (X', -T') / sqrt(gamma).
/// Equals (1, 0) on flat slices and (cosh w, sinh w) on boosted ones.
DeformationVector unit_conormal(const Embedding& e);

/// Trace of the extrinsic curvature, K = -n_mu X''^mu / gamma with
/// n_mu = eta_{mu nu} n^nu. Positive for slices bending to the future.
Eigen::VectorXd extrinsic_curvature_trace(const Embedding& e);

/// Lapse and shift of v relative to e: v = N n + N^x X'.
struct LapseShift {
    Eigen::VectorXd lapse, shift;
};
LapseShift lapse_shift(const Embedding& e, const DeformationVector& v);

/// X^mu + s v^mu. Repeated translation along the same field composes
/// exactly in s. Throws NotSpacelike if the result is not spacelike.
Embedding translate(const Embedding& e, const DeformationVector& v, double s);

/// Lorentz boost with rapidity w: (T, X) -> (T cosh w - X sinh w, X cosh w - T sinh w).
/// The image of a periodic embedding does not close on the cylinder (its X wrap
/// becomes L cosh w), so frame changes to it carry a seam.
Embedding boost(const Embedding& e, double w);

/// X'^mu = (X^mu - b^mu X.X) / beta with b = (0, 1/alpha) and
/// beta = 2 X.b - X.X / alpha^2. Requires a fixed-zero lattice. An image
/// whose X decreases along every link is returned with the sample order
/// reversed, so that X increases with the label.
Embedding special_conformal(const Embedding& e, double alpha, double beta_eps = 1e-9);

/// e + s * (f - e) coordinatewise, wrap offsets included.
Embedding interpolate(const Embedding& e, const Embedding& f, double s, double margin = -1.0);

/// f - e as a deformation vector.
DeformationVector difference(const Embedding& e, const Embedding& f);

}  // namespace pft
