#pragma once

#include <string>

#include <Eigen/Dense>

#include "pft/embedding.hpp"
#include "pft/field_model.hpp"

namespace pft {

struct HamiltonianOptions {
    /// Overall central-charge prefactor of the anomaly potential.
    double anomaly_prefactor = 1.0;
};

/// Flux h[v, X] as a sparse quadratic form plus its normal and parallel parts.
struct SmearedHamiltonian {
    SpMat matrix;  ///< total, 1/2 z^T M z convention
    SpMat perp;    ///< lapse part
    SpMat par;     ///< shift part
    double anomaly_rate = 0.0;
    std::string embedding_id;

    /// Dense form with the anomaly rate as offset.
    QuadraticForm form() const;
    QuadraticForm perp_form() const;
    QuadraticForm par_form() const;
};

/// sum_i dx v^mu h_mu(x_i). The anomaly rate is included for m = 0.
SmearedHamiltonian smear_flux(const LatticeSpec& spec, const Embedding& emb, const DeformationVector& v,
                              const HamiltonianOptions& opt = {});

/// Generator of the inertial family starting from the slice boosted by w,
/// with v = (cosh w, -sinh w).
SmearedHamiltonian flat_hamiltonian(const LatticeSpec& spec, double rapidity);

/// Anomaly potential A_mu = sqrt(gamma) (X_mu dK/dx - K^2 n_mu) with indices
/// lowered by eta = diag(-1, 1). Throws MassiveField for m > 0.
DeformationVector anomaly_potential(const LatticeSpec& spec, const Embedding& emb);

/// sum_i dx sqrt(gamma) v^mu A_mu.
double integrated_anomaly(const LatticeSpec& spec, const Embedding& emb, const DeformationVector& v);

/// Same sum restricted to sites where `mask` is nonzero.
double partial_anomaly(const LatticeSpec& spec, const Embedding& emb, const DeformationVector& v,
                       const Eigen::VectorXd& mask);

}  // namespace pft
