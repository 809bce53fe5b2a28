#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "pft/embedding.hpp"
#include "pft/field_model.hpp"
#include "pft/foliation.hpp"
#include "pft/hamiltonian.hpp"

namespace pft {

/// Pure Gaussian field state: first moments, symmetrised covariance
/// Sigma = 1/2 <{dz, dz^T}> and accumulated c-number phase.
struct GaussianState {
    LatticeSpec spec;
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
    double phase = 0.0;
    std::string embedding_id;

    int dim() const { return static_cast<int>(mean.size()); }
    /// max |(2 Sigma Omega^{-1})^2 + I|.
    double purity_defect() const;
    /// <1/2 z^T A z + c>.
    double expectation(const QuadraticForm& a) const;
    double expectation(const SpMat& m, double offset = 0.0) const;

    /// Vacuum of the normal generator on an affine slice. On a massless
    /// periodic lattice the zero mode is put in the ground state of an
    /// oscillator of frequency `zero_mode_omega`.
    static GaussianState vacuum(const LatticeSpec& spec, const Embedding& emb, double zero_mode_omega = 1.0);
    /// Ground state of 1/2 p^T P p + 1/2 phi^T V phi (block-diagonal M).
    static GaussianState ground_state(const LatticeSpec& spec, const SpMat& m, const std::string& embedding_id);
    /// Same covariance, displaced mean (phi, p) with p = dx * pi.
    GaussianState displaced(const Eigen::VectorXd& phi, const Eigen::VectorXd& p) const;
};

/// Symplectic matrix and c-number phase of a Gaussian unitary; acts on means
/// by m -> S m.
struct Propagator {
    Eigen::MatrixXd S;
    double phase_increment = 0.0;

    static Propagator identity(int dim);
    GaussianState apply(const GaussianState& s, const std::string& new_embedding_id) const;
    /// this after first.
    Propagator after(const Propagator& first) const;
    Propagator inverse() const;
};

/// Induced infinity norm of S Omega S^T - Omega.
double symplectic_drift(const Eigen::MatrixXd& S);
/// One Newton step towards the symplectic group: S <- (S + Omega^{-1} S^{-T} Omega) / 2.
Eigen::MatrixXd symplectic_projection(const Eigen::MatrixXd& S);

/// Largest |entry| of a - b.
double max_abs_distance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

struct EvolveOptions {
    /// Steps with ||Omega M dt||_inf above this throw StepTooLarge.
    double max_step_norm = 1.0;
    HamiltonianOptions hamiltonian;
    /// Measure the drift of every individual step factor (dense, O(N^3)).
    bool per_step_drift = false;
    double projection_threshold = 1e-12;
    /// Accumulated-propagator drift is checked every this many steps.
    int check_interval = 16;
};

struct EvolveDiagnostics {
    double max_step_drift = 0.0;
    double final_drift = 0.0;
    double max_checked_drift = 0.0;
    int projections = 0;
    double purity_defect = 0.0;
    double max_step_norm = 0.0;
    std::vector<double> energy_trace;  ///< <generator> at the start of each step
    std::vector<int> non_foliating_steps;
};

/// Implicit-midpoint (Cayley) factor (I - A/2)^{-1} (I + A/2), A = Omega M dt.
class CayleyFactor {
public:
    CayleyFactor(const SpMat& m, double dt);
    /// y <- C y, columnwise.
    void apply(Eigen::MatrixXd& y) const;
    Eigen::MatrixXd dense() const;
    double norm() const { return norm_; }

private:
    Eigen::SparseLU<SpMat> lu_;
    SpMat plus_;
    double norm_ = 0.0;
};

/// Omega M as a sparse matrix.
SpMat omega_times(const SpMat& m);

/// Single step with a fixed generator.
GaussianState step(const GaussianState& s, const SmearedHamiltonian& h, double dt, const EvolveOptions& opt = {},
                   double* drift = nullptr);

/// Path-ordered composition over the leaves. Each step uses the flux on the
/// midpoint leaf smeared with the discrete deformation vector.
GaussianState evolve_foliation(const GaussianState& s, const Foliation& fol, const EvolveOptions& opt = {},
                               EvolveDiagnostics* diag = nullptr);
Propagator propagate_foliation(const Foliation& fol, const EvolveOptions& opt = {}, EvolveDiagnostics* diag = nullptr);

struct FrameChangeOptions {
    /// Sub-step count; 0 picks ceil(||Omega G||_inf / target_norm).
    int substeps = 0;
    int min_substeps = 8;
    double target_norm = 0.25;
    HamiltonianOptions hamiltonian;
};

/// U[e_to - e_from] as a path-ordered product along e_from + s (e_to - e_from),
/// s in [0, 1], re-evaluating the flux on each sub-step midpoint.
Propagator frame_change_unitary(const LatticeSpec& spec, const Embedding& e_from, const Embedding& e_to,
                                const FrameChangeOptions& opt = {});
/// Same map applied directly to a state (no dense propagator).
GaussianState apply_frame_change(const GaussianState& s, const Embedding& e_from, const Embedding& e_to,
                                 const FrameChangeOptions& opt = {});
int frame_change_substeps(const LatticeSpec& spec, const Embedding& e_from, const Embedding& e_to,
                          const FrameChangeOptions& opt = {});

using FamilyRule = std::function<GaussianState(const Embedding&)>;

struct TsResidual {
    double residual = 0.0;
    bool boundary_site = false;  ///< deformation touches a fixed-zero end
};

/// Centred Tomonaga-Schwinger residual at one site: the difference quotient
/// (psi[X + eps sqrt(gamma) n delta] - psi[X - ...]) / (2 eps) against the
/// action of the local normal generator on mean and covariance.
TsResidual ts_residual(const LatticeSpec& spec, const FamilyRule& family, const Embedding& emb, int site, double eps);

/// Embedding displaced by eps * sqrt(gamma) * n at one site.
Embedding normal_bump(const Embedding& emb, int site, double eps);
DeformationVector site_normal_vector(const Embedding& emb, int site);

/// Classical Klein-Gordon leapfrog on the same boundary type; returns phi at
/// time t_final given phi and pi densities at t = 0.
Eigen::VectorXd classical_leapfrog(const LatticeSpec& spec, const Eigen::VectorXd& phi0, const Eigen::VectorXd& pi0,
                                   double t_final, int n_steps);

}  // namespace pft
