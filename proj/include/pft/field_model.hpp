#pragma once

#include <array>
#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "pft/embedding.hpp"
#include "pft/lattice.hpp"

namespace pft {

using cplx = std::complex<double>;
using SpMat = Eigen::SparseMatrix<double>;

/// Observable 1/2 z^T M z + offset on canonical phase space
/// z = (phi_1..phi_N, p_1..p_N), p_i = spacing * pi(x_i). Weyl ordered.
struct QuadraticForm {
    Eigen::MatrixXd matrix;
    double offset = 0.0;

    QuadraticForm() = default;
    explicit QuadraticForm(Eigen::MatrixXd m, double c = 0.0);
    static QuadraticForm zero(int dim) { return QuadraticForm(Eigen::MatrixXd::Zero(dim, dim)); }

    int dim() const { return static_cast<int>(matrix.rows()); }
    bool is_symmetric(double rel_tol = 1e-14) const;
    bool is_zero() const { return offset == 0.0 && (matrix.array() == 0.0).all(); }

    QuadraticForm operator+(const QuadraticForm& o) const;
    QuadraticForm operator-(const QuadraticForm& o) const;
    QuadraticForm operator*(double s) const;
};

/// Quadratic form restricted to a few phase-space indices; the stencil of a
/// single site.
struct LocalForm {
    std::vector<int> index;
    Eigen::MatrixXd block;

    QuadraticForm global(int dim) const;
    void add_to(std::vector<Eigen::Triplet<double>>& out, double scale) const;
    LocalForm scaled(double s) const;
};

/// Linear combination of local forms sharing one stencil.
LocalForm combine(const std::vector<std::pair<double, const LocalForm*>>& terms);

/// Per-site stress tensor components spacing * T^nu_mu, indexed [nu][mu].
/// Contracting with the densitized conormal (X', -T') gives the lapse/shift
/// weighted canonical energy and momentum densities.
using StressTensorForms = std::array<std::array<LocalForm, 2>, 2>;
std::vector<StressTensorForms> stress_energy_forms(const LatticeSpec& spec, const Embedding& emb);

/// Local building blocks of the stress tensor at one site, each weighted by
/// the spacing. At a fixed-zero end the ghost link carries the weight the
/// missing neighbour would have contributed.
struct SiteDensities {
    LocalForm nn;  ///< dx * (normal derivative)^2
    LocalForm tt;  ///< dx * (label derivative)^2, symmetric forward/backward stencil
    LocalForm nt;  ///< dx * normal derivative * label derivative
    LocalForm mm;  ///< dx * phi^2
};
SiteDensities site_densities(const LatticeSpec& spec, double gamma, int site);

/// Smeared canonical flux sum_i dx [N_i H_perp(i) + N^x_i H_x(i)] as a sparse
/// matrix M in the 1/2 z^T M z convention.
SpMat flux_matrix(const LatticeSpec& spec, const Embedding& emb, const Eigen::VectorXd& lapse,
                  const Eigen::VectorXd& shift);

/// (1/i)[A, B] = 1/2 z^T (A Omega B - B Omega A) z. The c-number part of a
/// commutator of Weyl-ordered quadratics vanishes.
QuadraticForm commutator_form(const QuadraticForm& a, const QuadraticForm& b);

/// Mode function sampled on a slice: u and its normal derivative.
struct ModePair {
    Eigen::VectorXcd u;
    Eigen::VectorXcd udot;
    ModePair conj() const { return {u.conjugate(), udot.conjugate()}; }
};

/// (a, b) = i sum_x dx sqrt(gamma) [a* udot_b - udot_a* b].
/// Positive-frequency modes (udot = -i omega u) have positive norm.
cplx kg_inner_product(const ModePair& a, const ModePair& b, const Embedding& emb);

struct ModeFrame {
    LatticeSpec spec;
    std::string embedding_id;
    Eigen::VectorXd sqrt_gamma;
    Eigen::MatrixXcd u;     ///< N x K
    Eigen::MatrixXcd udot;  ///< N x K
    Eigen::VectorXd k;      ///< label-space wave number of each mode
    Eigen::VectorXd omega;  ///< frequency, NaN for frames transported off their slice
    bool zero_mode_excluded = false;

    int size() const { return static_cast<int>(u.cols()); }
    ModePair mode(int j) const { return {u.col(j), udot.col(j)}; }
    /// Modes with |k| dx <= pi/2.
    std::vector<int> retained() const;

    /// Phase-space image: rows (phi, p) with p = dx sqrt(gamma) udot.
    Eigen::MatrixXcd z() const;
    static ModeFrame from_z(const Eigen::MatrixXcd& z, const Embedding& emb, const ModeFrame& like);
};

/// Positive-frequency plane waves (periodic) or sine modes (fixed-zero) with
/// respect to the normal of an affine slice. For m = 0 on a periodic lattice
/// the zero mode is dropped and flagged.
ModeFrame flat_mode_frame(const LatticeSpec& spec, const Embedding& emb);

/// Frequency on an affine slice with uniform gamma.
double lattice_omega(const LatticeSpec& spec, double k, double gamma = 1.0);

/// Vacuum covariance of the frame: Re sum_k z_k z_k^dagger.
Eigen::MatrixXd frame_vacuum_covariance(const ModeFrame& f);

}  // namespace pft
