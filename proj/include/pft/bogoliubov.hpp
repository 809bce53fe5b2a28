#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pft/embedding.hpp"
#include "pft/evolve.hpp"
#include "pft/field_model.hpp"

namespace pft {

/// Relation between the operators of two frames on one slice, with b the
/// source frame (modes v_j) and c the target frame (modes w_k). With the
/// product antilinear in its first slot, c_k = (w_k, phi) reads
/// c_k = sum_j (conj(alpha_jk) b_j + beta_jk b_j^dagger).
struct BogoliubovMap {
    Eigen::MatrixXcd alpha;
    Eigen::MatrixXcd beta;
    std::string embedding_id;
    std::vector<int> retained;  ///< source rows used for the canonical checks
    double unitarity_violation = 0.0;  ///< max |alpha alpha^dag - beta beta^dag - I| on retained rows
    double symmetry_violation = 0.0;   ///< max |alpha beta^T - beta alpha^T| on retained rows
    bool canonical_warning = false;

    int rows() const { return static_cast<int>(alpha.rows()); }
    int cols() const { return static_cast<int>(alpha.cols()); }
};

/// alpha_jk = (v_j, w_k), beta_jk = -(v_j, w_k^*). Both frames must live
/// on `emb`. `tolerance` sets the canonical-violation warning at 10x.
BogoliubovMap bogoliubov_between(const ModeFrame& frame_to, const ModeFrame& frame_from, const Embedding& emb,
                                 double tolerance = 1e-8);

/// sum_j |beta_jk|^2.
double expected_number(const BogoliubovMap& map, int k);

/// Modes carried by a Gaussian unitary onto another slice: z -> S z.
ModeFrame transport_frame(const ModeFrame& f, const Propagator& p, const Embedding& emb_to);

/// Canonical-relation residuals of (alpha, beta) restricted to `rows`.
void canonical_violations(const Eigen::MatrixXcd& alpha, const Eigen::MatrixXcd& beta, const std::vector<int>& rows,
                          double& unitarity, double& symmetry);

}  // namespace pft
