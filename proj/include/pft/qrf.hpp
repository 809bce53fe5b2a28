#pragma once

#include <string>
#include <vector>

#include "pft/bogoliubov.hpp"
#include "pft/embedding.hpp"
#include "pft/evolve.hpp"
#include "pft/field_model.hpp"

namespace pft {

/// One configuration of the reference embedding field. `mass` is the mass
/// whose normal-mode frame the member carries (the physical field mass unless
/// the member belongs to a quench family).
struct EnsembleMember {
    Embedding embedding;
    cplx amplitude;
    double mass = 0.0;
    double parameter = 0.0;  ///< family parameter, for output only
};

class EmbeddingEnsemble {
public:
    /// Validates normalisation (1e-12) and pairwise distinctness.
    explicit EmbeddingEnsemble(std::vector<EnsembleMember> members);

    const std::vector<EnsembleMember>& members() const { return members_; }
    int size() const { return static_cast<int>(members_.size()); }
    double weight(int q) const { return std::norm(members_[q].amplitude); }
    double max_weight() const;

private:
    std::vector<EnsembleMember> members_;
};

enum class EnsembleFamily { TimeTranslation, Boost, MassQuench, Bump };
EnsembleFamily ensemble_family_from_string(const std::string& s);
std::string to_string(EnsembleFamily f);

/// Members generated from one-parameter families around the flat slice of
/// `spec`: time shift, rapidity, frame mass, or normal bump amplitude.
/// Amplitudes are sqrt(weight / sum of weights).
EmbeddingEnsemble make_ensemble(const LatticeSpec& spec, EnsembleFamily family, const std::vector<double>& parameters,
                                const std::vector<double>& weights);

struct Branch {
    Embedding embedding;
    GaussianState state;
    cplx amplitude;
};

struct RelationalBranchState {
    std::vector<Branch> branches;

    /// Largest pairwise covariance distance between branches.
    double distinguishability() const;
};

/// Branch q carries psi_q and U[X_q - X_A] applied to the conditional state.
RelationalBranchState change_frame(const GaussianState& conditional, const Embedding& x_a,
                                   const EmbeddingEnsemble& ensemble, const FrameChangeOptions& opt = {});

/// Normal-mode frame of member q expressed on X_B. Affine members carry
/// their own flat frame, transported from X_q to X_B.
ModeFrame member_frame(const EnsembleMember& member, const LatticeSpec& field, const Embedding& x_b,
                       const FrameChangeOptions& opt = {});

/// Bogoliubov map from B's modes to member q's modes, on X_B.
BogoliubovMap member_bogoliubov(const EnsembleMember& member, const ModeFrame& frame_b, const Embedding& x_b,
                                const FrameChangeOptions& opt = {});

struct SmearedNumber {
    double total = 0.0;
    std::vector<double> per_branch;
};

/// sum_q |psi_q|^2 sum_j |beta_jk(q)|^2.
SmearedNumber smeared_particle_number(const EmbeddingEnsemble& ens, const ModeFrame& frame_b, const Embedding& x_b,
                                      int k, const FrameChangeOptions& opt = {});
double smeared_particle_number(const std::vector<BogoliubovMap>& maps, const EmbeddingEnsemble& ens, int k);

/// c_k^dagger c_k as a quadratic form in B's phase-space variables.
QuadraticForm number_operator_form(const BogoliubovMap& map, const ModeFrame& frame_b, int k);

/// <psi| (x) <0_B| sum_q |X_q><X_q| (x) N_{k,q} |psi>|0_B>, assembled as a
/// block operator over members.
double transformed_number_expectation(const EmbeddingEnsemble& ens, const ModeFrame& frame_b, const Embedding& x_b,
                                      int k, const FrameChangeOptions& opt = {});
double transformed_number_expectation(const std::vector<BogoliubovMap>& maps, const EmbeddingEnsemble& ens,
                                      const ModeFrame& frame_b, int k);

}  // namespace pft
