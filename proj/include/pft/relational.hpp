#pragma once

#include <functional>

#include "pft/embedding.hpp"
#include "pft/evolve.hpp"
#include "pft/field_model.hpp"

namespace pft {

/// Physical state held as its conditional data: an anchor state and the rule
/// psi[X] = U[X - X_anchor] psi[X_anchor].
class PhysicalFamily {
public:
    PhysicalFamily(Embedding anchor, GaussianState state, FrameChangeOptions opt = {});

    const Embedding& anchor() const { return anchor_; }
    const GaussianState& anchor_state() const { return state_; }
    const FrameChangeOptions& options() const { return opt_; }

    GaussianState at(const Embedding& emb) const;
    FamilyRule rule() const;

    /// Family whose generator rule is replaced; used to exercise the
    /// consistency check.
    PhysicalFamily with_rule(FamilyRule rule) const;

private:
    Embedding anchor_;
    GaussianState state_;
    FrameChangeOptions opt_;
    FamilyRule override_;
};

GaussianState reduce(const PhysicalFamily& family, const Embedding& emb);
PhysicalFamily reduce_inverse(const GaussianState& state, const Embedding& emb, const FrameChangeOptions& opt = {});

/// Max entry distance between psi[b] from the rule and U[b - a] psi[a].
double consistency_defect(const PhysicalFamily& family, const Embedding& a, const Embedding& b);

double dirac_expectation(const PhysicalFamily& family, const QuadraticForm& a0, const Embedding& emb);

/// Observable carried to X_q and evaluated on states frozen at X_0:
/// P^T A0 P with P the symplectic map of U[X_q - X_0].
QuadraticForm heisenberg_observable(const LatticeSpec& spec, const QuadraticForm& a0, const Embedding& emb_q,
                                    const Embedding& emb_0, const FrameChangeOptions& opt = {});

/// Centred functional derivative of heisenberg_observable (anchored at emb)
/// under a one-site normal bump, minus (1/i)[A0, h_site]. Frobenius norm.
double heisenberg_equation_residual(const LatticeSpec& spec, const QuadraticForm& a0, const Embedding& emb, int site,
                                    double eps, const FrameChangeOptions& opt = {});

}  // namespace pft
