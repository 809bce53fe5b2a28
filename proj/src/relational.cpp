#include "pft/relational.hpp"

#include "pft/errors.hpp"
#include "pft/hamiltonian.hpp"

namespace pft {

PhysicalFamily::PhysicalFamily(Embedding anchor, GaussianState state, FrameChangeOptions opt)
    : anchor_(std::move(anchor)), state_(std::move(state)), opt_(opt) {
    if (state_.embedding_id != anchor_.id()) throw LeafMismatch("anchor state does not live on the anchor embedding");
}

GaussianState PhysicalFamily::at(const Embedding& emb) const {
    if (override_) return override_(emb);
    try {
        return apply_frame_change(state_, anchor_, emb, opt_);
    } catch (const InvalidEmbedding& e) {
        throw UnreachableEmbedding(e.what());
    } catch (const NotSpacelike& e) {
        throw UnreachableEmbedding(e.what());
    } catch (const StepTooLarge& e) {
        throw UnreachableEmbedding(e.what());
    }
}

FamilyRule PhysicalFamily::rule() const {
    PhysicalFamily self = *this;
    return [self](const Embedding& e) { return self.at(e); };
}

PhysicalFamily PhysicalFamily::with_rule(FamilyRule rule) const {
    PhysicalFamily f = *this;
    f.override_ = std::move(rule);
    return f;
}

GaussianState reduce(const PhysicalFamily& family, const Embedding& emb) { return family.at(emb); }

PhysicalFamily reduce_inverse(const GaussianState& state, const Embedding& emb, const FrameChangeOptions& opt) {
    return PhysicalFamily(emb, state, opt);
}

double consistency_defect(const PhysicalFamily& family, const Embedding& a, const Embedding& b) {
    GaussianState direct = family.at(b);
    GaussianState via = apply_frame_change(family.at(a), a, b, family.options());
    return std::max(max_abs_distance(direct.cov, via.cov),
                    (direct.mean - via.mean).cwiseAbs().maxCoeff());
}

double dirac_expectation(const PhysicalFamily& family, const QuadraticForm& a0, const Embedding& emb) {
    if (a0.dim() != 2 * emb.size()) throw DimensionMismatch("observable lattice differs from embedding");
    return reduce(family, emb).expectation(a0);
}

QuadraticForm heisenberg_observable(const LatticeSpec& spec, const QuadraticForm& a0, const Embedding& emb_q,
                                    const Embedding& emb_0, const FrameChangeOptions& opt) {
    if (a0.dim() != 2 * spec.n_sites) throw DimensionMismatch("observable lattice differs from field lattice");
    Propagator p = frame_change_unitary(spec, emb_0, emb_q, opt);
    Eigen::MatrixXd m = p.S.transpose() * a0.matrix * p.S;
    return QuadraticForm(0.5 * (m + m.transpose()), a0.offset);
}

double heisenberg_equation_residual(const LatticeSpec& spec, const QuadraticForm& a0, const Embedding& emb, int site,
                                    double eps, const FrameChangeOptions& opt) {
    if (eps == 0.0) throw DegenerateInput("eps must be nonzero");
    QuadraticForm ap = heisenberg_observable(spec, a0, normal_bump(emb, site, eps), emb, opt);
    QuadraticForm am = heisenberg_observable(spec, a0, normal_bump(emb, site, -eps), emb, opt);
    SmearedHamiltonian h = smear_flux(spec, emb, site_normal_vector(emb, site), opt.hamiltonian);
    QuadraticForm expected = commutator_form(a0, h.form());
    Eigen::MatrixXd d = (ap.matrix - am.matrix) / (2 * eps) - expected.matrix;
    return d.norm();
}

}  // namespace pft
