#include "pft/qrf.hpp"

#include <algorithm>
#include <cmath>

#include "pft/errors.hpp"

namespace pft {

EmbeddingEnsemble::EmbeddingEnsemble(std::vector<EnsembleMember> members) : members_(std::move(members)) {
    if (members_.empty()) throw InvalidEnsemble("ensemble has no members");
    double total = 0.0;
    for (const auto& m : members_) total += std::norm(m.amplitude);
    if (std::abs(total - 1.0) > 1e-12) throw InvalidEnsemble("amplitudes are not normalised: sum |psi|^2 = " + std::to_string(total));
    for (std::size_t a = 0; a < members_.size(); ++a)
        for (std::size_t b = a + 1; b < members_.size(); ++b)
            if (members_[a].embedding.same_geometry(members_[b].embedding) && members_[a].mass == members_[b].mass)
                throw InvalidEnsemble("members " + std::to_string(a) + " and " + std::to_string(b) + " coincide");
}

double EmbeddingEnsemble::max_weight() const {
    double w = 0.0;
    for (int q = 0; q < size(); ++q) w = std::max(w, weight(q));
    return w;
}

EnsembleFamily ensemble_family_from_string(const std::string& s) {
    if (s == "time_translation") return EnsembleFamily::TimeTranslation;
    if (s == "boost") return EnsembleFamily::Boost;
    if (s == "mass_quench") return EnsembleFamily::MassQuench;
    if (s == "bump") return EnsembleFamily::Bump;
    throw ConfigError("unknown ensemble family '" + s + "'");
}

std::string to_string(EnsembleFamily f) {
    switch (f) {
        case EnsembleFamily::TimeTranslation: return "time_translation";
        case EnsembleFamily::Boost: return "boost";
        case EnsembleFamily::MassQuench: return "mass_quench";
        case EnsembleFamily::Bump: return "bump";
    }
    return "";
}

EmbeddingEnsemble make_ensemble(const LatticeSpec& spec, EnsembleFamily family, const std::vector<double>& params,
                                const std::vector<double>& weights) {
    if (params.size() != weights.size()) throw InvalidEnsemble("parameters and weights differ in length");
    double wsum = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0)) throw InvalidEnsemble("weights must be nonnegative");
        wsum += w;
    }
    if (!(wsum > 0.0)) throw InvalidEnsemble("weights sum to zero");
    Embedding flat = Embedding::flat(spec);
    std::vector<EnsembleMember> out;
    for (std::size_t q = 0; q < params.size(); ++q) {
        const double p = params[q];
        EnsembleMember m{flat, cplx(std::sqrt(weights[q] / wsum), 0.0), spec.mass, p};
        switch (family) {
            case EnsembleFamily::TimeTranslation:
                m.embedding = Embedding::flat(spec, p);
                break;
            case EnsembleFamily::Boost:
                m.embedding = boost(flat, p);
                break;
            case EnsembleFamily::MassQuench:
                if (!(p >= 0.0)) throw InvalidEnsemble("quench mass must be nonnegative");
                m.mass = p;
                break;
            case EnsembleFamily::Bump: {
                Eigen::VectorXd lab = spec.labels();
                const double w = 0.125 * spec.length();
                Eigen::VectorXd t = p * (-(lab.array() / w).square()).exp();
                m.embedding = Embedding(spec, t, flat.x(), flat.wrap_t(), flat.wrap_x());
                break;
            }
        }
        out.push_back(std::move(m));
    }
    return EmbeddingEnsemble(std::move(out));
}

double RelationalBranchState::distinguishability() const {
    double d = 0.0;
    for (std::size_t a = 0; a < branches.size(); ++a)
        for (std::size_t b = a + 1; b < branches.size(); ++b)
            d = std::max(d, (branches[a].state.cov - branches[b].state.cov).norm());
    return d;
}

RelationalBranchState change_frame(const GaussianState& conditional, const Embedding& x_a, const EmbeddingEnsemble& ens,
                                   const FrameChangeOptions& opt) {
    RelationalBranchState r;
    for (const auto& m : ens.members())
        r.branches.push_back({m.embedding, apply_frame_change(conditional, x_a, m.embedding, opt), m.amplitude});
    return r;
}

ModeFrame member_frame(const EnsembleMember& member, const LatticeSpec& field, const Embedding& x_b,
                       const FrameChangeOptions& opt) {
    if (!member.embedding.is_affine()) throw CurvedEmbedding("member frames are defined on affine slices only");
    LatticeSpec own = field;
    own.mass = member.mass;
    ModeFrame f = flat_mode_frame(own, member.embedding);
    if (member.embedding.same_geometry(x_b)) return f;
    Propagator p = frame_change_unitary(field, member.embedding, x_b, opt);
    return transport_frame(f, p, x_b);
}

BogoliubovMap member_bogoliubov(const EnsembleMember& member, const ModeFrame& frame_b, const Embedding& x_b,
                                const FrameChangeOptions& opt) {
    return bogoliubov_between(member_frame(member, frame_b.spec, x_b, opt), frame_b, x_b);
}

namespace {

std::vector<BogoliubovMap> all_maps(const EmbeddingEnsemble& ens, const ModeFrame& frame_b, const Embedding& x_b,
                                    const FrameChangeOptions& opt) {
    std::vector<BogoliubovMap> maps;
    for (const auto& m : ens.members()) maps.push_back(member_bogoliubov(m, frame_b, x_b, opt));
    return maps;
}

}  // namespace

double smeared_particle_number(const std::vector<BogoliubovMap>& maps, const EmbeddingEnsemble& ens, int k) {
    if (static_cast<int>(maps.size()) != ens.size()) throw DimensionMismatch("one map per member expected");
    double total = 0.0;
    for (int q = 0; q < ens.size(); ++q) total += ens.weight(q) * expected_number(maps[q], k);
    return total;
}

SmearedNumber smeared_particle_number(const EmbeddingEnsemble& ens, const ModeFrame& frame_b, const Embedding& x_b,
                                      int k, const FrameChangeOptions& opt) {
    auto maps = all_maps(ens, frame_b, x_b, opt);
    SmearedNumber out;
    for (const auto& m : maps) out.per_branch.push_back(expected_number(m, k));
    out.total = smeared_particle_number(maps, ens, k);
    return out;
}

QuadraticForm number_operator_form(const BogoliubovMap& map, const ModeFrame& frame_b, int k) {
    if (k < 0 || k >= map.cols()) throw ModeOutOfRange("mode " + std::to_string(k));
    const int n = frame_b.spec.n_sites;
    const cplx I(0.0, 1.0);
    // b_j = (v_j, z) = r_j^T z with r_j = -i Omega conj(z_j)
    Eigen::MatrixXcd zv = frame_b.z();
    Eigen::MatrixXcd r(2 * n, zv.cols());
    r.topRows(n) = -I * zv.bottomRows(n).conjugate();
    r.bottomRows(n) = I * zv.topRows(n).conjugate();
    // c_k = sum_j conj(alpha_jk) b_j + beta_jk b_j^dagger
    Eigen::VectorXcd c = r * map.alpha.col(k).conjugate() + r.conjugate() * map.beta.col(k);
    Eigen::MatrixXcd h = c.conjugate() * c.transpose();
    Eigen::VectorXcd oc(2 * n);
    oc.head(n) = c.tail(n);
    oc.tail(n) = -c.head(n);
    const double offset = (0.5 * I * c.dot(oc)).real();  // (i/2) c^dag Omega c
    return QuadraticForm(2.0 * h.real(), offset);
}

double transformed_number_expectation(const std::vector<BogoliubovMap>& maps, const EmbeddingEnsemble& ens,
                                      const ModeFrame& frame_b, int k) {
    if (static_cast<int>(maps.size()) != ens.size()) throw DimensionMismatch("one map per member expected");
    const int q = ens.size();
    GaussianState vac;
    vac.spec = frame_b.spec;
    vac.cov = frame_vacuum_covariance(frame_b);
    vac.mean = Eigen::VectorXd::Zero(vac.cov.rows());
    // embedding eigenstates of distinct members are orthogonal: the block
    // operator is diagonal in the member index
    Eigen::MatrixXcd block = Eigen::MatrixXcd::Zero(q, q);
    Eigen::VectorXcd psi(q);
    for (int a = 0; a < q; ++a) {
        block(a, a) = vac.expectation(number_operator_form(maps[a], frame_b, k));
        psi[a] = ens.members()[a].amplitude;
    }
    return psi.dot(block * psi).real();
}

double transformed_number_expectation(const EmbeddingEnsemble& ens, const ModeFrame& frame_b, const Embedding& x_b,
                                      int k, const FrameChangeOptions& opt) {
    return transformed_number_expectation(all_maps(ens, frame_b, x_b, opt), ens, frame_b, k);
}

}  // namespace pft
