#include "pft/hamiltonian.hpp"

#include <cmath>

#include "pft/errors.hpp"

namespace pft {

QuadraticForm SmearedHamiltonian::form() const { return QuadraticForm(Eigen::MatrixXd(matrix), anomaly_rate); }
QuadraticForm SmearedHamiltonian::perp_form() const { return QuadraticForm(Eigen::MatrixXd(perp)); }
QuadraticForm SmearedHamiltonian::par_form() const { return QuadraticForm(Eigen::MatrixXd(par)); }

SmearedHamiltonian smear_flux(const LatticeSpec& spec, const Embedding& emb, const DeformationVector& v,
                              const HamiltonianOptions& opt) {
    if (!emb.spec().same_lattice(spec)) throw InvalidEmbedding("embedding lattice differs from field lattice");
    if (!v.finite()) throw InvalidEmbedding("non-finite deformation vector");
    LapseShift ls;
    try {
        ls = lapse_shift(emb, v);
    } catch (const NotSpacelike& e) {
        throw InvalidEmbedding(e.what());
    }
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(spec.n_sites);
    SmearedHamiltonian h;
    h.matrix = flux_matrix(spec, emb, ls.lapse, ls.shift);
    h.perp = flux_matrix(spec, emb, ls.lapse, zero);
    h.par = flux_matrix(spec, emb, zero, ls.shift);
    h.embedding_id = emb.id();
    if (spec.mass == 0.0 && opt.anomaly_prefactor != 0.0 && spec.n_sites >= 5)
        h.anomaly_rate = opt.anomaly_prefactor * integrated_anomaly(spec, emb, v);
    return h;
}

SmearedHamiltonian flat_hamiltonian(const LatticeSpec& spec, double w) {
    Embedding seed = boost(Embedding::flat(spec), w);
    return smear_flux(spec, seed, DeformationVector::constant(spec.n_sites, std::cosh(w), -std::sinh(w)));
}

DeformationVector anomaly_potential(const LatticeSpec& spec, const Embedding& emb) {
    if (spec.mass > 0.0) throw MassiveField("anomaly potential is defined for m = 0 only");
    if (!emb.spec().same_lattice(spec)) throw InvalidEmbedding("embedding lattice differs from field lattice");
    const int n = emb.size();
    Eigen::VectorXd k = extrinsic_curvature_trace(emb);
    DeformationVector out = DeformationVector::zero(n);
    if ((k.array() == 0.0).all()) return out;
    Eigen::VectorXd g = induced_metric(emb);
    DeformationVector nu = unit_normal(emb);
    Eigen::VectorXd dk(n);
    const double h = spec.spacing;
    for (int i = 1; i + 1 < n; ++i) dk[i] = (k[i + 1] - k[i - 1]) / (2 * h);
    if (spec.periodic()) {
        dk[0] = (k[1] - k[n - 1]) / (2 * h);
        dk[n - 1] = (k[0] - k[n - 2]) / (2 * h);
    } else {
        dk[0] = (-3 * k[0] + 4 * k[1] - k[2]) / (2 * h);
        dk[n - 1] = (3 * k[n - 1] - 4 * k[n - 2] + k[n - 3]) / (2 * h);
    }
    for (int i = 0; i < n; ++i) {
        const double sg = std::sqrt(g[i]);
        const double X0 = -emb.t()[i], X1 = emb.x()[i];     // X_mu
        const double n0 = -nu.v0[i], n1 = nu.v1[i];         // n_mu
        out.v0[i] = sg * (X0 * dk[i] - k[i] * k[i] * n0);
        out.v1[i] = sg * (X1 * dk[i] - k[i] * k[i] * n1);
    }
    return out;
}

double partial_anomaly(const LatticeSpec& spec, const Embedding& emb, const DeformationVector& v,
                       const Eigen::VectorXd& mask) {
    if (v.size() != emb.size() || mask.size() != emb.size()) throw DimensionMismatch("vector length");
    DeformationVector a = anomaly_potential(spec, emb);
    Eigen::VectorXd sg = induced_metric(emb).cwiseSqrt();
    double acc = 0.0;
    for (int i = 0; i < emb.size(); ++i)
        if (mask[i] != 0.0) acc += spec.spacing * sg[i] * (v.v0[i] * a.v0[i] + v.v1[i] * a.v1[i]);
    return acc;
}

double integrated_anomaly(const LatticeSpec& spec, const Embedding& emb, const DeformationVector& v) {
    return partial_anomaly(spec, emb, v, Eigen::VectorXd::Ones(emb.size()));
}

}  // namespace pft
