#include "pft/evolve.hpp"

#include <cmath>
#include <cstdio>

#include <Eigen/Eigenvalues>

#include "pft/errors.hpp"

namespace pft {

namespace {

Eigen::MatrixXd omega_right(const Eigen::MatrixXd& a) {
    // a * Omega: columns (phi, p) -> (-a_p, a_phi)
    const int n = static_cast<int>(a.cols()) / 2;
    Eigen::MatrixXd out(a.rows(), a.cols());
    out.leftCols(n) = -a.rightCols(n);
    out.rightCols(n) = a.leftCols(n);
    return out;
}

Eigen::MatrixXd omega_left(const Eigen::MatrixXd& a) {
    // Omega * a: rows (phi, p) -> (a_p, -a_phi)
    const int n = static_cast<int>(a.rows()) / 2;
    Eigen::MatrixXd out(a.rows(), a.cols());
    out.topRows(n) = a.bottomRows(n);
    out.bottomRows(n) = -a.topRows(n);
    return out;
}

double inf_norm(const SpMat& a) {
    Eigen::VectorXd rows = Eigen::VectorXd::Zero(a.rows());
    for (int k = 0; k < a.outerSize(); ++k)
        for (SpMat::InnerIterator it(a, k); it; ++it) rows[it.row()] += std::abs(it.value());
    return rows.size() ? rows.maxCoeff() : 0.0;
}

void symmetrize(Eigen::MatrixXd& m) { m = 0.5 * (m + m.transpose()).eval(); }

// Sigma -> C Sigma C^T and mean -> C mean, with C applied columnwise.
void transport(const CayleyFactor& c, Eigen::VectorXd& mean, Eigen::MatrixXd& cov) {
    const int d = static_cast<int>(mean.size());
    Eigen::MatrixXd y(d, d + 1);
    y.leftCols(d) = cov;
    y.col(d) = mean;
    c.apply(y);
    mean = y.col(d);
    Eigen::MatrixXd z = y.leftCols(d).transpose();
    c.apply(z);
    cov = std::move(z);
    symmetrize(cov);
}

}  // namespace

double GaussianState::purity_defect() const {
    Eigen::MatrixXd a = -2.0 * omega_right(cov);  // 2 Sigma Omega^{-1}
    Eigen::MatrixXd sq = a * a;
    sq.diagonal().array() += 1.0;
    return sq.cwiseAbs().maxCoeff();
}

double GaussianState::expectation(const QuadraticForm& a) const {
    if (a.dim() != dim()) throw DimensionMismatch("observable and state dimensions differ");
    return 0.5 * (a.matrix.cwiseProduct(cov)).sum() + 0.5 * mean.dot(a.matrix * mean) + a.offset;
}

double GaussianState::expectation(const SpMat& m, double offset) const {
    if (m.rows() != dim()) throw DimensionMismatch("observable and state dimensions differ");
    double tr = 0.0;
    for (int k = 0; k < m.outerSize(); ++k)
        for (SpMat::InnerIterator it(m, k); it; ++it) tr += it.value() * cov(it.col(), it.row());
    return 0.5 * tr + 0.5 * mean.dot(m * mean) + offset;
}

GaussianState GaussianState::vacuum(const LatticeSpec& spec, const Embedding& emb, double zero_mode_omega) {
    ModeFrame f = flat_mode_frame(spec, emb);
    Eigen::MatrixXcd z = f.z();
    if (f.zero_mode_excluded) {
        const int n = spec.n_sites;
        const double sg = f.sqrt_gamma[0];
        const double c = 1.0 / std::sqrt(2.0 * zero_mode_omega * n * spec.spacing * sg);
        Eigen::MatrixXcd zz(2 * n, z.cols() + 1);
        zz.leftCols(z.cols()) = z;
        zz.col(z.cols()).head(n).setConstant(c);
        zz.col(z.cols()).tail(n).setConstant(cplx(0.0, -zero_mode_omega * c * spec.spacing * sg));
        z = std::move(zz);
    }
    GaussianState s;
    s.spec = spec;
    s.mean = Eigen::VectorXd::Zero(2 * spec.n_sites);
    s.cov = (z * z.adjoint()).real();
    symmetrize(s.cov);
    s.embedding_id = emb.id();
    return s;
}

GaussianState GaussianState::ground_state(const LatticeSpec& spec, const SpMat& m, const std::string& id) {
    const int n = spec.n_sites;
    Eigen::MatrixXd dm(m);
    if (dm.topRightCorner(n, n).cwiseAbs().maxCoeff() != 0.0)
        throw DegenerateInput("ground state needs a generator without phi-p coupling");
    Eigen::MatrixXd V = dm.topLeftCorner(n, n);
    Eigen::MatrixXd P = dm.bottomRightCorner(n, n);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ep(P);
    if (ep.eigenvalues().minCoeff() <= 0.0) throw DegenerateInput("kinetic block not positive");
    Eigen::MatrixXd ph = ep.eigenvectors() * ep.eigenvalues().cwiseSqrt().asDiagonal() * ep.eigenvectors().transpose();
    Eigen::MatrixXd phi = ep.eigenvectors() * ep.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
                          ep.eigenvectors().transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ew(ph * V * ph);
    if (ew.eigenvalues().minCoeff() <= 0.0) throw DegenerateInput("potential block not positive");
    Eigen::VectorXd w = ew.eigenvalues().cwiseSqrt();
    Eigen::MatrixXd W = ew.eigenvectors() * w.asDiagonal() * ew.eigenvectors().transpose();
    Eigen::MatrixXd Wi = ew.eigenvectors() * w.cwiseInverse().asDiagonal() * ew.eigenvectors().transpose();
    GaussianState s;
    s.spec = spec;
    s.mean = Eigen::VectorXd::Zero(2 * n);
    s.cov = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    s.cov.topLeftCorner(n, n) = 0.5 * ph * Wi * ph;
    s.cov.bottomRightCorner(n, n) = 0.5 * phi * W * phi;
    symmetrize(s.cov);
    s.embedding_id = id;
    return s;
}

GaussianState GaussianState::displaced(const Eigen::VectorXd& phi, const Eigen::VectorXd& p) const {
    const int n = spec.n_sites;
    if (phi.size() != n || p.size() != n) throw DimensionMismatch("displacement length");
    GaussianState s = *this;
    s.mean.head(n) = phi;
    s.mean.tail(n) = p;
    return s;
}

Propagator Propagator::identity(int dim) { return {Eigen::MatrixXd::Identity(dim, dim), 0.0}; }

GaussianState Propagator::apply(const GaussianState& s, const std::string& id) const {
    if (S.rows() != s.dim()) throw DimensionMismatch("propagator and state dimensions differ");
    GaussianState out = s;
    out.mean = S * s.mean;
    out.cov = S * s.cov * S.transpose();
    symmetrize(out.cov);
    out.phase = s.phase + phase_increment;
    out.embedding_id = id;
    return out;
}

Propagator Propagator::after(const Propagator& first) const { return {S * first.S, phase_increment + first.phase_increment}; }

Propagator Propagator::inverse() const {
    // S^{-1} = Omega^{-1} S^T Omega for symplectic S
    Eigen::MatrixXd inv = -omega_left(omega_right(Eigen::MatrixXd(S.transpose())));
    return {inv, -phase_increment};
}

double symplectic_drift(const Eigen::MatrixXd& S) {
    Eigen::MatrixXd d = S * omega_left(Eigen::MatrixXd(S.transpose()));  // S Omega S^T
    const int n = static_cast<int>(S.rows()) / 2;
    d.topRightCorner(n, n).diagonal().array() -= 1.0;
    d.bottomLeftCorner(n, n).diagonal().array() += 1.0;
    return d.cwiseAbs().rowwise().sum().maxCoeff();
}

Eigen::MatrixXd symplectic_projection(const Eigen::MatrixXd& S) {
    Eigen::MatrixXd sit = S.inverse().transpose();
    // Omega^{-1} X Omega = -Omega X Omega
    return 0.5 * (S - omega_left(omega_right(sit)));
}

double max_abs_distance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionMismatch("distance between different shapes");
    return (a - b).cwiseAbs().maxCoeff();
}

SpMat omega_times(const SpMat& m) {
    const int n = static_cast<int>(m.rows()) / 2;
    std::vector<Eigen::Triplet<double>> tr;
    tr.reserve(m.nonZeros());
    for (int k = 0; k < m.outerSize(); ++k)
        for (SpMat::InnerIterator it(m, k); it; ++it) {
            const int r = static_cast<int>(it.row());
            if (r >= n) tr.emplace_back(r - n, it.col(), it.value());
            else tr.emplace_back(r + n, it.col(), -it.value());
        }
    SpMat out(m.rows(), m.cols());
    out.setFromTriplets(tr.begin(), tr.end());
    return out;
}

CayleyFactor::CayleyFactor(const SpMat& m, double dt) {
    SpMat a = omega_times(m) * dt;
    norm_ = inf_norm(a);
    SpMat id(m.rows(), m.cols());
    id.setIdentity();
    plus_ = id + 0.5 * a;
    SpMat minus = id - 0.5 * a;
    minus.makeCompressed();
    lu_.compute(minus);
    if (lu_.info() != Eigen::Success) throw StepTooLarge("implicit-midpoint system is singular");
}

void CayleyFactor::apply(Eigen::MatrixXd& y) const {
    Eigen::MatrixXd rhs = plus_ * y;
    y = lu_.solve(rhs);
}

Eigen::MatrixXd CayleyFactor::dense() const {
    Eigen::MatrixXd y = Eigen::MatrixXd::Identity(plus_.rows(), plus_.cols());
    apply(y);
    return y;
}

namespace {

void check_norm(const CayleyFactor& c, const EvolveOptions& opt, int k) {
    if (c.norm() > opt.max_step_norm) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "step %d: ||Omega M dt|| = %.3e exceeds %.3e", k, c.norm(), opt.max_step_norm);
        throw StepTooLarge(buf);
    }
}

struct StepData {
    SmearedHamiltonian h;
    double dt;
};

StepData foliation_step(const Foliation& fol, int k, const HamiltonianOptions& ho) {
    const Embedding& a = fol.leaves()[k];
    const Embedding& b = fol.leaves()[k + 1];
    const double dt = fol.times()[k + 1] - fol.times()[k];
    Embedding mid = interpolate(a, b, 0.5);
    DeformationVector v = difference(a, b);
    v.v0 /= dt;
    v.v1 /= dt;
    return {smear_flux(a.spec(), mid, v, ho), dt};
}

}  // namespace

GaussianState step(const GaussianState& s, const SmearedHamiltonian& h, double dt, const EvolveOptions& opt,
                   double* drift) {
    if (h.matrix.rows() != s.dim()) throw DimensionMismatch("generator and state dimensions differ");
    CayleyFactor c(h.matrix, dt);
    check_norm(c, opt, 0);
    Eigen::MatrixXd S = c.dense();
    double d = symplectic_drift(S);
    if (drift) *drift = d;
    if (d > opt.projection_threshold) S = symplectic_projection(S);
    Propagator p{S, -h.anomaly_rate * dt};
    return p.apply(s, s.embedding_id);
}

GaussianState evolve_foliation(const GaussianState& s, const Foliation& fol, const EvolveOptions& opt,
                               EvolveDiagnostics* diag) {
    if (s.embedding_id != fol.leaves().front().id())
        throw LeafMismatch("state lives on " + s.embedding_id + ", foliation starts on " + fol.leaves().front().id());
    EvolveDiagnostics dg;
    dg.non_foliating_steps = fol.non_foliating_steps();
    GaussianState out = s;
    for (int k = 0; k < fol.n_steps(); ++k) {
        StepData sd = foliation_step(fol, k, opt.hamiltonian);
        CayleyFactor c(sd.h.matrix, sd.dt);
        check_norm(c, opt, k);
        dg.max_step_norm = std::max(dg.max_step_norm, c.norm());
        dg.energy_trace.push_back(out.expectation(sd.h.matrix, sd.h.anomaly_rate));
        if (opt.per_step_drift) dg.max_step_drift = std::max(dg.max_step_drift, symplectic_drift(c.dense()));
        transport(c, out.mean, out.cov);
        out.phase -= sd.h.anomaly_rate * sd.dt;
    }
    out.embedding_id = fol.leaves().back().id();
    dg.purity_defect = out.purity_defect();
    if (diag) *diag = std::move(dg);
    return out;
}

Propagator propagate_foliation(const Foliation& fol, const EvolveOptions& opt, EvolveDiagnostics* diag) {
    EvolveDiagnostics dg;
    dg.non_foliating_steps = fol.non_foliating_steps();
    const int d = 2 * fol.leaves().front().spec().n_sites;
    Propagator p = Propagator::identity(d);
    for (int k = 0; k < fol.n_steps(); ++k) {
        StepData sd = foliation_step(fol, k, opt.hamiltonian);
        CayleyFactor c(sd.h.matrix, sd.dt);
        check_norm(c, opt, k);
        dg.max_step_norm = std::max(dg.max_step_norm, c.norm());
        if (opt.per_step_drift) dg.max_step_drift = std::max(dg.max_step_drift, symplectic_drift(c.dense()));
        c.apply(p.S);
        p.phase_increment -= sd.h.anomaly_rate * sd.dt;
        const bool last = k + 1 == fol.n_steps();
        if (last || (opt.check_interval > 0 && (k + 1) % opt.check_interval == 0)) {
            double dr = symplectic_drift(p.S);
            dg.max_checked_drift = std::max(dg.max_checked_drift, dr);
            if (dr > opt.projection_threshold) {
                p.S = symplectic_projection(p.S);
                ++dg.projections;
            }
        }
    }
    dg.final_drift = symplectic_drift(p.S);
    if (diag) *diag = std::move(dg);
    return p;
}

int frame_change_substeps(const LatticeSpec& spec, const Embedding& a, const Embedding& b,
                          const FrameChangeOptions& opt) {
    if (opt.substeps > 0) return opt.substeps;
    SmearedHamiltonian g = smear_flux(spec, a, difference(a, b), opt.hamiltonian);
    const double nrm = inf_norm(omega_times(g.matrix));
    return std::max(opt.min_substeps, static_cast<int>(std::ceil(nrm / opt.target_norm)));
}

namespace {

template <class Body>
void frame_change_loop(const LatticeSpec& spec, const Embedding& a, const Embedding& b, const FrameChangeOptions& opt,
                       Body&& body) {
    if (!a.spec().same_lattice(spec) || !b.spec().same_lattice(spec)) throw InvalidEmbedding("embedding lattice differs from field lattice");
    const int m = frame_change_substeps(spec, a, b, opt);
    DeformationVector v = difference(a, b);
    v.v0 /= m;
    v.v1 /= m;
    for (int j = 0; j < m; ++j) {
        Embedding mid = [&] {
            try {
                return interpolate(a, b, (j + 0.5) / m);
            } catch (const NotSpacelike& e) {
                throw InvalidEmbedding(std::string("straight path leaves the spacelike cone: ") + e.what());
            }
        }();
        SmearedHamiltonian h = smear_flux(spec, mid, v, opt.hamiltonian);
        body(CayleyFactor(h.matrix, 1.0), h.anomaly_rate);
    }
}

}  // namespace

Propagator frame_change_unitary(const LatticeSpec& spec, const Embedding& a, const Embedding& b,
                                const FrameChangeOptions& opt) {
    Propagator p = Propagator::identity(2 * spec.n_sites);
    if (a.same_geometry(b)) return p;
    frame_change_loop(spec, a, b, opt, [&](const CayleyFactor& c, double rate) {
        c.apply(p.S);
        p.phase_increment -= rate;
    });
    if (symplectic_drift(p.S) > 1e-12) p.S = symplectic_projection(p.S);
    return p;
}

GaussianState apply_frame_change(const GaussianState& s, const Embedding& a, const Embedding& b,
                                 const FrameChangeOptions& opt) {
    if (s.embedding_id != a.id()) throw LeafMismatch("state does not live on the source embedding");
    GaussianState out = s;
    out.embedding_id = b.id();
    if (a.same_geometry(b)) return out;
    frame_change_loop(a.spec(), a, b, opt, [&](const CayleyFactor& c, double rate) {
        transport(c, out.mean, out.cov);
        out.phase -= rate;
    });
    return out;
}

DeformationVector site_normal_vector(const Embedding& emb, int site) {
    if (site < 0 || site >= emb.size()) throw DegenerateInput("site out of range");
    Tangent d = tangent(emb);
    DeformationVector v = DeformationVector::zero(emb.size());
    v.v0[site] = d.dx[site];  // sqrt(gamma) n^0
    v.v1[site] = d.dt[site];  // sqrt(gamma) n^1
    return v;
}

Embedding normal_bump(const Embedding& emb, int site, double eps) {
    DeformationVector v = site_normal_vector(emb, site);
    Eigen::VectorXd t = emb.t() + eps * v.v0;
    Eigen::VectorXd x = emb.x() + eps * v.v1;
    try {
        return Embedding(emb.spec(), std::move(t), std::move(x), emb.wrap_t(), emb.wrap_x(), emb.margin());
    } catch (const NotSpacelike& e) {
        throw DeformationNotSpacelike(e.what());
    }
}

TsResidual ts_residual(const LatticeSpec& spec, const FamilyRule& family, const Embedding& emb, int site, double eps) {
    if (eps == 0.0) throw DegenerateInput("eps must be nonzero");
    if (site < 0 || site >= emb.size()) throw DegenerateInput("site out of range");
    TsResidual r;
    r.boundary_site = !spec.periodic() && (site == 0 || site == emb.size() - 1);
    GaussianState s0 = family(emb);
    GaussianState sp = family(normal_bump(emb, site, eps));
    GaussianState sm = family(normal_bump(emb, site, -eps));
    SmearedHamiltonian h = smear_flux(spec, emb, site_normal_vector(emb, site));
    Eigen::MatrixXd a = omega_left(Eigen::MatrixXd(h.matrix));
    Eigen::VectorXd dm = (sp.mean - sm.mean) / (2 * eps) - a * s0.mean;
    Eigen::MatrixXd as = a * s0.cov;
    Eigen::MatrixXd dc = (sp.cov - sm.cov) / (2 * eps) - (as + as.transpose());
    r.residual = dm.norm() + dc.norm();
    return r;
}

Eigen::VectorXd classical_leapfrog(const LatticeSpec& spec, const Eigen::VectorXd& phi0, const Eigen::VectorXd& pi0,
                                   double t_final, int n_steps) {
    const int n = spec.n_sites;
    if (phi0.size() != n || pi0.size() != n) throw DimensionMismatch("initial data length");
    if (n_steps < 1) throw DegenerateInput("n_steps must be >= 1");
    const double dt = t_final / n_steps;
    const double h2 = spec.spacing * spec.spacing;
    const double m2 = spec.mass * spec.mass;
    auto force = [&](const Eigen::VectorXd& f) {
        Eigen::VectorXd a(n);
        for (int i = 0; i < n; ++i) {
            double l = i > 0 ? f[i - 1] : (spec.periodic() ? f[n - 1] : 0.0);
            double r = i + 1 < n ? f[i + 1] : (spec.periodic() ? f[0] : 0.0);
            a[i] = (l - 2 * f[i] + r) / h2 - m2 * f[i];
        }
        return a;
    };
    Eigen::VectorXd phi = phi0, pi = pi0;
    for (int k = 0; k < n_steps; ++k) {
        pi += 0.5 * dt * force(phi);
        phi += dt * pi;
        pi += 0.5 * dt * force(phi);
    }
    return phi;
}

}  // namespace pft
