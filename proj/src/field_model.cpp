#include "pft/field_model.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "pft/errors.hpp"

namespace pft {

QuadraticForm::QuadraticForm(Eigen::MatrixXd m, double c) : matrix(std::move(m)), offset(c) {
    if (matrix.rows() != matrix.cols()) throw DimensionMismatch("quadratic form must be square");
}

bool QuadraticForm::is_symmetric(double rel_tol) const {
    double scale = matrix.cwiseAbs().maxCoeff();
    if (scale == 0.0) return true;
    return (matrix - matrix.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

QuadraticForm QuadraticForm::operator+(const QuadraticForm& o) const {
    if (dim() != o.dim()) throw DimensionMismatch("form dimensions differ");
    return QuadraticForm(matrix + o.matrix, offset + o.offset);
}

QuadraticForm QuadraticForm::operator-(const QuadraticForm& o) const {
    if (dim() != o.dim()) throw DimensionMismatch("form dimensions differ");
    return QuadraticForm(matrix - o.matrix, offset - o.offset);
}

QuadraticForm QuadraticForm::operator*(double s) const { return QuadraticForm(matrix * s, offset * s); }

QuadraticForm LocalForm::global(int dim) const {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim, dim);
    for (std::size_t a = 0; a < index.size(); ++a)
        for (std::size_t b = 0; b < index.size(); ++b) m(index[a], index[b]) += block(a, b);
    return QuadraticForm(std::move(m));
}

void LocalForm::add_to(std::vector<Eigen::Triplet<double>>& out, double scale) const {
    for (std::size_t a = 0; a < index.size(); ++a)
        for (std::size_t b = 0; b < index.size(); ++b)
            if (block(a, b) != 0.0) out.emplace_back(index[a], index[b], scale * block(a, b));
}

LocalForm LocalForm::scaled(double s) const { return {index, block * s}; }

LocalForm combine(const std::vector<std::pair<double, const LocalForm*>>& terms) {
    LocalForm out;
    out.index = terms.front().second->index;
    out.block = Eigen::MatrixXd::Zero(out.index.size(), out.index.size());
    for (auto& [c, f] : terms) {
        if (f->index != out.index) throw DimensionMismatch("local forms on different stencils");
        out.block += c * f->block;
    }
    return out;
}

namespace {

// Stencil of site i: phi_{i-1}, phi_i, phi_{i+1}, p_i. Missing ghost entries
// get slot -1.
struct Stencil {
    std::vector<int> index;
    int left = -1, centre = -1, right = -1, mom = -1;
};

Stencil stencil(const LatticeSpec& s, int i) {
    const int n = s.n_sites;
    Stencil st;
    auto push = [&](int idx) {
        st.index.push_back(idx);
        return static_cast<int>(st.index.size()) - 1;
    };
    int l = i - 1, r = i + 1;
    if (s.periodic()) {
        l = (l + n) % n;
        r = r % n;
    }
    if (l >= 0) st.left = push(l);
    st.centre = push(i);
    if (r < n) st.right = push(r);
    st.mom = push(n + i);
    return st;
}

// (phi_a - phi_b)^2 * c in the 1/2 z^T M z convention.
void add_link(Eigen::MatrixXd& b, int a, int c_idx, double c) {
    b(a, a) += 2 * c;
    if (c_idx < 0) return;
    b(c_idx, c_idx) += 2 * c;
    b(a, c_idx) -= 2 * c;
    b(c_idx, a) -= 2 * c;
}

}  // namespace

SiteDensities site_densities(const LatticeSpec& spec, double gamma, int i) {
    const double h = spec.spacing;
    const double sg = std::sqrt(gamma);
    Stencil st = stencil(spec, i);
    const int m = static_cast<int>(st.index.size());
    SiteDensities d;
    for (LocalForm* f : {&d.nn, &d.tt, &d.nt, &d.mm}) {
        f->index = st.index;
        f->block = Eigen::MatrixXd::Zero(m, m);
    }
    d.nn.block(st.mom, st.mom) = 2.0 / (h * gamma);
    d.mm.block(st.centre, st.centre) = 2.0 * h;
    // dx * 1/2 [(D+ phi)^2 + (D- phi)^2]; ghost links count twice.
    const double c = 1.0 / (2.0 * h);
    add_link(d.tt.block, st.centre, st.right, st.right < 0 ? 2 * c : c);
    add_link(d.tt.block, st.centre, st.left, st.left < 0 ? 2 * c : c);
    const double q = 1.0 / (2.0 * h * sg);
    if (st.right >= 0) {
        d.nt.block(st.mom, st.right) += q;
        d.nt.block(st.right, st.mom) += q;
    }
    if (st.left >= 0) {
        d.nt.block(st.mom, st.left) -= q;
        d.nt.block(st.left, st.mom) -= q;
    }
    return d;
}

std::vector<StressTensorForms> stress_energy_forms(const LatticeSpec& spec, const Embedding& emb) {
    if (!emb.spec().same_lattice(spec)) throw InvalidEmbedding("embedding lattice differs from field lattice");
    Eigen::VectorXd g;
    try {
        g = induced_metric(emb);
    } catch (const NotSpacelike& e) {
        throw InvalidEmbedding(e.what());
    }
    Tangent d = tangent(emb);
    const double m2 = spec.mass * spec.mass;
    std::vector<StressTensorForms> out(spec.n_sites);
    for (int i = 0; i < spec.n_sites; ++i) {
        const double sg = std::sqrt(g[i]);
        SiteDensities s = site_densities(spec, g[i], i);
        const double nl[2] = {-d.dx[i] / sg, d.dt[i] / sg};  // n_mu
        const double tl[2] = {-d.dt[i], d.dx[i]};            // X'_mu
        const double eta[2] = {-1.0, 1.0};
        for (int a = 0; a < 2; ++a) {
            for (int b = 0; b < 2; ++b) {
                const double diag = a == b ? eta[a] : 0.0;
                LocalForm t = combine({{nl[a] * nl[b] + 0.5 * diag, &s.nn},
                                       {-(nl[a] * tl[b] + tl[a] * nl[b]) / g[i], &s.nt},
                                       {tl[a] * tl[b] / (g[i] * g[i]) - 0.5 * diag / g[i], &s.tt},
                                       {-0.5 * diag * m2, &s.mm}});
                // T^0_mu = T_{0 mu}, T^1_mu = -T_{1 mu}
                out[i][a][b] = a == 0 ? t : t.scaled(-1.0);
            }
        }
    }
    return out;
}

SpMat flux_matrix(const LatticeSpec& spec, const Embedding& emb, const Eigen::VectorXd& lapse,
                  const Eigen::VectorXd& shift) {
    const int n = spec.n_sites;
    if (lapse.size() != n || shift.size() != n) throw DimensionMismatch("lapse/shift length");
    Eigen::VectorXd g;
    try {
        g = induced_metric(emb);
    } catch (const NotSpacelike& e) {
        throw InvalidEmbedding(e.what());
    }
    const double h = spec.spacing;
    const double m2 = spec.mass * spec.mass;
    std::vector<Eigen::Triplet<double>> tr;
    tr.reserve(12 * n);
    for (int i = 0; i < n; ++i) {
        const double sg = std::sqrt(g[i]);
        const double N = lapse[i];
        const int l = spec.periodic() ? (i - 1 + n) % n : i - 1;
        const int r = spec.periodic() ? (i + 1) % n : i + 1;
        tr.emplace_back(n + i, n + i, N / (h * sg));
        if (m2 != 0.0) tr.emplace_back(i, i, N * h * sg * m2);
        const double c = N / (2.0 * h * sg);  // 2 * N / (4 h sg)
        for (int j : {l, r}) {
            if (j < 0 || j >= n) {
                tr.emplace_back(i, i, 2 * c);
                continue;
            }
            tr.emplace_back(i, i, c);
            tr.emplace_back(j, j, c);
            tr.emplace_back(i, j, -c);
            tr.emplace_back(j, i, -c);
        }
        const double q = shift[i] / (2.0 * h);
        if (q != 0.0) {
            if (r < n) {
                tr.emplace_back(n + i, r, q);
                tr.emplace_back(r, n + i, q);
            }
            if (l >= 0) {
                tr.emplace_back(n + i, l, -q);
                tr.emplace_back(l, n + i, -q);
            }
        }
    }
    SpMat m(2 * n, 2 * n);
    m.setFromTriplets(tr.begin(), tr.end());
    return m;
}

QuadraticForm commutator_form(const QuadraticForm& a, const QuadraticForm& b) {
    if (a.dim() != b.dim() || a.dim() % 2 != 0) throw DimensionMismatch("commutator of forms of different size");
    const int n = a.dim() / 2;
    // A Omega B without forming Omega: (B rows) -> Omega B = [B_p; -B_phi]
    Eigen::MatrixXd ob(2 * n, 2 * n);
    ob.topRows(n) = b.matrix.bottomRows(n);
    ob.bottomRows(n) = -b.matrix.topRows(n);
    Eigen::MatrixXd c = a.matrix * ob;
    Eigen::MatrixXd sym = c + c.transpose();
    return QuadraticForm(sym, 0.0);
}

cplx kg_inner_product(const ModePair& a, const ModePair& b, const Embedding& emb) {
    const int n = emb.size();
    if (a.u.size() != n || a.udot.size() != n || b.u.size() != n || b.udot.size() != n)
        throw DimensionMismatch("mode pair length differs from embedding");
    Eigen::VectorXd sg = induced_metric(emb).cwiseSqrt();
    const double h = emb.spec().spacing;
    cplx acc = 0.0;
    for (int i = 0; i < n; ++i) acc += h * sg[i] * (std::conj(a.u[i]) * b.udot[i] - std::conj(a.udot[i]) * b.u[i]);
    return cplx(0.0, 1.0) * acc;
}

std::vector<int> ModeFrame::retained() const {
    std::vector<int> r;
    for (int j = 0; j < size(); ++j)
        if (std::abs(k[j]) * spec.spacing <= std::numbers::pi / 2 + 1e-12) r.push_back(j);
    return r;
}

Eigen::MatrixXcd ModeFrame::z() const {
    const int n = spec.n_sites;
    Eigen::MatrixXcd out(2 * n, size());
    out.topRows(n) = u;
    out.bottomRows(n) = (spec.spacing * sqrt_gamma).asDiagonal() * udot;
    return out;
}

ModeFrame ModeFrame::from_z(const Eigen::MatrixXcd& z, const Embedding& emb, const ModeFrame& like) {
    const int n = emb.size();
    if (z.rows() != 2 * n) throw DimensionMismatch("phase-space modes have wrong length");
    ModeFrame f = like;
    f.embedding_id = emb.id();
    f.sqrt_gamma = induced_metric(emb).cwiseSqrt();
    f.u = z.topRows(n);
    Eigen::VectorXd inv = (emb.spec().spacing * f.sqrt_gamma).cwiseInverse();
    f.udot = inv.asDiagonal() * z.bottomRows(n);
    f.omega = Eigen::VectorXd::Constant(z.cols(), std::numeric_limits<double>::quiet_NaN());
    return f;
}

double lattice_omega(const LatticeSpec& spec, double k, double gamma) {
    const double s = std::sin(0.5 * k * spec.spacing);
    return std::sqrt(spec.mass * spec.mass + 4.0 * s * s / (gamma * spec.spacing * spec.spacing));
}

ModeFrame flat_mode_frame(const LatticeSpec& spec, const Embedding& emb) {
    if (!emb.spec().same_lattice(spec)) throw DimensionMismatch("embedding lattice differs from field lattice");
    if (!emb.is_affine()) throw CurvedEmbedding("mode frames need an affine slice");
    const int n = spec.n_sites;
    const double h = spec.spacing;
    Eigen::VectorXd g = induced_metric(emb);
    const double gamma = g.mean();
    const double sg = std::sqrt(gamma);
    const cplx I(0.0, 1.0);

    ModeFrame f;
    f.spec = spec;
    f.embedding_id = emb.id();
    f.sqrt_gamma = Eigen::VectorXd::Constant(n, sg);
    std::vector<double> ks;
    if (spec.periodic()) {
        for (int m = -(n - 1) / 2; m <= n / 2; ++m) {
            if (m == 0 && spec.mass == 0.0) {
                f.zero_mode_excluded = true;
                continue;
            }
            ks.push_back(2.0 * std::numbers::pi * m / spec.length());
        }
    } else {
        for (int m = 1; m <= n; ++m) ks.push_back(std::numbers::pi * m / ((n + 1) * h));
    }
    const int kcount = static_cast<int>(ks.size());
    f.u.resize(n, kcount);
    f.udot.resize(n, kcount);
    f.k.resize(kcount);
    f.omega.resize(kcount);
    for (int j = 0; j < kcount; ++j) {
        const double k = ks[j];
        const double w = lattice_omega(spec, k, gamma);
        f.k[j] = k;
        f.omega[j] = w;
        if (spec.periodic()) {
            const double c = 1.0 / std::sqrt(2.0 * w * n * h * sg);
            for (int i = 0; i < n; ++i) f.u(i, j) = c * std::exp(I * (k * spec.label(i)));
        } else {
            const double c = 1.0 / std::sqrt(w * h * sg * (n + 1));
            for (int i = 0; i < n; ++i) f.u(i, j) = c * std::sin(k * (i + 1) * h);
        }
        f.udot.col(j) = -I * w * f.u.col(j);
    }
    return f;
}

Eigen::MatrixXd frame_vacuum_covariance(const ModeFrame& f) {
    Eigen::MatrixXcd z = f.z();
    return (z * z.adjoint()).real();
}

}  // namespace pft
