#include "pft/bogoliubov.hpp"

#include <cmath>

#include "pft/errors.hpp"

namespace pft {

void canonical_violations(const Eigen::MatrixXcd& alpha, const Eigen::MatrixXcd& beta, const std::vector<int>& rows,
                          double& unitarity, double& symmetry) {
    const int r = static_cast<int>(rows.size());
    Eigen::MatrixXcd a(r, alpha.cols()), b(r, beta.cols());
    for (int i = 0; i < r; ++i) {
        a.row(i) = alpha.row(rows[i]);
        b.row(i) = beta.row(rows[i]);
    }
    Eigen::MatrixXcd u = a * a.adjoint() - b * b.adjoint();
    u -= Eigen::MatrixXcd::Identity(r, r);
    Eigen::MatrixXcd s = a * b.transpose() - b * a.transpose();
    unitarity = r ? u.cwiseAbs().maxCoeff() : 0.0;
    symmetry = r ? s.cwiseAbs().maxCoeff() : 0.0;
}

BogoliubovMap bogoliubov_between(const ModeFrame& to, const ModeFrame& from, const Embedding& emb, double tol) {
    if (to.embedding_id != emb.id() || from.embedding_id != emb.id())
        throw FrameMismatch("both frames must live on embedding " + emb.id());
    if (to.spec.n_sites != emb.size() || from.spec.n_sites != emb.size())
        throw FrameMismatch("frame lattice differs from embedding");
    const cplx I(0.0, 1.0);
    Eigen::MatrixXcd zv = from.z();
    Eigen::MatrixXcd zw = to.z();
    const int n = emb.size();
    // (a, b) = i a^dag Omega b
    Eigen::MatrixXcd ow(2 * n, zw.cols());
    ow.topRows(n) = zw.bottomRows(n);
    ow.bottomRows(n) = -zw.topRows(n);
    Eigen::MatrixXcd owc(2 * n, zw.cols());
    owc.topRows(n) = zw.bottomRows(n).conjugate();
    owc.bottomRows(n) = -zw.topRows(n).conjugate();
    Eigen::MatrixXcd vw = I * (zv.adjoint() * ow);    // (v_j, w_k)
    Eigen::MatrixXcd vwc = I * (zv.adjoint() * owc);  // (v_j, w_k^*)
    BogoliubovMap m;
    m.alpha = vw;
    m.beta = -vwc;
    m.embedding_id = emb.id();
    m.retained = from.retained();
    canonical_violations(m.alpha, m.beta, m.retained, m.unitarity_violation, m.symmetry_violation);
    m.canonical_warning = m.unitarity_violation > 10 * tol || m.symmetry_violation > 10 * tol;
    return m;
}

double expected_number(const BogoliubovMap& map, int k) {
    if (k < 0 || k >= map.cols()) throw ModeOutOfRange("mode " + std::to_string(k));
    return map.beta.col(k).squaredNorm();
}

ModeFrame transport_frame(const ModeFrame& f, const Propagator& p, const Embedding& emb_to) {
    if (p.S.rows() != 2 * f.spec.n_sites) throw DimensionMismatch("propagator and frame dimensions differ");
    Eigen::MatrixXcd z = p.S.cast<cplx>() * f.z();
    return ModeFrame::from_z(z, emb_to, f);
}

}  // namespace pft
