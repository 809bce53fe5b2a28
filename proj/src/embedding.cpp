#include "pft/embedding.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <limits>

#include "pft/errors.hpp"

namespace pft {

DeformationVector::DeformationVector(Eigen::VectorXd a, Eigen::VectorXd b)
    : v0(std::move(a)), v1(std::move(b)) {
    if (v0.size() != v1.size()) throw DimensionMismatch("deformation components differ in length");
}

DeformationVector DeformationVector::constant(int n, double a, double b) {
    return {Eigen::VectorXd::Constant(n, a), Eigen::VectorXd::Constant(n, b)};
}

bool DeformationVector::finite() const { return v0.allFinite() && v1.allFinite(); }

bool DeformationVector::operator==(const DeformationVector& o) const {
    if (v0.size() != o.v0.size()) return false;
    return std::memcmp(v0.data(), o.v0.data(), sizeof(double) * v0.size()) == 0 &&
           std::memcmp(v1.data(), o.v1.data(), sizeof(double) * v1.size()) == 0;
}

Embedding::Embedding(const LatticeSpec& spec, Eigen::VectorXd t, Eigen::VectorXd x, double margin)
    : Embedding(spec, std::move(t), std::move(x), 0.0, spec.length(), margin) {}

Embedding::Embedding(const LatticeSpec& spec, Eigen::VectorXd t, Eigen::VectorXd x, double wrap_t,
                     double wrap_x, double margin)
    : spec_(spec), t_(std::move(t)), x_(std::move(x)), wrap_t_(wrap_t), wrap_x_(wrap_x) {
    spec_.validate();
    if (t_.size() != spec_.n_sites || x_.size() != spec_.n_sites)
        throw DimensionMismatch("embedding has " + std::to_string(t_.size()) + " samples, lattice has " +
                                std::to_string(spec_.n_sites));
    if (!spec_.periodic()) wrap_t_ = wrap_x_ = 0.0;
    margin_ = margin < 0.0 ? 1e-8 * spec_.spacing : margin;
    if (!t_.allFinite() || !x_.allFinite()) throw InvalidEmbedding("non-finite coordinates");
    check_spacelike();
}

void Embedding::check_spacelike() const {
    const int n = size();
    auto link = [&](double dT, double dX, int i) {
        if (!(dX - std::abs(dT) > margin_)) {
            char buf[160];
            std::snprintf(buf, sizeof buf, "link %d: dX=%.3e dT=%.3e", i, dX, dT);
            throw NotSpacelike(buf);
        }
    };
    for (int i = 0; i + 1 < n; ++i) link(t_[i + 1] - t_[i], x_[i + 1] - x_[i], i);
    if (spec_.periodic()) link(t_[0] + wrap_t_ - t_[n - 1], x_[0] + wrap_x_ - x_[n - 1], n - 1);
}

Embedding Embedding::flat(const LatticeSpec& spec, double t) {
    return Embedding(spec, Eigen::VectorXd::Constant(spec.n_sites, t), spec.labels());
}

std::string Embedding::id() const {
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&](const void* p, std::size_t n) {
        auto* b = static_cast<const unsigned char*>(p);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= b[i];
            h *= 1099511628211ull;
        }
    };
    mix(&spec_.n_sites, sizeof spec_.n_sites);
    mix(&spec_.spacing, sizeof spec_.spacing);
    mix(&wrap_t_, sizeof wrap_t_);
    mix(&wrap_x_, sizeof wrap_x_);
    mix(t_.data(), sizeof(double) * t_.size());
    mix(x_.data(), sizeof(double) * x_.size());
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

bool Embedding::same_geometry(const Embedding& o) const {
    return spec_ == o.spec_ && wrap_t_ == o.wrap_t_ && wrap_x_ == o.wrap_x_ && t_ == o.t_ && x_ == o.x_;
}

bool Embedding::is_affine(double tol) const {
    Tangent d2 = second_derivative(*this);
    Tangent d1 = tangent(*this);
    double scale = std::max(d1.dt.cwiseAbs().maxCoeff(), d1.dx.cwiseAbs().maxCoeff());
    double h = spec_.spacing;
    return d2.dt.cwiseAbs().maxCoeff() * h <= tol * scale && d2.dx.cwiseAbs().maxCoeff() * h <= tol * scale;
}

namespace {

Eigen::VectorXd d1(const LatticeSpec& s, const Eigen::VectorXd& f, double wrap) {
    const int n = s.n_sites;
    const double h = s.spacing;
    Eigen::VectorXd d(n);
    for (int i = 1; i + 1 < n; ++i) d[i] = (f[i + 1] - f[i - 1]) / (2 * h);
    if (s.periodic()) {
        d[0] = (f[1] - (f[n - 1] - wrap)) / (2 * h);
        d[n - 1] = ((f[0] + wrap) - f[n - 2]) / (2 * h);
    } else {
        d[0] = (-3 * f[0] + 4 * f[1] - f[2]) / (2 * h);
        d[n - 1] = (3 * f[n - 1] - 4 * f[n - 2] + f[n - 3]) / (2 * h);
    }
    return d;
}

// Second differences at the rounding level of the samples are set to zero so
// that affine embeddings have exactly vanishing curvature.
double snap(double num, double scale) {
    return std::abs(num) <= 16.0 * std::numeric_limits<double>::epsilon() * scale ? 0.0 : num;
}

Eigen::VectorXd d2(const LatticeSpec& s, const Eigen::VectorXd& f, double wrap) {
    const int n = s.n_sites;
    const double h2 = s.spacing * s.spacing;
    Eigen::VectorXd d(n);
    auto c3 = [&](double a, double b, double c) {
        return snap(a - 2 * b + c, std::abs(a) + 2 * std::abs(b) + std::abs(c)) / h2;
    };
    for (int i = 1; i + 1 < n; ++i) d[i] = c3(f[i + 1], f[i], f[i - 1]);
    if (s.periodic()) {
        d[0] = c3(f[1], f[0], f[n - 1] - wrap);
        d[n - 1] = c3(f[0] + wrap, f[n - 1], f[n - 2]);
    } else {
        auto c4 = [&](double a, double b, double c, double e) {
            return snap(2 * a - 5 * b + 4 * c - e, 2 * std::abs(a) + 5 * std::abs(b) + 4 * std::abs(c) + std::abs(e)) /
                   h2;
        };
        d[0] = c4(f[0], f[1], f[2], f[3]);
        d[n - 1] = c4(f[n - 1], f[n - 2], f[n - 3], f[n - 4]);
    }
    return d;
}

}  // namespace

Tangent tangent(const Embedding& e) {
    return {d1(e.spec(), e.t(), e.wrap_t()), d1(e.spec(), e.x(), e.wrap_x())};
}

Tangent second_derivative(const Embedding& e) {
    return {d2(e.spec(), e.t(), e.wrap_t()), d2(e.spec(), e.x(), e.wrap_x())};
}

Eigen::VectorXd induced_metric(const Embedding& e) {
    Tangent d = tangent(e);
    Eigen::VectorXd g = d.dx.array().square() - d.dt.array().square();
    for (int i = 0; i < g.size(); ++i)
        if (!(g[i] > 0.0)) throw NotSpacelike("gamma <= 0 at site " + std::to_string(i));
    return g;
}

DeformationVector unit_normal(const Embedding& e) {
    Tangent d = tangent(e);
    Eigen::VectorXd sg = induced_metric(e).cwiseSqrt();
    return {d.dx.cwiseQuotient(sg), d.dt.cwiseQuotient(sg)};
}

DeformationVector unit_conormal(const Embedding& e) {
    Tangent d = tangent(e);
    Eigen::VectorXd sg = induced_metric(e).cwiseSqrt();
    return {d.dx.cwiseQuotient(sg), (-d.dt).cwiseQuotient(sg)};
}

Eigen::VectorXd extrinsic_curvature_trace(const Embedding& e) {
    if (e.size() < 5) throw InvalidEmbedding("curvature needs at least 5 sites");
    Tangent d = tangent(e);
    Tangent dd = second_derivative(e);
    Eigen::VectorXd g = induced_metric(e);
    Eigen::VectorXd k(e.size());
    for (int i = 0; i < e.size(); ++i) {
        double sg = std::sqrt(g[i]);
        double n0 = d.dx[i] / sg, n1 = d.dt[i] / sg;
        // n_mu X''^mu with n_mu = (-n^0, n^1)
        k[i] = -(-n0 * dd.dt[i] + n1 * dd.dx[i]) / g[i];
    }
    return k;
}

LapseShift lapse_shift(const Embedding& e, const DeformationVector& v) {
    if (v.size() != e.size()) throw DimensionMismatch("deformation vector length");
    Tangent d = tangent(e);
    Eigen::VectorXd g = induced_metric(e);
    Eigen::VectorXd sg = g.cwiseSqrt();
    LapseShift ls;
    ls.lapse = (d.dx.cwiseProduct(v.v0) - d.dt.cwiseProduct(v.v1)).cwiseQuotient(sg);
    ls.shift = (d.dx.cwiseProduct(v.v1) - d.dt.cwiseProduct(v.v0)).cwiseQuotient(g);
    return ls;
}

Embedding translate(const Embedding& e, const DeformationVector& v, double s) {
    if (v.size() != e.size()) throw DimensionMismatch("deformation vector length");
    std::shared_ptr<const Embedding> base;
    double total = s;
    if (e.orbit() && e.orbit()->v == v) {
        base = e.orbit()->base;
        total = e.orbit()->s + s;
    } else {
        base = std::make_shared<const Embedding>(e.spec(), e.t(), e.x(), e.wrap_t(), e.wrap_x(), e.margin());
    }
    Eigen::VectorXd t(e.size()), x(e.size());
    for (int i = 0; i < e.size(); ++i) {
        t[i] = base->t()[i] + total * v.v0[i];
        x[i] = base->x()[i] + total * v.v1[i];
    }
    Embedding out(e.spec(), std::move(t), std::move(x), base->wrap_t(), base->wrap_x(), e.margin());
    out.orbit_ = Embedding::Orbit{base, v, total};
    return out;
}

Embedding boost(const Embedding& e, double w) {
    const double c = std::cosh(w), s = std::sinh(w);
    Eigen::VectorXd t = c * e.t() - s * e.x();
    Eigen::VectorXd x = c * e.x() - s * e.t();
    double wt = c * e.wrap_t() - s * e.wrap_x();
    double wx = c * e.wrap_x() - s * e.wrap_t();
    return Embedding(e.spec(), std::move(t), std::move(x), wt, wx, e.margin());
}

Embedding special_conformal(const Embedding& e, double alpha, double beta_eps) {
    if (e.spec().periodic()) throw InvalidEmbedding("special conformal map needs a fixed-zero lattice");
    if (!(alpha > 0.0)) throw InvalidEmbedding("acceleration must be positive");
    const int n = e.size();
    Eigen::VectorXd t(n), x(n);
    for (int i = 0; i < n; ++i) {
        const double T = e.t()[i], X = e.x()[i];
        const double xx = -T * T + X * X;
        const double beta = 2.0 * X / alpha - xx / (alpha * alpha);
        if (std::abs(beta) < beta_eps) {
            char buf[96];
            std::snprintf(buf, sizeof buf, "beta=%.3e at site %d", beta, i);
            throw SingularConformalMap(buf);
        }
        t[i] = T / beta;
        x[i] = (X - xx / alpha) / beta;
    }
    bool reversed = n > 1;
    for (int i = 0; i + 1 < n && reversed; ++i) reversed = x[i + 1] < x[i];
    if (reversed) {
        t.reverseInPlace();
        x.reverseInPlace();
    }
    return Embedding(e.spec(), std::move(t), std::move(x), e.margin());
}

Embedding interpolate(const Embedding& e, const Embedding& f, double s, double margin) {
    if (!e.spec().same_lattice(f.spec())) throw DimensionMismatch("embeddings live on different lattices");
    Eigen::VectorXd t = e.t() + s * (f.t() - e.t());
    Eigen::VectorXd x = e.x() + s * (f.x() - e.x());
    double wt = e.wrap_t() + s * (f.wrap_t() - e.wrap_t());
    double wx = e.wrap_x() + s * (f.wrap_x() - e.wrap_x());
    return Embedding(e.spec(), std::move(t), std::move(x), wt, wx, margin < 0 ? e.margin() : margin);
}

DeformationVector difference(const Embedding& e, const Embedding& f) {
    if (!e.spec().same_lattice(f.spec())) throw DimensionMismatch("embeddings live on different lattices");
    return {f.t() - e.t(), f.x() - e.x()};
}

}  // namespace pft
