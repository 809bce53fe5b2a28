#include "pft/foliation.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>

#include "pft/errors.hpp"

namespace pft {

StepDecomposition decompose_unchecked(const Embedding& a, const Embedding& b, double dt) {
    if (!(dt > 0.0)) throw DegenerateInput("step length must be positive");
    Embedding mid = interpolate(a, b, 0.5);
    DeformationVector t = difference(a, b);
    t.v0 /= dt;
    t.v1 /= dt;
    LapseShift ls = lapse_shift(mid, t);
    DeformationVector n = unit_normal(mid);
    Tangent d = tangent(mid);
    StepDecomposition out{ls.lapse, ls.shift, 0.0};
    for (int i = 0; i < a.size(); ++i) {
        double r0 = ls.lapse[i] * n.v0[i] + ls.shift[i] * d.dt[i] - t.v0[i];
        double r1 = ls.lapse[i] * n.v1[i] + ls.shift[i] * d.dx[i] - t.v1[i];
        out.residual = std::max({out.residual, std::abs(r0), std::abs(r1)});
    }
    return out;
}

void Foliation::init(std::vector<Embedding> leaves, std::vector<double> times) {
    if (leaves.size() < 2) throw DegenerateInput("a foliation needs at least two leaves");
    if (leaves.size() != times.size()) throw DimensionMismatch("leaves and times differ in length");
    for (std::size_t k = 1; k < times.size(); ++k)
        if (!(times[k] > times[k - 1])) throw DegenerateInput("times must increase strictly");
    for (auto& l : leaves)
        if (!l.spec().same_lattice(leaves.front().spec())) throw DimensionMismatch("leaves on different lattices");
    leaves_ = std::move(leaves);
    times_ = std::move(times);
    for (int k = 0; k < n_steps(); ++k) {
        auto d = decompose_unchecked(leaves_[k], leaves_[k + 1], times_[k + 1] - times_[k]);
        if (!(d.lapse.minCoeff() > 0.0)) bad_steps_.push_back(k);
    }
}

Foliation::Foliation(std::vector<Embedding> leaves, std::vector<double> times) {
    init(std::move(leaves), std::move(times));
    if (!bad_steps_.empty()) {
        const int k = bad_steps_.front();
        auto d = decompose_unchecked(leaves_[k], leaves_[k + 1], times_[k + 1] - times_[k]);
        char buf[128];
        std::snprintf(buf, sizeof buf, "step %d: min lapse %.3e", k, d.lapse.minCoeff());
        throw NonTimelikeDeformation(buf);
    }
}

Foliation Foliation::unchecked(std::vector<Embedding> leaves, std::vector<double> times) {
    Foliation f;
    f.init(std::move(leaves), std::move(times));
    return f;
}

Foliation build_inertial(const LatticeSpec& spec, double w, double t0, double t1, int n_steps) {
    if (n_steps < 1) throw DegenerateInput("n_steps must be >= 1");
    Embedding seed = boost(Embedding::flat(spec), w);
    DeformationVector v = DeformationVector::constant(spec.n_sites, std::cosh(w), -std::sinh(w));
    std::vector<Embedding> leaves;
    std::vector<double> times;
    for (int k = 0; k <= n_steps; ++k) {
        double t = t0 + (t1 - t0) * k / n_steps;
        leaves.push_back(translate(seed, v, t));
        times.push_back(t);
    }
    return Foliation(std::move(leaves), std::move(times));
}

ScheduleKind schedule_from_string(const std::string& s) {
    if (s == "linear") return ScheduleKind::Linear;
    if (s == "smoothstep") return ScheduleKind::Smoothstep;
    if (s == "bump") return ScheduleKind::Bump;
    throw DegenerateInput("unknown schedule '" + s + "'");
}

namespace {

// Site-dependent fraction f(s, x) = s + A sin(pi s) exp(-((x - c)/w)^2) for
// the bump schedule; identical endpoints therefore give identical leaves.
Embedding leaf_at(const Embedding& a, const Embedding& b, const Schedule& sc, double s) {
    double f = s;
    if (sc.kind == ScheduleKind::Smoothstep) f = s * s * (3.0 - 2.0 * s);
    if (sc.kind != ScheduleKind::Bump || sc.amplitude == 0.0) return interpolate(a, b, f);
    const Eigen::VectorXd lab = a.spec().labels();
    const double lift = sc.amplitude * std::sin(std::numbers::pi * s);
    Eigen::VectorXd t(a.size()), x(a.size());
    for (int i = 0; i < a.size(); ++i) {
        const double u = (lab[i] - sc.centre) / sc.width;
        const double fi = s + lift * std::exp(-u * u);
        t[i] = a.t()[i] + fi * (b.t()[i] - a.t()[i]);
        x[i] = a.x()[i] + fi * (b.x()[i] - a.x()[i]);
    }
    return Embedding(a.spec(), std::move(t), std::move(x), a.wrap_t() + s * (b.wrap_t() - a.wrap_t()),
                     a.wrap_x() + s * (b.wrap_x() - a.wrap_x()), a.margin());
}

}  // namespace

Foliation build_interpolating(const Embedding& a, const Embedding& b, const Schedule& sc, int n_steps) {
    if (n_steps < 1) throw DegenerateInput("n_steps must be >= 1");
    if (!a.spec().same_lattice(b.spec())) throw DimensionMismatch("endpoints on different lattices");
    std::vector<Embedding> leaves;
    std::vector<double> times;
    for (int k = 0; k <= n_steps; ++k) {
        double s = static_cast<double>(k) / n_steps;
        if (k == n_steps) leaves.push_back(b);
        else if (k == 0) leaves.push_back(a);
        else leaves.push_back(leaf_at(a, b, sc, s));
        times.push_back(s);
    }
    // Identical endpoints give a static family with zero lapse; it is kept,
    // flagged as non-foliating.
    if (a.same_geometry(b)) return Foliation::unchecked(std::move(leaves), std::move(times));
    return Foliation(std::move(leaves), std::move(times));
}

int default_step_count(const Embedding& a, const Embedding& b, const Schedule& sc) {
    double change = std::max((b.t() - a.t()).cwiseAbs().maxCoeff(), (b.x() - a.x()).cwiseAbs().maxCoeff());
    if (sc.kind == ScheduleKind::Smoothstep) change *= 1.5;
    if (sc.kind == ScheduleKind::Bump) change *= 1.0 + std::numbers::pi * std::abs(sc.amplitude);
    const int n = static_cast<int>(std::ceil(change / (0.1 * a.spec().spacing)));
    return std::max(n, 1);
}

StepDecomposition decompose_deformation(const Foliation& fol, int k) {
    if (k < 0 || k >= fol.n_steps()) throw DegenerateInput("step index out of range");
    auto d = decompose_unchecked(fol.leaves()[k], fol.leaves()[k + 1], fol.times()[k + 1] - fol.times()[k]);
    if (!(d.lapse.minCoeff() > 0.0)) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "step %d: min lapse %.3e", k, d.lapse.minCoeff());
        throw NonTimelikeDeformation(buf);
    }
    return d;
}

}  // namespace pft
