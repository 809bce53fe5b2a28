#include <algorithm>
#include <array>
#include <limits>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "pft/bogoliubov.hpp"
#include "pft/errors.hpp"
#include "pft/evolve.hpp"
#include "pft/foliation.hpp"
#include "pft/hamiltonian.hpp"
#include "pft/io.hpp"
#include "pft/qrf.hpp"
#include "pft/relational.hpp"
#include "pft/runner.hpp"

namespace pft {

namespace {

constexpr double kPi = std::numbers::pi;

json lattice_json(int n, double dx, double m, const char* boundary) {
    return json{{"n_sites", n}, {"spacing", dx}, {"mass", m}, {"boundary", boundary}};
}

double num(const ExperimentConfig& c, const char* key) { return c.params.at(key).get<double>(); }
int integer(const ExperimentConfig& c, const char* key) { return c.params.at(key).get<int>(); }
std::vector<double> numbers(const ExperimentConfig& c, const char* key) {
    return c.params.at(key).get<std::vector<double>>();
}

void require(bool ok, const std::string& key, const std::string& what) {
    if (!ok) throw ConfigError("params." + key + ": " + what);
}

/// Coarsened copies of the configured lattice at fixed length: n / 2^j.
std::vector<LatticeSpec> refinement_levels(const LatticeSpec& fine, int levels) {
    require(levels >= 2, "levels", "need at least two levels");
    std::vector<LatticeSpec> out;
    const double length = fine.length();
    for (int l = 0; l < levels; ++l) {
        const int div = 1 << (levels - 1 - l);
        require(fine.n_sites % div == 0 && fine.n_sites / div >= 8, "levels",
                "lattice.n_sites must stay divisible and >= 8 on every level");
        LatticeSpec s = fine;
        s.n_sites = fine.n_sites / div;
        s.spacing = length / s.n_sites;
        out.push_back(s);
    }
    return out;
}

Eigen::VectorXd gaussian(const Eigen::VectorXd& x, double centre, double width) {
    return (-((x.array() - centre) / width).square()).exp();
}

Embedding bump_slice(const LatticeSpec& spec, double t0, double amplitude, double width, double centre = 0.0) {
    Embedding flat = Embedding::flat(spec, t0);
    Eigen::VectorXd t = flat.t() + amplitude * gaussian(spec.labels(), centre, width);
    return Embedding(spec, t, flat.x(), flat.wrap_t(), flat.wrap_x());
}

double max_abs(const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

void order_check(ExperimentOutput& out, const std::string& name, double measured, double nominal) {
    out.metrics[name] = measured;
    out.check(name, measured, ">=", nominal - kOrderResolution);
}

// ---------------------------------------------------------------------------

void run_schrodinger(const ExperimentConfig& c, const RunOptions& opt, ExperimentOutput& out) {
    const double sigma = num(c, "packet_sigma"), amp = num(c, "packet_amplitude"), tf = num(c, "t_final");
    const double ratio = num(c, "dt_ratio");
    const int refine = integer(c, "oracle_refinement");
    require(refine >= 2, "oracle_refinement", "must be >= 2");
    require(tf > 0.0 && ratio > 0.0 && sigma > 0.0, "t_final", "t_final, dt_ratio and packet_sigma must be positive");
    auto levels = refinement_levels(c.lattice, integer(c, "levels"));
    const int nl = static_cast<int>(levels.size());
    std::vector<double> err(nl), dts(nl);
    std::vector<int> steps(nl);
    std::vector<Eigen::VectorXd> finals(nl), oracles(nl);
    parallel_for(nl, opt.threads, [&](int l) {
        const LatticeSpec& s = levels[l];
        const int n = s.n_sites;
        steps[l] = static_cast<int>(std::ceil(tf / (ratio * s.spacing) - 1e-9));
        dts[l] = tf / steps[l];
        Embedding e = Embedding::flat(s);
        Eigen::VectorXd phi = amp * (-0.5 * (s.labels().array() / sigma).square()).exp();
        GaussianState st = GaussianState::vacuum(s, e).displaced(phi, Eigen::VectorXd::Zero(n));
        GaussianState fin = evolve_foliation(st, build_inertial(s, 0.0, 0.0, tf, steps[l]));
        LatticeSpec f = s;
        f.n_sites = n * refine;
        f.spacing = s.spacing / refine;
        Eigen::VectorXd phif = amp * (-0.5 * (f.labels().array() / sigma).square()).exp();
        Eigen::VectorXd ref = classical_leapfrog(f, phif, Eigen::VectorXd::Zero(f.n_sites), tf, steps[l] * refine);
        Eigen::VectorXd sampled(n);
        for (int i = 0; i < n; ++i) sampled[i] = ref[i * refine];
        finals[l] = fin.mean.head(n);
        oracles[l] = sampled;
        err[l] = max_abs(finals[l] - sampled);
    });
    std::ostringstream conv;
    conv << "n_sites,dx,dt,steps,max_error\n";
    std::vector<double> hs;
    for (int l = 0; l < nl; ++l) {
        conv << levels[l].n_sites << ',' << fmt(levels[l].spacing) << ',' << fmt(dts[l]) << ',' << steps[l] << ','
             << fmt(err[l]) << '\n';
        hs.push_back(levels[l].spacing);
    }
    out.add_file("convergence.csv", conv.str());
    std::ostringstream mf;
    mf << "site,x_label,mean_phi,oracle_phi\n";
    const LatticeSpec& fine = levels.back();
    for (int i = 0; i < fine.n_sites; ++i)
        mf << i << ',' << fmt(fine.label(i)) << ',' << fmt(finals.back()[i]) << ',' << fmt(oracles.back()[i]) << '\n';
    out.add_file("mean_field.csv", mf.str());
    out.check("max_error_finest", err.back(), "<=", num(c, "tolerance"));
    order_check(out, "convergence_order", fit_order(hs, err), num(c, "min_order"));
}

struct FoliationSetup {
    Embedding x1, x2;
    Schedule bump;
    int steps;
    double dt;
};

FoliationSetup foliation_setup(const ExperimentConfig& c, const LatticeSpec& s) {
    const double tau = num(c, "tau");
    require(tau > 0.0, "tau", "must be positive");
    const double dt = num(c, "dt") * c.lattice.n_sites / s.n_sites;
    const int steps = static_cast<int>(std::lround(tau / dt));
    require(steps >= 1, "dt", "must be smaller than tau");
    Embedding x1 = Embedding::flat(s);
    Embedding x2 = bump_slice(s, tau, num(c, "end_bump"), num(c, "bump_width"), num(c, "bump_centre"));
    Schedule b{ScheduleKind::Bump, num(c, "bump_amplitude"), num(c, "bump_width"), num(c, "bump_centre")};
    return {x1, x2, b, steps, tau / steps};
}

void run_foliation_independence(const ExperimentConfig& c, const RunOptions& opt, ExperimentOutput& out) {
    auto levels = refinement_levels(c.lattice, integer(c, "levels"));
    const int nl = static_cast<int>(levels.size());
    std::vector<double> dist(nl), purity(nl), dts(nl), norm(nl);
    std::vector<int> steps(nl);
    parallel_for(nl, opt.threads, [&](int l) {
        const LatticeSpec& s = levels[l];
        FoliationSetup f = foliation_setup(c, s);
        GaussianState st = GaussianState::vacuum(s, f.x1);
        EvolveDiagnostics da, db;
        GaussianState a = evolve_foliation(st, build_interpolating(f.x1, f.x2, Schedule{}, f.steps), {}, &da);
        GaussianState b = evolve_foliation(st, build_interpolating(f.x1, f.x2, f.bump, f.steps), {}, &db);
        dist[l] = max_abs_distance(a.cov, b.cov);
        purity[l] = std::max(a.purity_defect(), b.purity_defect());
        norm[l] = std::max(da.max_step_norm, db.max_step_norm);
        steps[l] = f.steps;
        dts[l] = f.dt;
    });
    std::ostringstream csv;
    csv << "n_sites,dx,dt,steps,covariance_distance,purity_defect,max_step_norm\n";
    std::vector<double> hs;
    for (int l = 0; l < nl; ++l) {
        csv << levels[l].n_sites << ',' << fmt(levels[l].spacing) << ',' << fmt(dts[l]) << ',' << steps[l] << ','
            << fmt(dist[l]) << ',' << fmt(purity[l]) << ',' << fmt(norm[l]) << '\n';
        hs.push_back(levels[l].spacing);
    }
    out.add_file("distances.csv", csv.str());
    out.metrics["pairwise_orders"] = json::array();
    for (int l = 0; l + 1 < nl; ++l)
        out.metrics["pairwise_orders"].push_back(std::log(dist[l] / dist[l + 1]) / std::log(hs[l] / hs[l + 1]));
    out.check("distance_finest", dist.back(), "<=", num(c, "tolerance"));
    order_check(out, "convergence_order", fit_order(hs, dist), num(c, "min_order"));
    out.check("purity_defect", *std::max_element(purity.begin(), purity.end()), "<=", 1e-8);
}

void run_dual_path(const ExperimentConfig& c, const RunOptions& opt, ExperimentOutput& out) {
    auto levels = refinement_levels(c.lattice, integer(c, "levels"));
    const int nl = static_cast<int>(levels.size());
    std::vector<double> dist(nl), dist_linear(nl), dts(nl);
    std::vector<int> steps(nl);
    parallel_for(nl, opt.threads, [&](int l) {
        const LatticeSpec& s = levels[l];
        FoliationSetup f = foliation_setup(c, s);
        Eigen::VectorXd phi = num(c, "packet_amplitude") * gaussian(s.labels(), 0.0, num(c, "packet_sigma"));
        GaussianState st = GaussianState::vacuum(s, f.x1).displaced(phi, Eigen::VectorXd::Zero(s.n_sites));
        FrameChangeOptions fo;
        fo.substeps = f.steps;
        GaussianState shot = frame_change_unitary(s, f.x1, f.x2, fo).apply(st, f.x2.id());
        GaussianState path = evolve_foliation(st, build_interpolating(f.x1, f.x2, f.bump, f.steps));
        GaussianState lin = evolve_foliation(st, build_interpolating(f.x1, f.x2, Schedule{}, f.steps));
        auto d = [](const GaussianState& a, const GaussianState& b) {
            return std::max(max_abs(a.mean - b.mean), max_abs_distance(a.cov, b.cov));
        };
        dist[l] = d(shot, path);
        dist_linear[l] = d(shot, lin);
        steps[l] = f.steps;
        dts[l] = f.dt;
    });
    std::ostringstream csv;
    csv << "n_sites,dx,dt,steps,distance_bump_foliation,distance_linear_foliation\n";
    std::vector<double> hs;
    for (int l = 0; l < nl; ++l) {
        csv << levels[l].n_sites << ',' << fmt(levels[l].spacing) << ',' << fmt(dts[l]) << ',' << steps[l] << ','
            << fmt(dist[l]) << ',' << fmt(dist_linear[l]) << '\n';
        hs.push_back(levels[l].spacing);
    }
    out.add_file("dual_path.csv", csv.str());
    out.metrics["convergence_order"] = fit_order(hs, dist);
    out.metrics["linear_foliation_distance_finest"] = dist_linear.back();
    out.check("distance_finest", dist.back(), "<=", num(c, "tolerance"));
}

void run_boost_vacuum(const ExperimentConfig& c, const RunOptions& opt, ExperimentOutput& out) {
    const double w = num(c, "rapidity");
    const int nlev = integer(c, "levels");
    require(nlev >= 2, "levels", "need at least two levels");
    // spacing shrinks as 1/sqrt(N): both the resolution and the box grow
    std::vector<LatticeSpec> levels;
    for (int l = 0; l < nlev; ++l) {
        const int div = 1 << (nlev - 1 - l);
        require(c.lattice.n_sites % div == 0 && c.lattice.n_sites / div >= 8, "levels",
                "lattice.n_sites must stay divisible and >= 8 on every level");
        LatticeSpec s = c.lattice;
        s.n_sites = c.lattice.n_sites / div;
        s.spacing = c.lattice.spacing * std::sqrt(static_cast<double>(div));
        levels.push_back(s);
    }
    const double kcut = kPi * num(c, "k_cut_factor") / c.lattice.spacing;
    std::vector<double> maxn(nlev), unit(nlev), sym(nlev);
    std::vector<std::vector<std::pair<double, double>>> modes(nlev);
    parallel_for(nlev, opt.threads, [&](int l) {
        const LatticeSpec& s = levels[l];
        Embedding e = Embedding::flat(s);
        Embedding eb = boost(e, w);
        ModeFrame moved = transport_frame(flat_mode_frame(s, eb), frame_change_unitary(s, eb, e), e);
        BogoliubovMap m = bogoliubov_between(moved, flat_mode_frame(s, e), e);
        unit[l] = m.unitarity_violation;
        sym[l] = m.symmetry_violation;
        for (int k = 0; k < m.cols(); ++k)
            if (std::abs(moved.k[k]) <= kcut) {
                const double n = expected_number(m, k);
                modes[l].emplace_back(moved.k[k], n);
                maxn[l] = std::max(maxn[l], n);
            }
    });
    std::ostringstream lv, md;
    lv << "n_sites,dx,length,max_particle_number,unitarity_violation,symmetry_violation\n";
    md << "n_sites,k,particle_number\n";
    int increases = 0;
    for (int l = 0; l < nlev; ++l) {
        lv << levels[l].n_sites << ',' << fmt(levels[l].spacing) << ',' << fmt(levels[l].length()) << ','
           << fmt(maxn[l]) << ',' << fmt(unit[l]) << ',' << fmt(sym[l]) << '\n';
        for (const auto& [k, n] : modes[l]) md << levels[l].n_sites << ',' << fmt(k) << ',' << fmt(n) << '\n';
        if (l > 0 && !(maxn[l] < maxn[l - 1])) ++increases;
    }
    out.add_file("boost_levels.csv", lv.str());
    out.add_file("boost_modes.csv", md.str());
    out.metrics["k_cut"] = kcut;
    out.check("non_decreasing_refinements", increases, "==", 0);
    out.check("max_particle_number_finest", maxn.back(), "<=", num(c, "tolerance"));
}

void run_quench(const ExperimentConfig& c, const RunOptions&, ExperimentOutput& out) {
    const LatticeSpec& s = c.lattice;
    LatticeSpec s2 = s;
    s2.mass = num(c, "mass_to");
    require(s2.mass >= 0.0 && s2.mass != s.mass, "mass_to", "must be nonnegative and differ from lattice.mass");
    Embedding e = Embedding::flat(s);
    ModeFrame from = flat_mode_frame(s, e), to = flat_mode_frame(s2, e);
    BogoliubovMap m = bogoliubov_between(to, from, e);
    std::ostringstream q;
    q << "mode,k,omega_from,omega_to,n_numeric,n_oracle\n";
    double worst = 0.0;
    for (int k = 0; k < m.cols(); ++k) {
        const double w1 = lattice_omega(s, to.k[k]), w2 = lattice_omega(s2, to.k[k]);
        const double oracle = (w1 - w2) * (w1 - w2) / (4 * w1 * w2);
        const double n = expected_number(m, k);
        worst = std::max(worst, std::abs(n - oracle));
        q << k << ',' << fmt(to.k[k]) << ',' << fmt(w1) << ',' << fmt(w2) << ',' << fmt(n) << ',' << fmt(oracle) << '\n';
    }
    out.add_file("quench_modes.csv", q.str());
    std::ostringstream bq;
    write_bogoliubov_csv(bq, m);
    out.add_file("quench_bogoliubov.csv", bq.str());

    Embedding curved = bump_slice(s, 0.0, num(c, "curved_amplitude"), num(c, "curved_width"));
    Propagator p = frame_change_unitary(s, e, curved);
    BogoliubovMap mc = bogoliubov_between(transport_frame(to, p, curved), transport_frame(from, p, curved), curved);
    std::ostringstream cq;
    cq << "mode,k,n_curved,n_flat\n";
    double drift = 0.0;
    for (int k = 0; k < mc.cols(); ++k) {
        cq << k << ',' << fmt(to.k[k]) << ',' << fmt(expected_number(mc, k)) << ',' << fmt(expected_number(m, k)) << '\n';
        drift = std::max(drift, std::abs(expected_number(mc, k) - expected_number(m, k)));
    }
    out.add_file("curved_modes.csv", cq.str());
    out.metrics["retained_modes"] = m.retained.size();
    out.metrics["curved_transport_number_change"] = drift;
    const double tol = num(c, "canonical_tolerance");
    out.check("quench_unitarity", m.unitarity_violation, "<=", tol);
    out.check("quench_symmetry", m.symmetry_violation, "<=", tol);
    out.check("curved_unitarity", mc.unitarity_violation, "<=", tol);
    out.check("curved_symmetry", mc.symmetry_violation, "<=", tol);
    out.check("quench_oracle_error", worst, "<=", num(c, "oracle_tolerance"));
}

EmbeddingEnsemble random_ensemble(const LatticeSpec& s, std::mt19937_64& rng, int max_members, EnsembleFamily& fam) {
    std::uniform_int_distribution<int> pick(0, 2), count(2, std::max(2, max_members));
    std::uniform_real_distribution<double> u(0.0, 1.0);
    fam = std::array{EnsembleFamily::TimeTranslation, EnsembleFamily::Boost, EnsembleFamily::MassQuench}[pick(rng)];
    const int m = count(rng);
    std::vector<double> params, weights;
    for (int q = 0; q < m; ++q) {
        double p = u(rng);
        switch (fam) {
            case EnsembleFamily::TimeTranslation: p = 2.0 * p; break;
            case EnsembleFamily::Boost: p = 0.6 * p - 0.3; break;
            default: p = 0.5 + 2.5 * p; break;
        }
        params.push_back(p);
        weights.push_back(0.1 + u(rng));
    }
    return make_ensemble(s, fam, params, weights);
}

void run_qrf(const ExperimentConfig& c, const RunOptions& opt, ExperimentOutput& out) {
    const LatticeSpec& s = c.lattice;
    Embedding xb = Embedding::flat(s);
    ModeFrame fb = flat_mode_frame(s, xb);
    const int nk = fb.size();
    EnsembleFamily family = ensemble_family_from_string(c.params.at("family").get<std::string>());
    EmbeddingEnsemble ens = make_ensemble(s, family, numbers(c, "parameters"), numbers(c, "weights"));

    std::vector<BogoliubovMap> maps(ens.size());
    parallel_for(ens.size(), opt.threads, [&](int q) { maps[q] = member_bogoliubov(ens.members()[q], fb, xb); });
    std::ostringstream csv;
    csv << "mode,k,smeared_n,transformed_n,branch,branch_parameter,branch_n,weight\n";
    double min_n = std::numeric_limits<double>::infinity(), total = 0.0, gap = 0.0;
    for (int k = 0; k < nk; ++k) {
        const double sn = smeared_particle_number(maps, ens, k);
        const double tn = transformed_number_expectation(maps, ens, fb, k);
        gap = std::max(gap, std::abs(sn - tn));
        min_n = std::min(min_n, sn);
        total += sn;
        for (int q = 0; q < ens.size(); ++q)
            csv << k << ',' << fmt(fb.k[k]) << ',' << fmt(sn) << ',' << fmt(tn) << ',' << q << ','
                << fmt(ens.members()[q].parameter) << ',' << fmt(expected_number(maps[q], k)) << ','
                << fmt(ens.weight(q)) << '\n';
    }
    out.add_file("qrf.csv", csv.str());
    out.metrics["total_particle_number"] = total;

    // randomized ensembles: operator route against conditional weighting
    std::mt19937_64 rng(c.seed);
    const int nr = integer(c, "random_ensembles");
    std::vector<EmbeddingEnsemble> rens;
    std::vector<EnsembleFamily> rfam(nr);
    for (int r = 0; r < nr; ++r) rens.push_back(random_ensemble(s, rng, integer(c, "max_members"), rfam[r]));
    std::vector<double> rgap(nr);
    parallel_for(nr, opt.threads, [&](int r) {
        std::vector<BogoliubovMap> rm;
        for (const auto& mem : rens[r].members()) rm.push_back(member_bogoliubov(mem, fb, xb));
        for (int k = 0; k < nk; ++k)
            rgap[r] = std::max(rgap[r], std::abs(smeared_particle_number(rm, rens[r], k) -
                                                 transformed_number_expectation(rm, rens[r], fb, k)));
    });
    std::ostringstream rc;
    rc << "ensemble,family,members,max_route_difference\n";
    for (int r = 0; r < nr; ++r) {
        rc << r << ',' << to_string(rfam[r]) << ',' << rens[r].size() << ',' << fmt(rgap[r]) << '\n';
        gap = std::max(gap, rgap[r]);
    }
    out.add_file("qrf_random.csv", rc.str());

    // delta ensembles
    const double m2 = numbers(c, "parameters").back();
    EmbeddingEnsemble delta_q = make_ensemble(s, EnsembleFamily::MassQuench, {m2}, {1.0});
    BogoliubovMap single = bogoliubov_between(member_frame(delta_q.members()[0], s, xb), fb, xb);
    double delta_gap = 0.0;
    for (int k = 0; k < nk; ++k)
        delta_gap = std::max(delta_gap, std::abs(smeared_particle_number(delta_q, fb, xb, k).total -
                                                 expected_number(single, k)));
    EmbeddingEnsemble delta_b = make_ensemble(s, EnsembleFamily::TimeTranslation, {0.0}, {1.0});
    double at_b = 0.0;
    for (int k = 0; k < nk; ++k) at_b = std::max(at_b, smeared_particle_number(delta_b, fb, xb, k).total);

    // concentration: weights (1 - d, d) over two quench frames
    const std::vector<double> ds{0.1, 0.05, 0.025, 0.0125};
    const double ma = numbers(c, "parameters").front();
    std::vector<double> dev;
    const int kc = nk / 2;
    const double n_single = expected_number(
        bogoliubov_between(member_frame(make_ensemble(s, EnsembleFamily::MassQuench, {ma}, {1.0}).members()[0], s, xb),
                           fb, xb),
        kc);
    for (double d : ds) {
        auto e2 = make_ensemble(s, EnsembleFamily::MassQuench, {ma, m2}, {1.0 - d, d});
        dev.push_back(std::abs(smeared_particle_number(e2, fb, xb, kc).total - n_single));
    }

    // branch structure of the frame change
    GaussianState vac = GaussianState::vacuum(s, xb);
    auto tt = change_frame(vac, xb, make_ensemble(s, EnsembleFamily::TimeTranslation, {0.3, 0.7}, {0.5, 0.5}));
    auto fbump = change_frame(vac, xb, make_ensemble(s, EnsembleFamily::Bump, {0.0, 0.2}, {0.5, 0.5}));
    out.metrics["time_translated_branch_phases"] = json::array({tt.branches[0].state.phase, tt.branches[1].state.phase});

    out.check("route_difference", gap, "<=", num(c, "tolerance"));
    out.check("delta_ensemble_difference", delta_gap, "==", 0.0);
    out.check("delta_at_b_particle_number", at_b, "<=", 1e-20);
    if (family == EnsembleFamily::MassQuench) out.check("min_mode_particle_number", min_n, ">", 0.0);
    order_check(out, "concentration_order", fit_order(ds, dev), 1.0);
    out.check("time_translated_branch_covariance_distance", tt.distinguishability(), "<=", 1e-10);
    out.check("bump_branch_distinguishability", fbump.distinguishability(), ">", 0.0);
}

void run_anomaly(const ExperimentConfig& c, const RunOptions& opt, ExperimentOutput& out) {
    require(c.lattice.mass == 0.0, "lattice.mass", "the anomaly is defined for m = 0");
    auto levels = refinement_levels(c.lattice, integer(c, "levels"));
    const int nl = static_cast<int>(levels.size());
    const double amp = num(c, "bump_amplitude"), width = num(c, "bump_width");
    std::vector<double> pmax(nl), it(nl), ix(nl), half(nl);
    std::vector<DeformationVector> pots(nl, DeformationVector::zero(0));
    std::vector<Eigen::VectorXd> curv(nl);
    parallel_for(nl, opt.threads, [&](int l) {
        const LatticeSpec& s = levels[l];
        Embedding e = bump_slice(s, 0.0, amp, width);
        pots[l] = anomaly_potential(s, e);
        curv[l] = extrinsic_curvature_trace(e);
        pmax[l] = std::max(max_abs(pots[l].v0), max_abs(pots[l].v1));
        it[l] = integrated_anomaly(s, e, DeformationVector::constant(s.n_sites, 1.0, 0.0));
        ix[l] = integrated_anomaly(s, e, DeformationVector::constant(s.n_sites, 0.0, 1.0));
        Eigen::VectorXd mask = (s.labels().array() < 0.0).cast<double>();
        half[l] = partial_anomaly(s, e, DeformationVector::constant(s.n_sites, 1.0, 0.0), mask);
    });
    const LatticeSpec& fine = levels.back();
    Embedding flat = Embedding::flat(fine);
    DeformationVector af = anomaly_potential(fine, flat);
    DeformationVector ab = anomaly_potential(fine, boost(flat, num(c, "rapidity")));
    std::ostringstream lv;
    lv << "n_sites,dx,max_pointwise,integrated_t,integrated_x,relative,half_support_t\n";
    std::vector<double> hs, mags;
    for (int l = 0; l < nl; ++l) {
        const double mag = std::max(std::abs(it[l]), std::abs(ix[l]));
        lv << levels[l].n_sites << ',' << fmt(levels[l].spacing) << ',' << fmt(pmax[l]) << ',' << fmt(it[l]) << ','
           << fmt(ix[l]) << ',' << fmt(mag / pmax[l]) << ',' << fmt(half[l]) << '\n';
        hs.push_back(levels[l].spacing);
        mags.push_back(mag);
    }
    out.add_file("anomaly_levels.csv", lv.str());
    std::ostringstream pw;
    pw << "site,x_label,K,A_0,A_1\n";
    for (int i = 0; i < fine.n_sites; ++i)
        pw << i << ',' << fmt(fine.label(i)) << ',' << fmt(curv.back()[i]) << ',' << fmt(pots.back().v0[i]) << ','
           << fmt(pots.back().v1[i]) << '\n';
    out.add_file("anomaly_pointwise.csv", pw.str());
    out.check("flat_pointwise_max", std::max(max_abs(af.v0), max_abs(af.v1)), "==", 0.0);
    out.check("boosted_pointwise_max", std::max(max_abs(ab.v0), max_abs(ab.v1)), "==", 0.0);
    out.check("bump_relative_integral_finest", mags.back() / pmax.back(), "<=", num(c, "relative_tolerance"));
    order_check(out, "integral_convergence_order", fit_order(hs, mags), num(c, "min_order"));
}

void run_microcausality(const ExperimentConfig& c, const RunOptions&, ExperimentOutput& out) {
    const LatticeSpec& s = c.lattice;
    const int n = s.n_sites;
    const int sep_min = integer(c, "min_separation"), max_len = integer(c, "max_support");
    require(sep_min >= 2, "min_separation", "must be >= 2 (derivative stencil width)");
    require(max_len >= 1 && 2 * max_len + 2 * sep_min <= n, "max_support", "supports do not fit on the lattice");
    Embedding e = bump_slice(s, 0.0, num(c, "bump_amplitude"), 0.125 * s.length());
    std::mt19937_64 rng(c.seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<int> len(1, max_len), start(0, n - 1);
    auto smeared = [&](int a, int l) {
        DeformationVector v = DeformationVector::zero(n);
        for (int j = 0; j < l; ++j) {
            const int i = (a + j) % n;
            v.v0[i] = 0.5 + u(rng);
            v.v1[i] = u(rng) - 0.5;
        }
        return smear_flux(s, e, v).matrix;
    };
    auto commutator_max = [&](const SpMat& a, const SpMat& b) {
        SpMat ab = a * omega_times(b);
        SpMat cm = ab + SpMat(ab.transpose());
        double mx = 0.0;
        for (int k = 0; k < cm.outerSize(); ++k)
            for (SpMat::InnerIterator i(cm, k); i; ++i) mx = std::max(mx, std::abs(i.value()));
        return mx;
    };
    const int pairs = integer(c, "pairs");
    std::ostringstream csv;
    csv << "pair,start_a,len_a,start_b,len_b,separation,max_abs_commutator\n";
    double worst = 0.0;
    for (int p = 0; p < pairs; ++p) {
        const int a = start(rng), la = len(rng), lb = len(rng);
        const int room = n - la - lb - 2 * sep_min;  // free links left once both gaps are at the minimum
        std::uniform_int_distribution<int> extra(0, room);
        const int gap = sep_min + extra(rng);
        const int b = (a + la - 1 + gap) % n;
        const int other = n - (la - 1) - (lb - 1) - gap;  // links on the far side of the ring
        const int sep = s.periodic() ? std::min(gap, other) : gap;
        if (!s.periodic() && (a + la - 1 + gap + lb - 1) >= n) {
            --p;
            continue;
        }
        const double mx = commutator_max(smeared(a, la), smeared(b, lb));
        worst = std::max(worst, mx);
        csv << p << ',' << a << ',' << la << ',' << b << ',' << lb << ',' << sep << ',' << fmt(mx) << '\n';
    }
    out.add_file("microcausality.csv", csv.str());
    int control_nonzero = 0;
    const int controls = 20;
    for (int p = 0; p < controls; ++p) {
        const int a = start(rng), la = len(rng);
        if (commutator_max(smeared(a, la), smeared((a + la) % n, 1)) > 0.0) ++control_nonzero;
    }
    out.metrics["adjacent_controls_nonzero"] = control_nonzero;
    out.check("max_abs_commutator", worst, "==", 0.0);
    out.check("adjacent_controls_nonzero", control_nonzero, "==", controls);
}

struct ResidualSeries {
    std::vector<double> eps, res;
};

std::vector<double> eps_sequence(const ExperimentConfig& c) {
    const double e0 = num(c, "eps_start");
    const int n = integer(c, "eps_count");
    require(e0 > 0.0, "eps_start", "must be positive");
    require(n >= integer(c, "fit_points") && integer(c, "fit_points") >= 2, "eps_count", "need >= fit_points >= 2");
    std::vector<double> out;
    for (int i = 0; i < n; ++i) out.push_back(e0 * std::pow(0.5, i));
    return out;
}

void residual_report(const ExperimentConfig& c, const ResidualSeries& r, const std::string& file, ExperimentOutput& out) {
    std::ostringstream csv;
    csv << "eps,residual\n";
    for (std::size_t i = 0; i < r.eps.size(); ++i) csv << fmt(r.eps[i]) << ',' << fmt(r.res[i]) << '\n';
    out.add_file(file, csv.str());
    const int fp = integer(c, "fit_points");
    std::vector<double> he(r.eps.begin(), r.eps.begin() + fp), hr(r.res.begin(), r.res.begin() + fp);
    const double floor = *std::min_element(r.res.begin(), r.res.end());
    out.metrics["noise_floor"] = floor;
    order_check(out, "convergence_order", fit_order(he, hr), num(c, "min_order"));
    out.check("noise_floor", floor, "<=", num(c, "noise_floor"));
}

PhysicalFamily packet_family(const ExperimentConfig& c, const Embedding& emb) {
    const LatticeSpec& s = c.lattice;
    Embedding flat = Embedding::flat(s);
    Eigen::VectorXd phi = num(c, "packet_amplitude") * gaussian(s.labels(), 0.0, 0.125 * s.length());
    GaussianState st = GaussianState::vacuum(s, flat).displaced(phi, Eigen::VectorXd::Zero(s.n_sites));
    PhysicalFamily base(flat, st);
    return reduce_inverse(base.at(emb), emb);
}

Embedding residual_slice(const ExperimentConfig& c) {
    return bump_slice(c.lattice, 0.0, num(c, "bump_amplitude"), 0.125 * c.lattice.length());
}

void run_ts_residual(const ExperimentConfig& c, const RunOptions& opt, ExperimentOutput& out) {
    Embedding emb = residual_slice(c);
    const int site = integer(c, "site");
    require(site >= 0 && site < c.lattice.n_sites, "site", "out of range");
    PhysicalFamily fam = packet_family(c, emb);
    FamilyRule rule = fam.rule();
    ResidualSeries r{eps_sequence(c), {}};
    r.res.resize(r.eps.size());
    bool boundary = false;
    parallel_for(static_cast<int>(r.eps.size()), opt.threads, [&](int i) {
        TsResidual t = ts_residual(c.lattice, rule, emb, site, r.eps[i]);
        r.res[i] = t.residual;
        if (i == 0) boundary = t.boundary_site;
    });
    if (boundary) throw ConfigError("params.site: boundary sites of a fixed-zero lattice are excluded from the fit");
    residual_report(c, r, "ts_residual.csv", out);
}

void run_heisenberg_residual(const ExperimentConfig& c, const RunOptions& opt, ExperimentOutput& out) {
    const LatticeSpec& s = c.lattice;
    Embedding emb = residual_slice(c);
    const int site = integer(c, "site");
    require(site >= 0 && site < s.n_sites, "site", "out of range");
    std::mt19937_64 rng(c.seed);
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::MatrixXd a(s.dim(), s.dim());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) a(i, j) = g(rng);
    Eigen::MatrixXd sym = 0.5 * (a + a.transpose());
    QuadraticForm a0(sym / sym.norm(), 0.0);
    ResidualSeries r{eps_sequence(c), {}};
    r.res.resize(r.eps.size());
    parallel_for(static_cast<int>(r.eps.size()), opt.threads,
                 [&](int i) { r.res[i] = heisenberg_equation_residual(s, a0, emb, site, r.eps[i]); });
    residual_report(c, r, "heisenberg_residual.csv", out);
}

void run_trinity(const ExperimentConfig& c, const RunOptions& opt, ExperimentOutput& out) {
    const LatticeSpec& s = c.lattice;
    Embedding e0 = Embedding::flat(s);
    Embedding eq = bump_slice(s, num(c, "target_time"), num(c, "bump_amplitude"), num(c, "bump_width"));
    std::mt19937_64 rng(c.seed);
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::VectorXd phi(s.n_sites), p(s.n_sites);
    for (int i = 0; i < s.n_sites; ++i) phi[i] = num(c, "packet_amplitude") * g(rng);
    for (int i = 0; i < s.n_sites; ++i) p[i] = num(c, "packet_amplitude") * s.spacing * g(rng);
    GaussianState st = GaussianState::vacuum(s, e0).displaced(phi, p);
    PhysicalFamily fam(e0, st);
    const int m = frame_change_substeps(s, e0, eq);
    GaussianState schr = evolve_foliation(st, build_interpolating(e0, eq, Schedule{}, m));
    const int no = integer(c, "n_observables");
    std::vector<QuadraticForm> obs;
    for (int k = 0; k < no; ++k) {
        Eigen::MatrixXd a(s.dim(), s.dim());
        for (int i = 0; i < a.rows(); ++i)
            for (int j = 0; j < a.cols(); ++j) a(i, j) = g(rng);
        Eigen::MatrixXd sym = 0.5 * (a + a.transpose());
        obs.emplace_back(sym / sym.norm(), g(rng));
    }
    std::vector<std::array<double, 3>> vals(no);
    parallel_for(no, opt.threads, [&](int k) {
        vals[k][0] = schr.expectation(obs[k]);
        vals[k][1] = st.expectation(heisenberg_observable(s, obs[k], eq, e0));
        vals[k][2] = dirac_expectation(fam, obs[k], eq);
    });
    std::ostringstream csv;
    csv << "observable,schrodinger,heisenberg,dirac\n";
    double sh = 0, sd = 0, hd = 0;
    for (int k = 0; k < no; ++k) {
        csv << k << ',' << fmt(vals[k][0]) << ',' << fmt(vals[k][1]) << ',' << fmt(vals[k][2]) << '\n';
        sh = std::max(sh, std::abs(vals[k][0] - vals[k][1]));
        sd = std::max(sd, std::abs(vals[k][0] - vals[k][2]));
        hd = std::max(hd, std::abs(vals[k][1] - vals[k][2]));
    }
    out.add_file("trinity.csv", csv.str());
    out.metrics["substeps"] = m;
    const double tol = num(c, "tolerance");
    out.check("schrodinger_vs_heisenberg", sh, "<=", tol);
    out.check("schrodinger_vs_dirac", sd, "<=", tol);
    out.check("heisenberg_vs_dirac", hd, "<=", tol);
}

std::vector<ParamSpec> residual_params() {
    return {{"site", 10, "deformed site"},
            {"eps_start", 1e-2, "largest deformation amplitude"},
            {"eps_count", 16, "number of halvings"},
            {"fit_points", 4, "leading points used for the order fit"},
            {"bump_amplitude", 0.1, "curvature of the base slice"},
            {"packet_amplitude", 0.5, "coherent displacement of the state"},
            {"noise_floor", 1e-8, "required smallest residual"},
            {"min_order", 2.0, "nominal order in eps"}};
}

std::vector<ParamSpec> foliation_params() {
    return {{"tau", 1.0, "time separation of the end slices"},
            {"dt", 1e-3, "parameter step on the configured lattice"},
            {"bump_amplitude", 0.1, "bump schedule amplitude"},
            {"bump_width", 1.0, "bump schedule width"},
            {"bump_centre", 0.0, "bump schedule centre"},
            {"end_bump", 0.0, "bump height of the final slice"},
            {"levels", 3, "refinement levels"},
            {"tolerance", 1e-5, "distance at the finest level"}};
}

}  // namespace

const std::vector<ExperimentInfo>& experiments() {
    static const std::vector<ExperimentInfo> list = [] {
        std::vector<ExperimentInfo> v;
        v.push_back({"schrodinger_recovery",
                     "coherent packet on the inertial foliation against a refined classical solution",
                     {{"packet_sigma", 4.0, "packet width"},
                      {"packet_amplitude", 1.0, "packet height"},
                      {"t_final", 1.0, "evolution time"},
                      {"dt_ratio", 0.025, "dt / dx"},
                      {"levels", 3, "refinement levels"},
                      {"oracle_refinement", 10, "oracle refinement factor"},
                      {"tolerance", 1e-4, "max mean-field error at the finest level"},
                      {"min_order", 2.0, "nominal order"}},
                     lattice_json(128, 0.4, 1.0, "periodic"),
                     run_schrodinger});
        {
            auto p = foliation_params();
            p.push_back({"min_order", 2.0, "nominal order"});
            v.push_back({"foliation_independence", "covariance distance between a linear and a bump foliation", p,
                         lattice_json(128, 0.0625, 1.0, "periodic"), run_foliation_independence});
        }
        {
            auto p = foliation_params();
            p.push_back({"packet_sigma", 0.5, "packet width"});
            p.push_back({"packet_amplitude", 1.0, "packet height"});
            v.push_back({"dual_path_equality", "single-shot frame change against path-ordered foliation evolution", p,
                         lattice_json(128, 0.0625, 1.0, "periodic"), run_dual_path});
        }
        v.push_back({"boost_vacuum",
                     "particle number of the boosted vacuum under refinement",
                     {{"rapidity", 0.5, "boost rapidity"},
                      {"levels", 3, "refinement levels (dx ~ 1/sqrt(N))"},
                      {"k_cut_factor", 0.25, "modes with |k| <= factor * pi / dx"},
                      {"tolerance", 1e-3, "max particle number at the finest level"}},
                     lattice_json(256, 0.05, 1.0, "fixed-zero"),
                     run_boost_vacuum});
        v.push_back({"quench_bogoliubov",
                     "sudden mass quench and curved-slice canonical relations",
                     {{"mass_to", 2.0, "mass after the quench"},
                      {"curved_amplitude", 0.2, "bump height of the curved slice"},
                      {"curved_width", 1.0, "bump width of the curved slice"},
                      {"canonical_tolerance", 1e-8, "canonical relations"},
                      {"oracle_tolerance", 1e-10, "per-mode number against the analytic value"}},
                     lattice_json(64, 0.25, 1.0, "periodic"),
                     run_quench});
        v.push_back({"qrf_particle_creation",
                     "smeared particle number over an embedding ensemble",
                     {{"family", "mass_quench", "time_translation | boost | mass_quench"},
                      {"parameters", json::array({1.5, 2.0}), "family parameters"},
                      {"weights", json::array({0.5, 0.5}), "member weights"},
                      {"random_ensembles", 10, "randomized ensembles for the route comparison"},
                      {"max_members", 4, "members per randomized ensemble"},
                      {"tolerance", 1e-12, "operator route against conditional weighting"}},
                     lattice_json(32, 0.25, 1.0, "periodic"),
                     run_qrf});
        v.push_back({"anomaly_check",
                     "pointwise and integrated anomaly potential",
                     {{"bump_amplitude", 0.3, "bump height"},
                      {"bump_width", 1.0, "bump width"},
                      {"rapidity", 0.4, "boost of the flat control slice"},
                      {"levels", 3, "refinement levels"},
                      {"relative_tolerance", 1e-8, "integrated over pointwise maximum"},
                      {"min_order", 1.0, "nominal order"}},
                     lattice_json(128, 0.125, 0.0, "fixed-zero"),
                     run_anomaly});
        v.push_back({"microcausality_check",
                     "commutators of flux smeared over separated supports",
                     {{"pairs", 1000, "random support pairs"},
                      {"min_separation", 2, "links between supports"},
                      {"max_support", 6, "largest support length"},
                      {"bump_amplitude", 0.2, "curvature of the slice"}},
                     lattice_json(64, 0.25, 1.0, "periodic"),
                     run_microcausality});
        v.push_back({"ts_residual", "centred Tomonaga-Schwinger residual against eps", residual_params(),
                     lattice_json(32, 0.25, 1.0, "periodic"), run_ts_residual});
        v.push_back({"heisenberg_residual", "centred Heisenberg-equation residual against eps", residual_params(),
                     lattice_json(32, 0.25, 1.0, "periodic"), run_heisenberg_residual});
        v.push_back({"trinity_battery",
                     "Schrodinger, Heisenberg and Dirac evaluations of random observables",
                     {{"n_observables", 20, "random quadratic observables"},
                      {"target_time", 0.5, "time of the target slice"},
                      {"bump_amplitude", 0.2, "bump height of the target slice"},
                      {"bump_width", 1.0, "bump width of the target slice"},
                      {"packet_amplitude", 0.3, "random coherent displacement"},
                      {"tolerance", 1e-10, "pairwise agreement"}},
                     lattice_json(32, 0.25, 1.0, "periodic"),
                     run_trinity});
        return v;
    }();
    return list;
}

}  // namespace pft
