#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pft/embedding.hpp"

namespace pft {

/// Ordered leaves with strictly increasing parameter values.
class Foliation {
public:
    /// Validates every leaf (spacelike by construction) and every step
    /// (future-timelike deformation). Throws NonTimelikeDeformation.
    Foliation(std::vector<Embedding> leaves, std::vector<double> times);

    /// Accepts families that fail the timelike test; the failing steps are
    /// listed in `non_foliating_steps()`.
    static Foliation unchecked(std::vector<Embedding> leaves, std::vector<double> times);

    const std::vector<Embedding>& leaves() const { return leaves_; }
    const std::vector<double>& times() const { return times_; }
    int n_steps() const { return static_cast<int>(leaves_.size()) - 1; }
    const std::vector<int>& non_foliating_steps() const { return bad_steps_; }
    bool is_foliation() const { return bad_steps_.empty(); }

private:
    Foliation() = default;
    void init(std::vector<Embedding> leaves, std::vector<double> times);

    std::vector<Embedding> leaves_;
    std::vector<double> times_;
    std::vector<int> bad_steps_;
};

/// Leaves X(0) + t_k v with v = (cosh w, -sinh w), starting from the boosted
/// flat slice, t_k evenly spaced over [t0, t1].
Foliation build_inertial(const LatticeSpec& spec, double rapidity, double t0, double t1, int n_steps);

enum class ScheduleKind { Linear, Smoothstep, Bump };

struct Schedule {
    ScheduleKind kind = ScheduleKind::Linear;
    /// Bump schedule: the interpolation fraction at label x becomes
    /// s + amplitude * sin(pi s) * exp(-((x - centre)/width)^2).
    double amplitude = 0.0;
    double width = 1.0;
    double centre = 0.0;
};
ScheduleKind schedule_from_string(const std::string& s);

/// Interpolates e_start -> e_end over parameter [0, 1] in n_steps steps.
/// Throws NotSpacelike or NonTimelikeDeformation.
Foliation build_interpolating(const Embedding& e_start, const Embedding& e_end, const Schedule& schedule,
                              int n_steps);

/// Step count keeping the largest per-step coordinate change <= 0.1 * spacing.
int default_step_count(const Embedding& e_start, const Embedding& e_end, const Schedule& schedule);

/// Lapse and shift of the discrete deformation (X_{k+1} - X_k) / dt relative
/// to the midpoint leaf. Throws NonTimelikeDeformation if any lapse <= 0.
struct StepDecomposition {
    Eigen::VectorXd lapse, shift;
    double residual = 0.0;  ///< max |N n + N^x X' - t|
};
StepDecomposition decompose_deformation(const Foliation& fol, int k);
StepDecomposition decompose_unchecked(const Embedding& a, const Embedding& b, double dt);

}  // namespace pft
