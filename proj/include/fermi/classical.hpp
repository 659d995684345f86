#ifndef FERMI_CLASSICAL_HPP
#define FERMI_CLASSICAL_HPP

#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "fermi/field.hpp"
#include "fermi/model.hpp"
#include "fermi/series.hpp"

namespace fermi {

struct PhasePoint {
    double z = 0.0;
    double p = 0.0;
    double t = 0.0;
};

enum class MirrorMode { SoftMirror, HardWall };

struct IntegratorConfig {
    double dt = 2.0 * std::numbers::pi / 2000.0;
    MirrorMode mode = MirrorMode::SoftMirror;
    double event_tol = 1e-12;
    /// Impacts tolerated inside one hard-wall step before declaring chattering.
    int max_impacts = 64;
    /// Fraction of failed trajectories tolerated by evolve_ensemble.
    double max_failure_fraction = 0.05;

    void validate() const;
    bool operator==(const IntegratorConfig&) const = default;
};

enum class SampleShape { Gaussian, UniformPatch };

/// Sampling region for an initial ensemble. For UniformPatch the widths are half-widths.
struct InitDescriptor {
    double z0 = 40.0;
    double p0 = 0.0;
    /// Common start time of every sampled point.
    double t0 = 0.0;
    double width_z = 1.0;
    double width_p = 1.0;
    SampleShape shape = SampleShape::Gaussian;
};

struct Ensemble {
    std::vector<PhasePoint> points;
    std::uint64_t rng_seed = 0;
    InitDescriptor init;
    std::vector<std::string> warnings;

    double time() const { return points.empty() ? 0.0 : points.front().t; }
};

/// Effective force -1 + kappa v0 exp(-kappa (z - lambda sin t)); `saturated` flags a capped exponent.
template <typename Scalar>
Guarded<Scalar> classical_force(Scalar z, Scalar t, const DimensionlessParams& params) {
    const Guarded<Scalar> e = mirror_exponential(z, t, params);
    return {Scalar(-1) + Scalar(params.kappa * params.v0) * e.value, e.saturated};
}

/// H = p^2/2 + z + v0 exp(-kappa (z - lambda sin t)).
double classical_energy(const PhasePoint& x, const DimensionlessParams& params);

/// One kick-drift-kick step of signed length dt; both kicks use the midpoint time, so a
/// step of -dt from the end point retraces the step.
PhasePoint step_soft(const PhasePoint& x, const DimensionlessParams& params, double dt);
PhasePoint step_soft(const PhasePoint& x, const DimensionlessParams& params, const IntegratorConfig& cfg);

/// Outgoing momentum after an elastic impact with a wall moving at velocity u.
constexpr double reflect(double p_in, double wall_velocity) { return -p_in + 2.0 * wall_velocity; }

/// Free fall above the hard wall z_w(t) = lambda sin t for cfg.dt, with every impact located
/// to cfg.event_tol and reflected in the wall frame.
PhasePoint step_hardwall(const PhasePoint& x, const DimensionlessParams& params, const IntegratorConfig& cfg);

/// Hard-wall flight until the next impact (at most `horizon` ahead). Returns the point just
/// after the impact, or the free-fall point at x.t + horizon when no impact occurs.
struct Impact {
    PhasePoint after;
    double p_in = 0.0;
    bool hit = false;
};
Impact next_impact(const PhasePoint& x, const DimensionlessParams& params, double horizon, double event_tol);

/// Deterministic ensemble; every point draws from its own generator derived from (seed, index).
/// n == 1 yields the centre point. Adds a warning when z0 lies below the wall reach.
Ensemble sample_initial(const InitDescriptor& desc, std::size_t n, std::uint64_t seed, double wall_reach = 0.0);

/// Seed on the stable accelerator mode of branch s: the state `delay` after an impact at phase
/// arccos(s pi / lambda) with outgoing momentum order * pi. Throws InvalidParameter when
/// lambda < s pi.
InitDescriptor accelerator_seed(double lambda, Branch s, int order, double delay, double half_width_z, double half_width_p);

struct EnsembleResult {
    Ensemble ensemble;
    ObservableSeries series;  // mean_z, mean_p, mean_abs_p, mean_p2, var_p, n_active, failed_fraction
    std::vector<bool> failed;
};

const std::vector<std::string>& classical_series_columns();

/// Advances every point to t_final, recording ensemble statistics every `record_every` steps
/// of cfg.dt. Failed points are excluded from the statistics from the failing step on; the
/// run throws NumericalFailure when the failed fraction exceeds cfg.max_failure_fraction.
/// Points are distributed over `threads` workers; results do not depend on the thread count.
EnsembleResult evolve_ensemble(const Ensemble& ens, const DimensionlessParams& params, const IntegratorConfig& cfg,
                               double t_final, long record_every, unsigned threads = 1);

}  // namespace fermi

#endif  // FERMI_CLASSICAL_HPP
