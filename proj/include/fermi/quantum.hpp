#ifndef FERMI_QUANTUM_HPP
#define FERMI_QUANTUM_HPP

#include <Eigen/Core>
#include <complex>
#include <functional>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include "fermi/field.hpp"
#include "fermi/model.hpp"
#include "fermi/series.hpp"

namespace fermi {

/// Uniform periodic grid z_i = z_min + i dz, i in [0, n), dz = (z_max - z_min) / n.
struct GridSpec {
    double z_min = -10.0;
    double z_max = 2000.0;
    Eigen::Index n = 1 << 15;

    void validate() const;

    double dz() const { return (z_max - z_min) / static_cast<double>(n); }
    /// Momentum spacing 2 pi kbar / (n dz).
    double dp(double kbar) const { return 2.0 * std::numbers::pi * kbar / (static_cast<double>(n) * dz()); }
    /// Largest representable |p| = pi kbar / dz.
    double p_max(double kbar) const { return std::numbers::pi * kbar / dz(); }

    Eigen::ArrayXd positions() const;
    /// Momenta in discrete-transform order: j = 0..n/2-1, then -n/2..-1, times dp.
    Eigen::ArrayXd momenta(double kbar) const;
    /// Momenta in ascending order, p_j = dp j for j in [-n/2, n/2).
    Eigen::ArrayXd momenta_sorted(double kbar) const;

    bool operator==(const GridSpec&) const = default;
};

/// Sampled wave function psi(z_i) at scaled time t, normalized so that sum |psi|^2 dz = 1.
struct GridState {
    GridSpec spec;
    Eigen::VectorXcd amplitudes;
    double t = 0.0;
    DimensionlessParams params;

    double norm() const { return amplitudes.squaredNorm() * spec.dz(); }
    Eigen::ArrayXd density() const { return amplitudes.array().abs2(); }
};

enum class Boundary { Reflecting, Absorber };

struct PropagatorConfig {
    double dt = 2.0 * std::numbers::pi / 2000.0;
    Boundary boundary = Boundary::Reflecting;
    /// Fraction of the grid covered by the absorber at each end.
    double absorber_width = 0.1;
    /// Largest tolerated probability in the outer edge band before a leakage abort.
    double leak_threshold = 1e-3;
    /// Width of the monitored edge band as a fraction of the grid at each end.
    double edge_fraction = 0.05;

    void validate() const;
    bool operator==(const PropagatorConfig&) const = default;
};

/// Minimum-uncertainty packet psi ~ exp(-(z - z0)^2 / (4 width^2) + i p0 z / kbar).
/// Throws GridTooSmall unless z0 has 5 widths of clearance and width > 2 dz.
GridState init_gaussian(const GridSpec& spec, double z0, double p0, double width, const DimensionlessParams& params);

/// z + v0 exp(-kappa (z - lambda sin t)) with the exponent guard of the classical force.
Guarded<double> potential(double z, double t, const DimensionlessParams& params);

struct PositionMoments {
    double norm;
    double mean;
    double mean_sq;
    double variance() const { return mean_sq - mean * mean; }
};

struct MomentumMoments {
    double norm;
    double mean;
    double mean_sq;
    double variance() const { return mean_sq - mean * mean; }
};

PositionMoments position_moments(const GridState& state);
/// <p>, <p^2> from the discrete Fourier transform of psi, normalized by the state's norm.
MomentumMoments momentum_moments(const GridState& state);
/// Probability in the outer `fraction` of the grid at the upper end plus the band below the
/// mirror at the lower end (at most half the room between z_min and the lowest wall point).
double edge_probability(const GridState& state, double fraction);

/// Strang split-operator propagator for i kbar dpsi/dt = (p^2/2 + V(z, t)) psi.
///
/// Each step applies the half potential phase at the interval midpoint, the full kinetic
/// phase in momentum space, then the same half potential phase. The static gravity phase
/// and kinetic phase are precomputed; the mirror phase is only evaluated over the slab of
/// the grid where it differs from one in double precision.
class SplitOperator {
public:
    SplitOperator(const GridSpec& spec, const DimensionlessParams& params, const PropagatorConfig& cfg);
    ~SplitOperator();
    SplitOperator(SplitOperator&&) noexcept;
    SplitOperator& operator=(SplitOperator&&) noexcept;

    /// Advances state by one step. Throws NumericalFailure if the norm moves by more
    /// than 1e-6 in reflecting mode.
    void step(GridState& state);

    double dt() const noexcept { return cfg_.dt; }
    /// Total probability removed by the absorber so far.
    double absorbed() const noexcept { return absorbed_; }
    const std::vector<std::string>& warnings() const noexcept { return warnings_; }
    /// Index range [first, last) over which the mirror phase is evaluated.
    std::pair<Eigen::Index, Eigen::Index> mirror_slab() const noexcept { return {slab_first_, slab_last_}; }

private:
    struct Fft;

    void apply_half_potential(Eigen::VectorXcd& psi, const Eigen::ArrayXcd& mirror_half) const;

    GridSpec spec_;
    DimensionlessParams params_;
    PropagatorConfig cfg_;
    Eigen::ArrayXd z_;
    Eigen::ArrayXcd kinetic_phase_;
    Eigen::ArrayXcd gravity_half_phase_;
    Eigen::ArrayXd absorber_mask_;
    Eigen::Index slab_first_ = 0;
    Eigen::Index slab_last_ = 0;
    Eigen::VectorXcd work_;
    std::unique_ptr<Fft> fft_;
    double absorbed_ = 0.0;
    std::vector<std::string> warnings_;
};

/// One Strang step with a freshly built propagator; prefer SplitOperator for loops.
GridState split_step(const GridState& state, const PropagatorConfig& cfg);

/// Sampling schedule for propagate(). A series row is recorded at the start, every `every`
/// steps and at the final time; `on_sample` sees the state at each of those times.
/// `on_snapshot` sees the state at the start and every `snapshot_every` steps, so its
/// calls are equally spaced in time.
struct Recorder {
    long every = 1;
    std::function<void(const GridState&)> on_sample;
    long snapshot_every = 1;
    std::function<void(const GridState&)> on_snapshot;
};

struct PropagationResult {
    GridState state;
    ObservableSeries series;  // norm, mean_z, mean_p, var_p, edge_leak, absorbed
    double absorbed = 0.0;
    std::vector<std::string> warnings;
};

/// Quantum series column names, in order.
const std::vector<std::string>& quantum_series_columns();

/// Repeated split steps to t_final. The step count is ceil((t_final - t) / dt) with the
/// step shortened uniformly so the run lands on t_final exactly.
/// Throws LeakageAbort in reflecting mode when the edge probability exceeds cfg.leak_threshold.
PropagationResult propagate(GridState state, const PropagatorConfig& cfg, double t_final, const Recorder& recorder = {});

}  // namespace fermi

#endif  // FERMI_QUANTUM_HPP
