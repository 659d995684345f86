#include "fermi/quantum.hpp"

#include <unsupported/Eigen/FFT>
#include <cmath>
#include <sstream>

#include "fermi/errors.hpp"

namespace fermi {

namespace {

constexpr std::complex<double> kI{0.0, 1.0};

// Mirror phases below this magnitude round to exactly one against the unit amplitude.
constexpr double kNegligiblePhase = 1e-18;

// Edge leakage is checked at least this often, independent of the recording cadence.
constexpr long kLeakCheckInterval = 64;

bool is_power_of_two(Eigen::Index n) { return n >= 2 && (n & (n - 1)) == 0; }

Eigen::ArrayXcd unit_phase(const Eigen::ArrayXd& angle) {
    Eigen::ArrayXcd out(angle.size());
    for (Eigen::Index i = 0; i < angle.size(); ++i) out[i] = std::polar(1.0, angle[i]);
    return out;
}

// Largest |V| dt / kbar over the points carrying non-negligible probability.
double max_potential_phase(const GridState& state, double dt) {
    const Eigen::ArrayXd rho = state.density();
    const double cutoff = 1e-12 * rho.maxCoeff();
    const Eigen::ArrayXd z = state.spec.positions();
    double vmax = 0.0;
    for (Eigen::Index i = 0; i < z.size(); ++i) {
        if (rho[i] > cutoff) vmax = std::max(vmax, std::abs(potential(z[i], state.t, state.params).value));
    }
    return vmax * dt / state.params.kbar;
}

}  // namespace

void GridSpec::validate() const {
    if (!is_power_of_two(n)) throw InvalidParameter("grid size n must be a power of two >= 2");
    if (!(z_min < z_max) || !std::isfinite(z_min) || !std::isfinite(z_max)) {
        throw InvalidParameter("grid requires z_min < z_max");
    }
}

Eigen::ArrayXd GridSpec::positions() const {
    return z_min + dz() * Eigen::ArrayXd::LinSpaced(n, 0.0, static_cast<double>(n - 1));
}

Eigen::ArrayXd GridSpec::momenta(double kbar) const {
    Eigen::ArrayXd p(n);
    const double step = dp(kbar);
    for (Eigen::Index j = 0; j < n; ++j) p[j] = step * static_cast<double>(j < n / 2 ? j : j - n);
    return p;
}

Eigen::ArrayXd GridSpec::momenta_sorted(double kbar) const {
    const double step = dp(kbar);
    return step * Eigen::ArrayXd::LinSpaced(n, static_cast<double>(-n / 2), static_cast<double>(n / 2 - 1));
}

void PropagatorConfig::validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidParameter("dt must be > 0");
    if (!(absorber_width > 0.0 && absorber_width < 0.5)) throw InvalidParameter("absorber_width must lie in (0, 0.5)");
    if (!(leak_threshold > 0.0)) throw InvalidParameter("leak_threshold must be > 0");
    if (!(edge_fraction > 0.0 && edge_fraction < 0.5)) throw InvalidParameter("edge_fraction must lie in (0, 0.5)");
}

GridState init_gaussian(const GridSpec& spec, double z0, double p0, double width, const DimensionlessParams& params) {
    spec.validate();
    params.validate();
    if (!(width > 2.0 * spec.dz())) {
        throw GridTooSmall("packet width must exceed 2 dz (width=" + std::to_string(width) +
                           ", dz=" + std::to_string(spec.dz()) + ")");
    }
    if (z0 - 5.0 * width < spec.z_min || z0 + 5.0 * width > spec.z_max) {
        throw GridTooSmall("packet centre needs 5 widths of clearance from both grid edges");
    }

    const Eigen::ArrayXd z = spec.positions();
    const Eigen::ArrayXd envelope = (-(z - z0).square() / (4.0 * width * width)).exp();
    GridState state{spec, Eigen::VectorXcd(spec.n), 0.0, params};
    for (Eigen::Index i = 0; i < spec.n; ++i) state.amplitudes[i] = envelope[i] * std::polar(1.0, p0 * z[i] / params.kbar);
    state.amplitudes /= std::sqrt(state.norm());
    return state;
}

Guarded<double> potential(double z, double t, const DimensionlessParams& params) {
    const Guarded<double> e = mirror_exponential(z, t, params);
    return {z + params.v0 * e.value, e.saturated};
}

PositionMoments position_moments(const GridState& state) {
    const Eigen::ArrayXd rho = state.density();
    const Eigen::ArrayXd z = state.spec.positions();
    const double mass = rho.sum();
    return {mass * state.spec.dz(), (rho * z).sum() / mass, (rho * z.square()).sum() / mass};
}

MomentumMoments momentum_moments(const GridState& state) {
    Eigen::FFT<double> fft;
    Eigen::VectorXcd spectrum(state.spec.n);
    fft.fwd(spectrum, state.amplitudes);
    const Eigen::ArrayXd weight = spectrum.array().abs2();
    const Eigen::ArrayXd p = state.spec.momenta(state.params.kbar);
    const double mass = weight.sum();
    return {mass * state.spec.dz() / static_cast<double>(state.spec.n), (weight * p).sum() / mass,
            (weight * p.square()).sum() / mass};
}

double edge_probability(const GridState& state, double fraction) {
    const GridSpec& g = state.spec;
    const double n = static_cast<double>(g.n);
    const auto top = std::max<Eigen::Index>(1, static_cast<Eigen::Index>(fraction * n));
    // The mirror lives near the lower edge, so the lower band only covers the lower half
    // of the space between z_min and the lowest wall position.
    const double floor_room = std::max(0.0, 0.5 * (-state.params.lambda - g.z_min));
    const double bottom_width = std::min(fraction * (g.z_max - g.z_min), floor_room);
    const auto bottom = std::max<Eigen::Index>(1, static_cast<Eigen::Index>(bottom_width / g.dz()));
    const auto& psi = state.amplitudes;
    return (psi.head(bottom).squaredNorm() + psi.tail(top).squaredNorm()) * g.dz();
}

struct SplitOperator::Fft {
    Eigen::FFT<double> engine;
};

SplitOperator::SplitOperator(const GridSpec& spec, const DimensionlessParams& params, const PropagatorConfig& cfg)
    : spec_(spec), params_(params), cfg_(cfg), fft_(std::make_unique<Fft>()) {
    spec_.validate();
    params_.validate();
    cfg_.validate();

    const double dt = cfg_.dt;
    const double kbar = params_.kbar;
    z_ = spec_.positions();
    const Eigen::ArrayXd p = spec_.momenta(kbar);
    kinetic_phase_ = unit_phase(-p.square() * dt / (2.0 * kbar));
    gravity_half_phase_ = unit_phase(-z_ * dt / (2.0 * kbar));

    // The mirror term is largest when the wall sits at its highest point, z = lambda.
    slab_first_ = 0;
    slab_last_ = 0;
    if (params_.v0 > 0.0) {
        const Eigen::ArrayXd peak = mirror_potential(z_, std::numbers::pi / 2.0, params_) * dt / (2.0 * kbar);
        Eigen::Index last = 0;
        for (Eigen::Index i = 0; i < spec_.n; ++i) {
            if (peak[i] > kNegligiblePhase) last = i + 1;
        }
        slab_last_ = last;
    }

    if (cfg_.boundary == Boundary::Absorber) {
        absorber_mask_ = Eigen::ArrayXd::Ones(spec_.n);
        const auto width = std::max<Eigen::Index>(1, static_cast<Eigen::Index>(cfg_.absorber_width * static_cast<double>(spec_.n)));
        for (Eigen::Index k = 0; k < width; ++k) {
            // Cosine ramp, one at the inner edge of the band and zero at the grid edge.
            const double depth = static_cast<double>(width - k) / static_cast<double>(width);
            const double m = std::pow(std::cos(0.5 * std::numbers::pi * depth), 0.125);
            absorber_mask_[k] = m;
            absorber_mask_[spec_.n - 1 - k] = m;
        }
    }
    work_.resize(spec_.n);
}

SplitOperator::~SplitOperator() = default;
SplitOperator::SplitOperator(SplitOperator&&) noexcept = default;
SplitOperator& SplitOperator::operator=(SplitOperator&&) noexcept = default;

void SplitOperator::apply_half_potential(Eigen::VectorXcd& psi, const Eigen::ArrayXcd& mirror_half) const {
    psi.array() *= gravity_half_phase_;
    const Eigen::Index len = slab_last_ - slab_first_;
    if (len > 0) psi.array().segment(slab_first_, len) *= mirror_half;
}

void SplitOperator::step(GridState& state) {
    if (state.spec != spec_) throw InvalidParameter("state grid does not match the propagator grid");
    const double dt = cfg_.dt;
    const double t_mid = state.t + 0.5 * dt;
    const double norm_before = cfg_.boundary == Boundary::Reflecting || cfg_.boundary == Boundary::Absorber ? state.norm() : 0.0;

    const Eigen::Index len = slab_last_ - slab_first_;
    Eigen::ArrayXcd mirror_half;
    if (len > 0) {
        const Eigen::ArrayXd v = mirror_potential(z_.segment(slab_first_, len), t_mid, params_);
        mirror_half = unit_phase(-v * dt / (2.0 * params_.kbar));
    }

    auto& psi = state.amplitudes;
    apply_half_potential(psi, mirror_half);
    fft_->engine.fwd(work_, psi);
    work_.array() *= kinetic_phase_;
    fft_->engine.inv(psi, work_);
    apply_half_potential(psi, mirror_half);
    state.t += dt;

    if (cfg_.boundary == Boundary::Absorber) {
        psi.array() *= absorber_mask_;
        absorbed_ += norm_before - state.norm();
        return;
    }
    const double norm_after = state.norm();
    if (!std::isfinite(norm_after) || std::abs(norm_after - norm_before) > 1e-6) {
        std::ostringstream msg;
        msg << "norm moved from " << norm_before << " to " << norm_after << " in one step at t=" << state.t;
        throw NumericalFailure(msg.str());
    }
}

GridState split_step(const GridState& state, const PropagatorConfig& cfg) {
    SplitOperator op(state.spec, state.params, cfg);
    GridState next = state;
    op.step(next);
    return next;
}

const std::vector<std::string>& quantum_series_columns() {
    static const std::vector<std::string> names{"norm", "mean_z", "mean_p", "var_p", "edge_leak", "absorbed"};
    return names;
}

PropagationResult propagate(GridState state, const PropagatorConfig& cfg, double t_final, const Recorder& recorder) {
    cfg.validate();
    if (!(t_final >= state.t)) throw InvalidParameter("t_final must not precede the state time");
    if (recorder.every < 1 || recorder.snapshot_every < 1) throw InvalidParameter("recording cadence must be >= 1 step");

    const double t_start = state.t;
    const double span = t_final - t_start;
    const long steps = span > 0.0 ? static_cast<long>(std::ceil(span / cfg.dt - 1e-9)) : 0;
    PropagatorConfig stepped = cfg;
    if (steps > 0) stepped.dt = span / static_cast<double>(steps);

    PropagationResult result{std::move(state), ObservableSeries(quantum_series_columns()), 0.0, {}};
    GridState& s = result.state;

    auto check_leak = [&](double leak) {
        if (cfg.boundary == Boundary::Reflecting && leak > cfg.leak_threshold) {
            std::ostringstream msg;
            msg << "edge probability " << leak << " exceeds " << cfg.leak_threshold << " at t=" << s.t
                << "; enlarge the grid";
            throw LeakageAbort(msg.str());
        }
    };
    double absorbed = 0.0;
    auto record = [&] {
        const PositionMoments zm = position_moments(s);
        const MomentumMoments pm = momentum_moments(s);
        const double leak = edge_probability(s, cfg.edge_fraction);
        result.series.append(s.t, {zm.norm, zm.mean, pm.mean, pm.variance(), leak, absorbed});
        if (recorder.on_sample) recorder.on_sample(s);
        check_leak(leak);
    };

    record();
    if (recorder.on_snapshot) recorder.on_snapshot(s);
    if (steps == 0) return result;

    SplitOperator op(s.spec, s.params, stepped);
    result.warnings = op.warnings();
    if (const double phase = max_potential_phase(s, stepped.dt); phase > 0.1 * std::numbers::pi) {
        std::ostringstream msg;
        msg << "dt * max|V| / kbar = " << phase << " over the initial support is not small against pi";
        result.warnings.push_back(msg.str());
    }
    for (long k = 1; k <= steps; ++k) {
        op.step(s);
        absorbed = op.absorbed();
        s.t = k == steps ? t_final : t_start + stepped.dt * static_cast<double>(k);
        if (recorder.on_snapshot && k % recorder.snapshot_every == 0) recorder.on_snapshot(s);
        if (k % recorder.every == 0 || k == steps) {
            record();
        } else if (k % kLeakCheckInterval == 0) {
            check_leak(edge_probability(s, cfg.edge_fraction));
        }
    }
    result.absorbed = absorbed;
    return result;
}

}  // namespace fermi
