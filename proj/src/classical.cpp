#include "fermi/classical.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <thread>

#include "fermi/errors.hpp"

namespace fermi {

namespace {

constexpr int kBracketSamples = 16;

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Uniform in (0, 1]; built from the top 53 bits so the stream is identical on every platform.
double uniform01(std::mt19937_64& gen) { return (static_cast<double>(gen() >> 11) + 1.0) * 0x1.0p-53; }

std::pair<double, double> box_muller(std::mt19937_64& gen) {
    const double r = std::sqrt(-2.0 * std::log(uniform01(gen)));
    const double phi = 2.0 * std::numbers::pi * uniform01(gen);
    return {r * std::cos(phi), r * std::sin(phi)};
}

void require_finite(const PhasePoint& x) {
    if (!std::isfinite(x.z) || !std::isfinite(x.p) || !std::isfinite(x.t)) {
        std::ostringstream msg;
        msg << "non-finite phase point (z=" << x.z << ", p=" << x.p << ", t=" << x.t << ")";
        throw IntegrationDiverged(msg.str());
    }
}

double kick(double z, double t, const DimensionlessParams& params) {
    const Guarded<double> f = classical_force(z, t, params);
    if (f.saturated) {
        std::ostringstream msg;
        msg << "mirror force saturated at z=" << z << ", t=" << t << "; the step is too large for this mirror";
        throw IntegrationDiverged(msg.str());
    }
    return f.value;
}

}  // namespace

void IntegratorConfig::validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidParameter("dt must be > 0");
    if (!(event_tol > 0.0)) throw InvalidParameter("event_tol must be > 0");
    if (max_impacts < 1) throw InvalidParameter("max_impacts must be >= 1");
    if (!(max_failure_fraction >= 0.0 && max_failure_fraction <= 1.0)) {
        throw InvalidParameter("max_failure_fraction must lie in [0, 1]");
    }
}

double classical_energy(const PhasePoint& x, const DimensionlessParams& params) {
    return 0.5 * x.p * x.p + x.z + params.v0 * mirror_exponential(x.z, x.t, params).value;
}

PhasePoint step_soft(const PhasePoint& x, const DimensionlessParams& params, double dt) {
    const double t_mid = x.t + 0.5 * dt;
    const double p_half = x.p + 0.5 * dt * kick(x.z, t_mid, params);
    const double z = x.z + dt * p_half;
    const PhasePoint out{z, p_half + 0.5 * dt * kick(z, t_mid, params), x.t + dt};
    require_finite(out);
    return out;
}

PhasePoint step_soft(const PhasePoint& x, const DimensionlessParams& params, const IntegratorConfig& cfg) {
    if (cfg.mode != MirrorMode::SoftMirror) throw InvalidParameter("step_soft requires SoftMirror mode");
    return step_soft(x, params, cfg.dt);
}

Impact next_impact(const PhasePoint& x, const DimensionlessParams& params, double horizon, double event_tol) {
    const double lambda = params.lambda;
    PhasePoint start = x;
    // Points within the tolerance below the wall are lifted onto it.
    start.z = std::max(start.z, wall_position(start.t, params));

    auto gap = [&](double tau) { return start.z + start.p * tau - 0.5 * tau * tau - lambda * std::sin(start.t + tau); };
    auto free_fall = [&](double tau) { return PhasePoint{start.z + start.p * tau - 0.5 * tau * tau, start.p - tau, start.t + tau}; };
    auto impact_at = [&](double tau) {
        const double t = start.t + tau;
        const double p_in = start.p - tau;
        return Impact{{wall_position(t, params), reflect(p_in, lambda * std::cos(t)), t}, p_in, true};
    };

    // Newton refinement of a bracketed root; falls back to the bisection estimate if an
    // iterate leaves the bracket.
    auto polish = [&](double tau, double lo, double hi) {
        const double slack = hi - lo;
        for (int it = 0; it < 4; ++it) {
            const double slope = start.p - tau - lambda * std::cos(start.t + tau);
            if (slope == 0.0) break;
            const double next = tau - gap(tau) / slope;
            if (!(next >= lo - slack && next <= hi + slack)) break;
            tau = next;
        }
        return tau;
    };

    // Resting on the wall while moving into it: immediate impact.
    if (gap(0.0) <= 0.0 && start.p < lambda * std::cos(start.t)) return impact_at(0.0);

    const double h = horizon / kBracketSamples;
    double lo = 0.0;
    for (int k = 1; k <= kBracketSamples; ++k) {
        const double tau = k == kBracketSamples ? horizon : k * h;
        if (gap(tau) < 0.0) {
            double hi = tau;
            while (hi - lo > event_tol) {
                const double mid = 0.5 * (lo + hi);
                if (mid <= lo || mid >= hi) break;
                (gap(mid) < 0.0 ? hi : lo) = mid;
            }
            return impact_at(polish(0.5 * (lo + hi), lo, hi));
        }
        lo = tau;
    }
    return {free_fall(horizon), 0.0, false};
}

PhasePoint step_hardwall(const PhasePoint& x, const DimensionlessParams& params, const IntegratorConfig& cfg) {
    if (cfg.mode != MirrorMode::HardWall) throw InvalidParameter("step_hardwall requires HardWall mode");
    if (x.z < wall_position(x.t, params) - cfg.event_tol) {
        throw InvalidParameter("hard-wall point lies below the wall");
    }
    const double t_end = x.t + cfg.dt;
    PhasePoint cur = x;
    for (int impacts = 0;; ++impacts) {
        const Impact im = next_impact(cur, params, t_end - cur.t, cfg.event_tol);
        if (!im.hit) {
            PhasePoint out = im.after;
            out.t = t_end;
            require_finite(out);
            return out;
        }
        if (impacts >= cfg.max_impacts) {
            std::ostringstream msg;
            msg << "more than " << cfg.max_impacts << " impacts within one step near t=" << cur.t << " (grazing incidence)";
            throw ChatteringError(msg.str());
        }
        cur = im.after;
        require_finite(cur);
    }
}

Ensemble sample_initial(const InitDescriptor& desc, std::size_t n, std::uint64_t seed, double wall_reach) {
    if (n < 1) throw InvalidParameter("ensemble size must be >= 1");
    if (!(desc.width_z >= 0.0) || !(desc.width_p >= 0.0)) throw InvalidParameter("sampling widths must be >= 0");
    if (n > 1 && !(desc.width_z > 0.0 && desc.width_p > 0.0)) {
        throw InvalidParameter("sampling widths must be > 0 for more than one point");
    }

    Ensemble ens{{}, seed, desc, {}};
    if (desc.z0 < wall_reach) {
        ens.warnings.push_back("z0 = " + std::to_string(desc.z0) + " lies below the wall reach " +
                               std::to_string(wall_reach));
    }
    ens.points.reserve(n);
    if (n == 1) {
        ens.points.push_back({desc.z0, desc.p0, desc.t0});
        return ens;
    }
    for (std::size_t i = 0; i < n; ++i) {
        std::mt19937_64 gen(splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(i))));
        double dz = 0.0;
        double dp = 0.0;
        if (desc.shape == SampleShape::Gaussian) {
            const auto [a, b] = box_muller(gen);
            dz = desc.width_z * a;
            dp = desc.width_p * b;
        } else {
            dz = desc.width_z * (2.0 * uniform01(gen) - 1.0);
            dp = desc.width_p * (2.0 * uniform01(gen) - 1.0);
        }
        ens.points.push_back({desc.z0 + dz, desc.p0 + dp, desc.t0});
    }
    return ens;
}

InitDescriptor accelerator_seed(double lambda, Branch s, int order, double delay, double half_width_z, double half_width_p) {
    const double resonant = s.value() * std::numbers::pi;
    if (!(lambda >= resonant)) {
        throw InvalidParameter("accelerator seeding needs lambda >= s*pi (" + std::to_string(resonant) + ")");
    }
    if (order < 1) throw InvalidParameter("accelerator seeding order must be >= 1");
    // Stable fixed point of the impact map: wall velocity lambda cos(phase) = s pi, sin(phase) > 0.
    const double phase = std::acos(resonant / lambda);
    const double p_out = order * std::numbers::pi;
    InitDescriptor d;
    d.t0 = phase + delay;
    d.z0 = lambda * std::sin(phase) + p_out * delay - 0.5 * delay * delay;
    d.p0 = p_out - delay;
    d.width_z = half_width_z;
    d.width_p = half_width_p;
    d.shape = SampleShape::UniformPatch;
    return d;
}

const std::vector<std::string>& classical_series_columns() {
    static const std::vector<std::string> names{"mean_z", "mean_p", "mean_abs_p", "mean_p2", "var_p", "n_active", "failed_fraction"};
    return names;
}

EnsembleResult evolve_ensemble(const Ensemble& ens, const DimensionlessParams& params, const IntegratorConfig& cfg,
                               double t_final, long record_every, unsigned threads) {
    params.validate();
    cfg.validate();
    if (ens.points.empty()) throw InvalidParameter("ensemble is empty");
    if (record_every < 1) throw InvalidParameter("record_every must be >= 1");
    const double t0 = ens.time();
    for (const PhasePoint& x : ens.points) {
        if (x.t != t0) throw InvalidParameter("ensemble points must share one time");
    }
    if (!(t_final > t0)) throw InvalidParameter("t_final must exceed the ensemble time");

    const long steps = static_cast<long>(std::ceil((t_final - t0) / cfg.dt - 1e-9));
    IntegratorConfig stepped = cfg;
    stepped.dt = (t_final - t0) / static_cast<double>(steps);

    std::vector<long> record_steps{0};
    for (long k = record_every; k < steps; k += record_every) record_steps.push_back(k);
    record_steps.push_back(steps);

    const auto n_points = static_cast<Eigen::Index>(ens.points.size());
    const auto n_records = static_cast<Eigen::Index>(record_steps.size());
    Eigen::MatrixXd z_rec(n_records, n_points);
    Eigen::MatrixXd p_rec(n_records, n_points);
    std::vector<Eigen::Index> alive_records(ens.points.size(), n_records);

    EnsembleResult result{ens, ObservableSeries(classical_series_columns()), std::vector<bool>(ens.points.size(), false)};

    auto run_point = [&](Eigen::Index i) {
        PhasePoint x = ens.points[static_cast<std::size_t>(i)];
        Eigen::Index r = 0;
        z_rec(r, i) = x.z;
        p_rec(r, i) = x.p;
        try {
            for (long k = 1; k <= steps; ++k) {
                x = stepped.mode == MirrorMode::SoftMirror ? step_soft(x, params, stepped.dt) : step_hardwall(x, params, stepped);
                if (k == steps) x.t = t_final;
                if (k == record_steps[static_cast<std::size_t>(r + 1)]) {
                    ++r;
                    z_rec(r, i) = x.z;
                    p_rec(r, i) = x.p;
                }
            }
        } catch (const Error&) {
            alive_records[static_cast<std::size_t>(i)] = r + 1;
        }
        result.ensemble.points[static_cast<std::size_t>(i)] = x;
    };

    const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n_points)));
    if (workers == 1) {
        for (Eigen::Index i = 0; i < n_points; ++i) run_point(i);
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                for (Eigen::Index i = w; i < n_points; i += workers) run_point(i);
            });
        }
    }

    for (Eigen::Index r = 0; r < n_records; ++r) {
        double sz = 0.0, sp = 0.0, sa = 0.0, s2 = 0.0;
        Eigen::Index active = 0;
        for (Eigen::Index i = 0; i < n_points; ++i) {
            if (r >= alive_records[static_cast<std::size_t>(i)]) continue;
            const double p = p_rec(r, i);
            sz += z_rec(r, i);
            sp += p;
            sa += std::abs(p);
            s2 += p * p;
            ++active;
        }
        const double inv = active > 0 ? 1.0 / static_cast<double>(active) : 0.0;
        const double mean_p = sp * inv;
        const double mean_p2 = s2 * inv;
        const double t = r + 1 == n_records ? t_final : t0 + stepped.dt * static_cast<double>(record_steps[static_cast<std::size_t>(r)]);
        result.series.append(t, {sz * inv, mean_p, sa * inv, mean_p2, mean_p2 - mean_p * mean_p, static_cast<double>(active),
                                 1.0 - static_cast<double>(active) / static_cast<double>(n_points)});
    }

    std::size_t failures = 0;
    for (std::size_t i = 0; i < alive_records.size(); ++i) {
        result.failed[i] = alive_records[i] < n_records;
        failures += result.failed[i] ? 1 : 0;
    }
    const double fraction = static_cast<double>(failures) / static_cast<double>(n_points);
    if (fraction > cfg.max_failure_fraction) {
        std::ostringstream msg;
        msg << failures << " of " << n_points << " trajectories failed (limit " << cfg.max_failure_fraction << ")";
        throw NumericalFailure(msg.str());
    }
    return result;
}

}  // namespace fermi
