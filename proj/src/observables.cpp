#include "fermi/observables.hpp"

#include <unsupported/Eigen/FFT>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "fermi/errors.hpp"

namespace fermi {

double Marginal::mean() const {
    const double mass = density.sum();
    return (density * bin_centers).sum() / mass;
}

double Marginal::variance() const {
    const double mass = density.sum();
    const double mu = (density * bin_centers).sum() / mass;
    return (density * (bin_centers - mu).square()).sum() / mass;
}

Marginal position_marginal(const GridState& state) {
    return {Axis::Position, state.spec.positions(), state.density(), state.t};
}

Marginal momentum_marginal(const GridState& state) {
    const GridSpec& g = state.spec;
    Eigen::FFT<double> fft;
    Eigen::VectorXcd spectrum(g.n);
    fft.fwd(spectrum, state.amplitudes);

    const double dp = g.dp(state.params.kbar);
    const double scale = g.dz() / (static_cast<double>(g.n) * dp);
    Marginal m{Axis::Momentum, g.momenta_sorted(state.params.kbar), Eigen::ArrayXd(g.n), state.t};
    const Eigen::Index half = g.n / 2;
    for (Eigen::Index k = 0; k < g.n; ++k) {
        // Ascending bin k holds p = dp (k - n/2), stored at transform index (k - n/2) mod n.
        const Eigen::Index j = (k + half) % g.n;
        m.density[k] = std::norm(spectrum[j]) * scale;
    }
    return m;
}

Marginal rebin(const Marginal& m, Eigen::Index factor) {
    const Eigen::Index n = m.density.size();
    if (factor < 1 || n % factor != 0) throw InvalidParameter("rebin factor must divide the bin count");
    const Eigen::Index out_n = n / factor;
    Marginal out{m.axis, Eigen::ArrayXd(out_n), Eigen::ArrayXd(out_n), m.t};
    for (Eigen::Index b = 0; b < out_n; ++b) {
        out.bin_centers[b] = m.bin_centers.segment(b * factor, factor).mean();
        out.density[b] = m.density.segment(b * factor, factor).mean();
    }
    return out;
}

double variance_p(const GridState& state) { return momentum_moments(state).variance(); }

double variance_p(const Ensemble& ensemble) {
    if (ensemble.points.empty()) throw InvalidParameter("ensemble is empty");
    double mean = 0.0;
    for (const PhasePoint& x : ensemble.points) mean += x.p;
    mean /= static_cast<double>(ensemble.points.size());
    double acc = 0.0;
    for (const PhasePoint& x : ensemble.points) acc += (x.p - mean) * (x.p - mean);
    return acc / static_cast<double>(ensemble.points.size());
}

Eigen::Index default_min_separation(Eigen::Index bins) { return std::max<Eigen::Index>(1, (bins + 255) / 256); }

SpikeReport detect_spikes(const Marginal& m, double threshold_ratio, Eigen::Index min_separation) {
    if (!(threshold_ratio > 1.0)) throw InvalidParameter("spike threshold ratio must exceed 1");
    if (min_separation < 1) throw InvalidParameter("min_separation must be >= 1 bin");
    const Eigen::ArrayXd& rho = m.density;
    const Eigen::Index n = rho.size();
    SpikeReport report;
    const double total = rho.sum();
    if (n == 0 || !(total > 0.0)) return report;

    // Support: central interval leaving kSupportTail of the mass out of each tail.
    Eigen::Index lo = 0;
    for (double acc = 0.0; lo < n - 1 && acc + rho[lo] < kSupportTail * total; ++lo) acc += rho[lo];
    Eigen::Index hi = n - 1;
    for (double acc = 0.0; hi > lo && acc + rho[hi] < kSupportTail * total; --hi) acc += rho[hi];

    std::vector<double> support(rho.data() + lo, rho.data() + hi + 1);
    const auto mid = support.begin() + static_cast<std::ptrdiff_t>(support.size() / 2);
    std::nth_element(support.begin(), mid, support.end());
    double background = *mid;
    if (!(background > 0.0)) {
        background = std::numeric_limits<double>::max();
        for (Eigen::Index i = lo; i <= hi; ++i) {
            if (rho[i] > 0.0) background = std::min(background, rho[i]);
        }
    }
    report.background_level = background;

    std::vector<Eigen::Index> candidates;
    for (Eigen::Index i = lo; i <= hi; ++i) {
        const bool rises = i == 0 || rho[i] > rho[i - 1];
        const bool holds = i == n - 1 || rho[i] >= rho[i + 1];
        if (rises && holds && rho[i] >= threshold_ratio * background) candidates.push_back(i);
    }
    std::stable_sort(candidates.begin(), candidates.end(), [&](Eigen::Index a, Eigen::Index b) { return rho[a] > rho[b]; });

    std::vector<Eigen::Index> kept;
    for (Eigen::Index c : candidates) {
        const bool clear = std::all_of(kept.begin(), kept.end(), [&](Eigen::Index k) { return std::abs(k - c) >= min_separation; });
        if (clear) kept.push_back(c);
    }
    std::sort(kept.begin(), kept.end());
    for (Eigen::Index k : kept) report.peaks.push_back({m.bin_centers[k], rho[k], rho[k] / background});
    return report;
}

namespace {

double least_squares_slope(const std::vector<double>& t, const std::vector<double>& y) {
    const double n = static_cast<double>(t.size());
    const double t_mean = std::accumulate(t.begin(), t.end(), 0.0) / n;
    const double y_mean = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        num += (t[i] - t_mean) * (y[i] - y_mean);
        den += (t[i] - t_mean) * (t[i] - t_mean);
    }
    return num / den;
}

}  // namespace

SaturationMetric saturation_metric(const ObservableSeries& series, const std::string& column) {
    const auto& t = series.times();
    const auto& y = series.column(column);
    if (t.size() < 4 || t.back() - t.front() < 4.0 * 2.0 * std::numbers::pi) {
        throw InvalidParameter("saturation metric needs a series spanning at least four modulation periods");
    }
    const double t_mid = 0.5 * (t.front() + t.back());
    std::vector<double> t_early, y_early, t_late, y_late;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] <= t_mid) {
            t_early.push_back(t[i]);
            y_early.push_back(y[i]);
        }
        if (t[i] >= t_mid) {
            t_late.push_back(t[i]);
            y_late.push_back(y[i]);
        }
    }
    if (t_early.size() < 2 || t_late.size() < 2) throw InvalidParameter("each half of the series needs two samples");

    SaturationMetric out;
    out.slope_early = least_squares_slope(t_early, y_early);
    out.slope_late = least_squares_slope(t_late, y_late);
    double denom = out.slope_early;
    if (std::abs(denom) < kSlopeFloor) {
        denom = std::copysign(kSlopeFloor, denom);
        out.early_floored = true;
    }
    out.saturation_ratio = out.slope_late / denom;
    return out;
}

RasterBuilder::RasterBuilder(Eigen::Index block) : block_(block) {
    if (block < 1) throw InvalidParameter("raster block must be >= 1");
}

void RasterBuilder::add(const GridState& state) {
    if (!spec_) {
        if (state.spec.n % block_ != 0) throw InvalidParameter("raster block must divide the grid size");
        spec_ = state.spec;
    } else if (state.spec != *spec_) {
        throw InvalidParameter("raster snapshots must share one grid");
    }
    if (times_.size() >= 2) {
        const double spacing = times_[1] - times_[0];
        const double expected = times_.back() + spacing;
        if (std::abs(state.t - expected) > 1e-9 * std::max(1.0, std::abs(expected))) {
            throw InvalidParameter("raster snapshots must be equally spaced in time");
        }
    } else if (!times_.empty() && !(state.t > times_.back())) {
        throw InvalidParameter("raster snapshots must advance in time");
    }
    const Eigen::ArrayXd rho = state.density();
    const Eigen::Index rows = rho.size() / block_;
    Eigen::ArrayXd column(rows);
    for (Eigen::Index r = 0; r < rows; ++r) column[r] = rho.segment(r * block_, block_).mean();
    times_.push_back(state.t);
    columns_.push_back(std::move(column));
}

Raster RasterBuilder::build() const {
    Raster out;
    if (columns_.empty()) return out;
    const Eigen::Index rows = columns_.front().size();
    const Eigen::ArrayXd z = spec_->positions();
    out.z_axis.resize(rows);
    for (Eigen::Index r = 0; r < rows; ++r) out.z_axis[r] = z.segment(r * block_, block_).mean();
    out.t_axis = Eigen::Map<const Eigen::ArrayXd>(times_.data(), static_cast<Eigen::Index>(times_.size()));
    out.values.resize(rows, static_cast<Eigen::Index>(columns_.size()));
    for (std::size_t c = 0; c < columns_.size(); ++c) out.values.col(static_cast<Eigen::Index>(c)) = columns_[c].matrix();
    return out;
}

Raster position_raster(std::span<const GridState> snapshots, Eigen::Index block) {
    RasterBuilder builder(block);
    for (const GridState& s : snapshots) builder.add(s);
    return builder.build();
}

Eigen::ArrayXd ridge(const Raster& raster) {
    Eigen::ArrayXd out(raster.values.cols());
    for (Eigen::Index c = 0; c < raster.values.cols(); ++c) {
        Eigen::Index r = 0;
        raster.values.col(c).maxCoeff(&r);
        out[c] = raster.z_axis[r];
    }
    return out;
}

BounceApexes bounce_apexes(std::span<const double> times, std::span<const double> heights, double contact_height) {
    if (times.size() != heights.size()) throw InvalidParameter("times and heights differ in length");
    BounceApexes out;
    std::vector<std::size_t> contacts;
    for (std::size_t i = 1; i + 1 < heights.size(); ++i) {
        if (heights[i] < contact_height && heights[i] <= heights[i - 1] && heights[i] < heights[i + 1]) contacts.push_back(i);
    }
    for (std::size_t c : contacts) out.contact_times.push_back(times[c]);
    for (std::size_t k = 0; k + 1 < contacts.size(); ++k) {
        std::size_t best = contacts[k];
        for (std::size_t i = contacts[k]; i <= contacts[k + 1]; ++i) {
            if (heights[i] > heights[best]) best = i;
        }
        out.apex_times.push_back(times[best]);
        out.apex_heights.push_back(heights[best]);
    }
    return out;
}

}  // namespace fermi
