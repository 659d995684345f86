#ifndef FERMI_OBSERVABLES_HPP
#define FERMI_OBSERVABLES_HPP

#include <Eigen/Core>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fermi/classical.hpp"
#include "fermi/quantum.hpp"
#include "fermi/series.hpp"

namespace fermi {

enum class Axis { Position, Momentum };

/// Probability density on uniformly spaced bin centres.
struct Marginal {
    Axis axis = Axis::Position;
    Eigen::ArrayXd bin_centers;
    Eigen::ArrayXd density;
    double t = 0.0;

    double bin_width() const { return bin_centers.size() > 1 ? bin_centers[1] - bin_centers[0] : 1.0; }
    double total() const { return density.sum() * bin_width(); }
    double mean() const;
    double variance() const;
};

/// |psi(z)|^2 on the position grid.
Marginal position_marginal(const GridState& state);

/// |psi~(p)|^2 on the ascending momentum grid, scaled so that it integrates to the state norm.
Marginal momentum_marginal(const GridState& state);

/// Merges `factor` adjacent bins by averaging; total probability is unchanged.
Marginal rebin(const Marginal& m, Eigen::Index factor);

/// <p^2> - <p>^2 from the momentum-space representation.
double variance_p(const GridState& state);
/// Population variance of the momenta (failed points are the caller's business).
double variance_p(const Ensemble& ensemble);

struct Spike {
    double location;
    double height;
    double background_ratio;
};

struct SpikeReport {
    std::vector<Spike> peaks;
    double background_level = 0.0;
};

inline constexpr double kDefaultSpikeRatio = 5.0;
/// Probability excluded from each tail when delimiting the support of a marginal.
inline constexpr double kSupportTail = 1e-6;

/// Default minimum peak separation, ceil(n / 256) bins.
Eigen::Index default_min_separation(Eigen::Index bins);

/// Local maxima exceeding threshold_ratio times the median density over the support
/// (the central interval holding all but kSupportTail of the probability in each tail),
/// pruned greedily by height so that kept peaks are at least min_separation bins apart.
/// Peaks are reported in ascending location order.
SpikeReport detect_spikes(const Marginal& m, double threshold_ratio = kDefaultSpikeRatio, Eigen::Index min_separation = 1);

struct SaturationMetric {
    double slope_early = 0.0;
    double slope_late = 0.0;
    double saturation_ratio = 0.0;
    bool early_floored = false;
};

/// Floor applied to |slope_early| before dividing.
inline constexpr double kSlopeFloor = 1e-12;

/// Least-squares slopes of `column` over the first and second halves of the time span
/// (split at the midpoint time). Requires a span of at least four modulation periods.
SaturationMetric saturation_metric(const ObservableSeries& series, const std::string& column);

/// P(z, t): one column per snapshot, rows block-averaged in z by `block`.
struct Raster {
    Eigen::ArrayXd t_axis;
    Eigen::ArrayXd z_axis;
    Eigen::MatrixXd values;  // rows: z, columns: t

    double dz() const { return z_axis.size() > 1 ? z_axis[1] - z_axis[0] : 1.0; }
};

/// Incrementally assembles a raster from equally spaced snapshots on one grid.
class RasterBuilder {
public:
    explicit RasterBuilder(Eigen::Index block = 1);
    /// Throws InvalidParameter on a grid change or uneven time spacing.
    void add(const GridState& state);
    Raster build() const;
    std::size_t size() const { return columns_.size(); }

private:
    Eigen::Index block_;
    std::optional<GridSpec> spec_;
    std::vector<double> times_;
    std::vector<Eigen::ArrayXd> columns_;
};

Raster position_raster(std::span<const GridState> snapshots, Eigen::Index block = 1);

struct BounceApexes {
    std::vector<double> contact_times;
    std::vector<double> apex_times;
    std::vector<double> apex_heights;
};

/// Ridge of maximum density per raster column, z_ridge(t).
Eigen::ArrayXd ridge(const Raster& raster);

/// Splits a height trace into flights between wall contacts and returns the apex of each
/// complete flight. A contact is a local minimum of the trace below `contact_height`.
BounceApexes bounce_apexes(std::span<const double> times, std::span<const double> heights, double contact_height);

}  // namespace fermi

#endif  // FERMI_OBSERVABLES_HPP
