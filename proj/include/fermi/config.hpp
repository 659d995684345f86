#ifndef FERMI_CONFIG_HPP
#define FERMI_CONFIG_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fermi/classical.hpp"
#include "fermi/model.hpp"
#include "fermi/observables.hpp"
#include "fermi/quantum.hpp"

namespace fermi {

enum class RunMode { Windows, Convert, Classical, Quantum, Sweep };
enum class ParamStyle { Dimensionless, Lab };
enum class ClassicalInit { Accelerator, Gaussian, Patch };
enum class SweepParameter { Kbar, Lambda };

std::string_view to_string(RunMode mode);
/// Throws ConfigError for unknown names.
RunMode parse_run_mode(std::string_view name);

struct QuantumScenario {
    double z0 = 40.0;
    double p0 = 0.0;
    /// Packet width; empty means sqrt(kbar / 2).
    std::optional<double> width;
    long record_every = 200;
    long raster_every = 200;
    /// Rows of the raster after block averaging in z.
    long raster_rows = 1024;
    double spike_ratio = kDefaultSpikeRatio;
    /// Zero selects ceil(n / 256) bins.
    long spike_min_separation = 0;
    double resolved_width(double kbar) const;
    bool operator==(const QuantumScenario&) const = default;
};

struct ClassicalScenario {
    ClassicalInit init = ClassicalInit::Accelerator;
    std::size_t n = 1000;
    /// Accelerator seeding: branch, bounce order and delay after the seeding impact.
    double branch = 0.5;
    int order = 2;
    double delay = 0.1;
    /// Gaussian standard deviations or patch half-widths.
    double width_z = 0.05;
    double width_p = 0.05;
    double z0 = 40.0;
    double p0 = 0.0;
    double t0 = 0.0;
    long record_every = 100;
    long histogram_bins = 512;
    bool operator==(const ClassicalScenario&) const = default;
};

struct SweepBlock {
    RunMode base = RunMode::Quantum;
    SweepParameter parameter = SweepParameter::Kbar;
    std::vector<double> values{1.0, 4.0, 8.0, 12.0, 14.0};
    bool operator==(const SweepBlock&) const = default;
};

/// Fully resolved run description; every field has a documented default.
struct RunConfig {
    RunMode mode = RunMode::Quantum;
    ParamStyle style = ParamStyle::Dimensionless;
    DimensionlessParams params{1.7, 2.0, 50.0, 14.0};
    LabParams lab;
    GridSpec grid;
    PropagatorConfig propagator;
    IntegratorConfig integrator;
    QuantumScenario quantum;
    ClassicalScenario classical;
    SweepBlock sweep;
    double s_max = 2.0;
    double t_final = 1000.0;
    std::uint64_t seed = 1;
    unsigned threads = 1;

    /// Dimensionless parameters in effect (converted from the lab block when style == Lab).
    DimensionlessParams effective_params() const;
    /// Throws ConfigError naming the offending key.
    void validate() const;
    bool operator==(const RunConfig&) const = default;
};

/// Parses `section.key = value` lines (or `key = value` under a `[section]` header) with `#`
/// comments. Unknown keys are errors; a `meta` section is accepted and ignored.
RunConfig parse_config(std::string_view text);

/// Every key with its resolved value, 17 significant digits for reals. parse_config of the
/// result reproduces `config`.
std::string format_config(const RunConfig& config, bool with_comments = false);

/// Default configuration with a comment per key.
std::string default_config_text();

/// Initial classical descriptor for the scenario (accelerator seeding resolves the impact phase).
InitDescriptor classical_descriptor(const RunConfig& config);

}  // namespace fermi

#endif  // FERMI_CONFIG_HPP
