#ifndef FERMI_SCENARIO_HPP
#define FERMI_SCENARIO_HPP

#include <exception>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

#include "fermi/classical.hpp"
#include "fermi/config.hpp"
#include "fermi/observables.hpp"
#include "fermi/quantum.hpp"

namespace fermi {

enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitNumerical = 3, kExitLeakage = 4 };

/// Maps a failure onto the CLI exit-code contract.
int exit_code_for(const std::exception& e);

/// Localization window, then acceleration and overlap windows for s = 0.5 .. s_max.
std::vector<Window> window_table(double kbar, double s_max);

struct QuantumRun {
    PropagationResult propagation;
    Marginal marginal_p;
    Marginal marginal_z;
    SpikeReport spikes;
    Raster raster;
    std::optional<SaturationMetric> saturation;  // absent for runs shorter than four periods
};

/// Gaussian packet at (quantum.z0, quantum.p0) propagated to run.t_final on the configured grid.
QuantumRun run_quantum(const RunConfig& config);

struct ClassicalRun {
    InitDescriptor init;
    EnsembleResult evolution;
    Marginal marginal_p;
    Marginal marginal_z;
    std::optional<SaturationMetric> saturation;
};

ClassicalRun run_classical(const RunConfig& config);

/// Normalized histogram of the values over [min, max].
Marginal histogram(const std::vector<double>& values, long bins, Axis axis, double t);

/// Resolved configuration followed by a [meta] section.
std::string manifest_text(const RunConfig& config);

/// Executes the configured mode and writes its artifacts under out_dir. Module failures are
/// reported through error.json and the returned exit code rather than thrown.
int run(const RunConfig& config, const std::filesystem::path& out_dir, std::ostream& log);

}  // namespace fermi

#endif  // FERMI_SCENARIO_HPP
