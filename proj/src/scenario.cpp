#include "fermi/scenario.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <limits>
#include <ostream>
#include <sstream>
#include <thread>

#include "fermi/errors.hpp"
#include "fermi/output.hpp"

#ifndef FERMI_FFT_BACKEND
#define FERMI_FFT_BACKEND "kissfft"
#endif

namespace fermi {

namespace {

constexpr const char* kVersion = "0.1.0";

Eigen::Index raster_block(Eigen::Index n, long rows) {
    Eigen::Index block = 1;
    while (block * 2 <= n / std::max<long>(1, rows)) block *= 2;
    return block;
}

std::string error_kind(int code) {
    switch (code) {
        case kExitConfig: return "config_error";
        case kExitNumerical: return "numerical_failure";
        case kExitLeakage: return "leakage_abort";
        default: return "error";
    }
}

void write_error(const std::filesystem::path& dir, int code, const std::string& message) {
    nlohmann::json record{{"exit_code", code}, {"kind", error_kind(code)}, {"message", message}};
    write_text(dir / "error.json", record.dump(2) + "\n");
}

std::string quantum_plot_script() {
    return "# gnuplot script for a quantum run\n"
           "set datafile separator ','\n"
           "set terminal pngcairo size 900,600\n"
           "set output 'var_p.png'\n"
           "set xlabel 't'; set ylabel 'Delta p^2'\n"
           "plot 'series.csv' using 1:5 skip 1 with lines title 'var_p'\n"
           "set output 'marginal_p.png'\n"
           "set xlabel 'p'; set ylabel 'P(p)'; set logscale y\n"
           "plot 'marginal_p.csv' using 1:2 skip 1 with lines title 'momentum marginal'\n"
           "unset logscale y\n"
           "set output 'marginal_z.png'\n"
           "set xlabel 'z'; set ylabel 'P(z)'\n"
           "plot 'marginal_z.csv' using 1:2 skip 1 with lines title 'position marginal'\n"
           "# raster.pgm: columns are time, rows are z (top = highest z); axes in raster_axes.csv\n";
}

std::string classical_plot_script() {
    return "# gnuplot script for a classical run\n"
           "set datafile separator ','\n"
           "set terminal pngcairo size 900,600\n"
           "set output 'moments.png'\n"
           "set xlabel 't'\n"
           "plot 'series.csv' using 1:4 skip 1 with lines title '<|p|>', '' using 1:6 skip 1 with lines title 'var_p'\n"
           "set output 'phase_space.png'\n"
           "set xlabel 'z'; set ylabel 'p'\n"
           "plot 'ensemble.csv' using 1:2 skip 1 with dots title 'final ensemble'\n";
}

std::string windows_plot_script() {
    return "# gnuplot script for windows.csv\n"
           "set datafile separator ','\n"
           "set terminal pngcairo size 900,300\n"
           "set output 'windows.png'\n"
           "set xlabel 'lambda'; set yrange [-0.5:2.5]; set ytics ('Localization' 0, 'Acceleration' 1, 'Overlap' 2)\n"
           "kind(s) = s eq 'Localization' ? 0 : (s eq 'Acceleration' ? 1 : 2)\n"
           "plot 'windows.csv' using 3:(kind(strcol(1))):3:4:(kind(strcol(1))):(kind(strcol(1))) skip 1 with xyerrorbars notitle\n";
}

std::string sweep_plot_script(const std::string& param) {
    return "# gnuplot script for a sweep\n"
           "set datafile separator ','\n"
           "set terminal pngcairo size 900,600\n"
           "set output 'saturation.png'\n"
           "set xlabel '" + param + "'; set ylabel 'saturation ratio'\n"
           "plot 'summary.csv' using 1:3 skip 1 with linespoints notitle\n";
}

struct CellResult {
    double value = 0.0;
    int status = kExitOk;
    std::optional<SaturationMetric> saturation;
    double final_var_p = std::numeric_limits<double>::quiet_NaN();
    double spikes = std::numeric_limits<double>::quiet_NaN();
};

void write_quantum(const RunConfig& config, const std::filesystem::path& dir, CellResult& cell) {
    const QuantumRun q = run_quantum(config);
    write_series_csv(dir / "series.csv", q.propagation.series);
    write_marginal_csv(dir / "marginal_p.csv", q.marginal_p);
    write_marginal_csv(dir / "marginal_z.csv", q.marginal_z);
    write_spikes_csv(dir / "spikes.csv", q.spikes);
    write_raster_pgm(dir / "raster.pgm", q.raster);
    write_raster_axes(dir / "raster_axes.csv", q.raster);
    write_text(dir / "plot.gp", quantum_plot_script());
    cell.saturation = q.saturation;
    cell.final_var_p = q.propagation.series.column("var_p").back();
    cell.spikes = static_cast<double>(q.spikes.peaks.size());
}

void write_classical(const RunConfig& config, const std::filesystem::path& dir, CellResult& cell) {
    const ClassicalRun c = run_classical(config);
    write_series_csv(dir / "series.csv", c.evolution.series);
    write_marginal_csv(dir / "marginal_p.csv", c.marginal_p);
    write_marginal_csv(dir / "marginal_z.csv", c.marginal_z);
    std::vector<double> z, p, t, failed;
    for (std::size_t i = 0; i < c.evolution.ensemble.points.size(); ++i) {
        const PhasePoint& x = c.evolution.ensemble.points[i];
        z.push_back(x.z);
        p.push_back(x.p);
        t.push_back(x.t);
        failed.push_back(c.evolution.failed[i] ? 1.0 : 0.0);
    }
    write_csv(dir / "ensemble.csv", {"z", "p", "t", "failed"}, {z, p, t, failed});
    write_text(dir / "plot.gp", classical_plot_script());
    cell.saturation = c.saturation;
    cell.final_var_p = c.evolution.series.column("var_p").back();
}

void write_windows(const RunConfig& config, const std::filesystem::path& dir) {
    const DimensionlessParams p = config.effective_params();
    write_windows_csv(dir / "windows.csv", window_table(p.kbar, config.s_max), p.lambda);
    write_text(dir / "plot.gp", windows_plot_script());
}

void write_convert(const RunConfig& config, const std::filesystem::path& dir) {
    const DimensionlessParams p = config.effective_params();
    write_csv(dir / "dimensionless.csv", {"lambda", "kappa", "v0", "kbar"}, {{p.lambda}, {p.kappa}, {p.v0}, {p.kbar}});
    write_windows(config, dir);
}

/// Runs one non-sweep mode; exceptions propagate.
void execute(const RunConfig& config, const std::filesystem::path& dir, CellResult& cell) {
    std::filesystem::create_directories(dir);
    write_text(dir / "manifest", manifest_text(config));
    switch (config.mode) {
        case RunMode::Windows: write_windows(config, dir); break;
        case RunMode::Convert: write_convert(config, dir); break;
        case RunMode::Quantum: write_quantum(config, dir, cell); break;
        case RunMode::Classical: write_classical(config, dir, cell); break;
        case RunMode::Sweep: throw ConfigError("nested sweeps are not supported");
    }
}

int guarded(const std::filesystem::path& dir, std::ostream& log, const std::function<void()>& body) {
    try {
        body();
        return kExitOk;
    } catch (const std::exception& e) {
        const int code = exit_code_for(e);
        std::error_code ec;
        std::filesystem::create_directories(dir, ec);
        if (!ec) write_error(dir, code, e.what());
        log << "error (" << error_kind(code) << "): " << e.what() << '\n';
        return code;
    }
}

std::string cell_name(SweepParameter parameter, double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s_%g", parameter == SweepParameter::Kbar ? "kbar" : "lambda", value);
    return buf;
}

int run_sweep(const RunConfig& config, const std::filesystem::path& dir, std::ostream& log) {
    std::vector<double> values = config.sweep.values;
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());

    std::vector<CellResult> cells(values.size());
    std::vector<std::string> messages(values.size());
    const unsigned workers = std::max(1u, std::min<unsigned>(config.threads, static_cast<unsigned>(values.size())));

    auto run_cell = [&](std::size_t i) {
        RunConfig cell = config;
        cell.mode = config.sweep.base;
        cell.params = config.effective_params();
        cell.style = ParamStyle::Dimensionless;
        (config.sweep.parameter == SweepParameter::Kbar ? cell.params.kbar : cell.params.lambda) = values[i];
        if (workers > 1) cell.threads = 1;
        cells[i].value = values[i];
        std::ostringstream cell_log;
        const auto cell_dir = dir / cell_name(config.sweep.parameter, values[i]);
        cells[i].status = guarded(cell_dir, cell_log, [&] { execute(cell, cell_dir, cells[i]); });
        messages[i] = cell_log.str();
    };

    if (workers == 1) {
        for (std::size_t i = 0; i < values.size(); ++i) run_cell(i);
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                for (std::size_t i = w; i < values.size(); i += workers) run_cell(i);
            });
        }
    }

    int status = kExitOk;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> v, st, ratio, early, late, var, spikes;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const CellResult& c = cells[i];
        log << messages[i];
        if (status == kExitOk) status = c.status;
        v.push_back(c.value);
        st.push_back(c.status);
        ratio.push_back(c.saturation ? c.saturation->saturation_ratio : nan);
        early.push_back(c.saturation ? c.saturation->slope_early : nan);
        late.push_back(c.saturation ? c.saturation->slope_late : nan);
        var.push_back(c.final_var_p);
        spikes.push_back(c.spikes);
    }
    const std::string param = config.sweep.parameter == SweepParameter::Kbar ? "kbar" : "lambda";
    write_csv(dir / "summary.csv", {param, "status", "saturation_ratio", "slope_early", "slope_late", "final_var_p", "spikes"},
              {v, st, ratio, early, late, var, spikes});
    write_text(dir / "plot.gp", sweep_plot_script(param));
    return status;
}

}  // namespace

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const LeakageAbort*>(&e)) return kExitLeakage;
    if (dynamic_cast<const NumericalFailure*>(&e)) return kExitNumerical;
    if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const InvalidParameter*>(&e)) return kExitConfig;
    return kExitNumerical;
}

std::vector<Window> window_table(double kbar, double s_max) {
    std::vector<Window> out{localization_window(kbar)};
    const int max_half = s_max >= 0.5 ? Branch(s_max).half_units() : 0;
    for (int h = 1; h <= max_half; ++h) out.push_back(acceleration_window(Branch::from_half_units(h)));
    for (int h = 1; h <= max_half; ++h) out.push_back(overlap_window(kbar, Branch::from_half_units(h)));
    return out;
}

QuantumRun run_quantum(const RunConfig& config) {
    const DimensionlessParams params = config.effective_params();
    GridState initial = init_gaussian(config.grid, config.quantum.z0, config.quantum.p0,
                                      config.quantum.resolved_width(params.kbar), params);

    RasterBuilder raster(raster_block(config.grid.n, config.quantum.raster_rows));
    Recorder recorder;
    recorder.every = config.quantum.record_every;
    recorder.snapshot_every = config.quantum.raster_every;
    recorder.on_snapshot = [&](const GridState& s) { raster.add(s); };

    QuantumRun out{propagate(std::move(initial), config.propagator, config.t_final, recorder), {}, {}, {}, {}, std::nullopt};
    const GridState& final_state = out.propagation.state;
    out.marginal_p = momentum_marginal(final_state);
    out.marginal_z = position_marginal(final_state);
    const Eigen::Index separation = config.quantum.spike_min_separation > 0 ? config.quantum.spike_min_separation
                                                                            : default_min_separation(config.grid.n);
    out.spikes = detect_spikes(out.marginal_p, config.quantum.spike_ratio, separation);
    out.raster = raster.build();
    const auto& t = out.propagation.series.times();
    if (t.size() >= 4 && t.back() - t.front() >= 8.0 * std::numbers::pi) {
        out.saturation = saturation_metric(out.propagation.series, "var_p");
    }
    return out;
}

Marginal histogram(const std::vector<double>& values, long bins, Axis axis, double t) {
    if (bins < 1) throw InvalidParameter("histogram needs at least one bin");
    Marginal m{axis, Eigen::ArrayXd(bins), Eigen::ArrayXd::Zero(bins), t};
    if (values.empty()) return m;
    const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    double lo = *lo_it;
    double hi = *hi_it;
    if (!(hi > lo)) {
        lo -= 0.5;
        hi += 0.5;
    }
    const double width = (hi - lo) / static_cast<double>(bins);
    for (long b = 0; b < bins; ++b) m.bin_centers[b] = lo + (static_cast<double>(b) + 0.5) * width;
    for (double v : values) {
        const auto b = std::min<long>(bins - 1, static_cast<long>((v - lo) / width));
        m.density[b] += 1.0;
    }
    m.density /= static_cast<double>(values.size()) * width;
    return m;
}

ClassicalRun run_classical(const RunConfig& config) {
    const DimensionlessParams params = config.effective_params();
    ClassicalRun out;
    out.init = classical_descriptor(config);
    const Ensemble ens = sample_initial(out.init, config.classical.n, config.seed, params.lambda);
    const double t_final = out.init.t0 + config.t_final;
    out.evolution = evolve_ensemble(ens, params, config.integrator, t_final, config.classical.record_every, config.threads);

    std::vector<double> z, p;
    for (std::size_t i = 0; i < out.evolution.ensemble.points.size(); ++i) {
        if (out.evolution.failed[i]) continue;
        z.push_back(out.evolution.ensemble.points[i].z);
        p.push_back(out.evolution.ensemble.points[i].p);
    }
    out.marginal_p = histogram(p, config.classical.histogram_bins, Axis::Momentum, t_final);
    out.marginal_z = histogram(z, config.classical.histogram_bins, Axis::Position, t_final);
    const auto& t = out.evolution.series.times();
    if (t.size() >= 4 && t.back() - t.front() >= 8.0 * std::numbers::pi) {
        out.saturation = saturation_metric(out.evolution.series, "var_p");
    }
    return out;
}

std::string manifest_text(const RunConfig& config) {
    std::ostringstream meta;
    meta << "\n[meta]\n"
         << "version = " << kVersion << '\n'
         << "fft_backend = " << FERMI_FFT_BACKEND << '\n'
         << "eigen = " << EIGEN_WORLD_VERSION << '.' << EIGEN_MAJOR_VERSION << '.' << EIGEN_MINOR_VERSION << '\n'
         << "seed = " << config.seed << '\n';
    try {
        const DimensionlessParams p = config.effective_params();
        meta << "lambda = " << format_real(p.lambda) << '\n'
             << "kappa = " << format_real(p.kappa) << '\n'
             << "v0 = " << format_real(p.v0) << '\n'
             << "kbar = " << format_real(p.kbar) << '\n';
        if (config.mode == RunMode::Quantum || (config.mode == RunMode::Sweep && config.sweep.base == RunMode::Quantum)) {
            meta << "packet_width = " << format_real(config.quantum.resolved_width(p.kbar)) << '\n';
        }
        if (config.mode == RunMode::Classical && config.classical.init == ClassicalInit::Accelerator) {
            const InitDescriptor d = classical_descriptor(config);
            meta << "seed_t0 = " << format_real(d.t0) << '\n'
                 << "seed_z0 = " << format_real(d.z0) << '\n'
                 << "seed_p0 = " << format_real(d.p0) << '\n';
        }
    } catch (const Error&) {
        // Invalid parameters are reported by the run itself.
    }
    return format_config(config) + meta.str();
}

int run(const RunConfig& config, const std::filesystem::path& out_dir, std::ostream& log) {
    if (config.mode == RunMode::Sweep) {
        int status = kExitOk;
        const int setup = guarded(out_dir, log, [&] {
            std::filesystem::create_directories(out_dir);
            write_text(out_dir / "manifest", manifest_text(config));
            status = run_sweep(config, out_dir, log);
        });
        return setup != kExitOk ? setup : status;
    }
    CellResult cell;
    return guarded(out_dir, log, [&] { execute(config, out_dir, cell); });
}

}  // namespace fermi
