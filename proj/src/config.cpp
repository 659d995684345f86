#include "fermi/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "fermi/errors.hpp"
#include "fermi/output.hpp"

namespace fermi {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double to_real(std::string_view text) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v)) {
        throw InvalidParameter("expected a real number, got '" + std::string(text) + "'");
    }
    return v;
}

template <typename Int>
Int to_integer(std::string_view text) {
    Int v{};
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        throw InvalidParameter("expected an integer, got '" + std::string(text) + "'");
    }
    return v;
}

std::vector<double> to_real_list(std::string_view text) {
    std::vector<double> out;
    while (!text.empty()) {
        const auto comma = text.find(',');
        out.push_back(to_real(trim(text.substr(0, comma))));
        if (comma == std::string_view::npos) break;
        text.remove_prefix(comma + 1);
    }
    if (out.empty()) throw InvalidParameter("expected a comma-separated list of reals");
    return out;
}

std::string format_real_list(const std::vector<double>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) out += (i ? ", " : "") + format_real(values[i]);
    return out;
}

template <typename Enum>
struct EnumNames {
    std::vector<std::pair<Enum, std::string_view>> names;

    Enum parse(std::string_view text) const {
        for (const auto& [value, name] : names) {
            if (name == text) return value;
        }
        std::string options;
        for (const auto& [value, name] : names) options += (options.empty() ? "" : "|") + std::string(name);
        throw InvalidParameter("expected one of " + options + ", got '" + std::string(text) + "'");
    }
    std::string_view name(Enum value) const {
        for (const auto& [v, n] : names) {
            if (v == value) return n;
        }
        return "?";
    }
};

const EnumNames<RunMode> kModes{{{RunMode::Windows, "windows"},
                                  {RunMode::Convert, "convert"},
                                  {RunMode::Classical, "classical"},
                                  {RunMode::Quantum, "quantum"},
                                  {RunMode::Sweep, "sweep"}}};
const EnumNames<Boundary> kBoundaries{{{Boundary::Reflecting, "reflecting"}, {Boundary::Absorber, "absorber"}}};
const EnumNames<MirrorMode> kMirrorModes{{{MirrorMode::SoftMirror, "soft"}, {MirrorMode::HardWall, "hardwall"}}};
const EnumNames<ClassicalInit> kInits{
    {{ClassicalInit::Accelerator, "accelerator"}, {ClassicalInit::Gaussian, "gaussian"}, {ClassicalInit::Patch, "patch"}}};
const EnumNames<SweepParameter> kSweepParams{{{SweepParameter::Kbar, "kbar"}, {SweepParameter::Lambda, "lambda"}}};

using Check = std::function<std::optional<std::string>(const RunConfig&)>;

struct Key {
    std::string section;
    std::string name;
    std::string comment;
    std::function<void(RunConfig&, std::string_view)> set;
    std::function<std::string(const RunConfig&)> get;
    Check check;
    /// Keys belonging to one parameter style are only emitted for that style.
    std::optional<ParamStyle> style;

    std::string full() const { return section + "." + name; }
};

template <typename Get>
Check positive(Get get) {
    return [get](const RunConfig& c) -> std::optional<std::string> {
        if (get(c) > 0) return std::nullopt;
        return "must be > 0";
    };
}

template <typename Get>
Check non_negative(Get get) {
    return [get](const RunConfig& c) -> std::optional<std::string> {
        if (get(c) >= 0) return std::nullopt;
        return "must be >= 0";
    };
}

#define FERMI_REAL(sec, nm, field, chk, doc, ...)                                                       \
    Key {                                                                                              \
        sec, nm, doc, [](RunConfig& c, std::string_view v) { c.field = to_real(v); },                 \
            [](const RunConfig& c) { return format_real(c.field); },                                   \
            chk([](const RunConfig& c) { return c.field; }), __VA_ARGS__                               \
    }

#define FERMI_INT(sec, nm, field, type, chk, doc)                                                       \
    Key {                                                                                              \
        sec, nm, doc, [](RunConfig& c, std::string_view v) { c.field = to_integer<type>(v); },        \
            [](const RunConfig& c) { return std::to_string(c.field); },                                \
            chk([](const RunConfig& c) { return c.field; }), std::nullopt                              \
    }

#define FERMI_ENUM(sec, nm, field, table, doc)                                                           \
    Key {                                                                                               \
        sec, nm, doc, [](RunConfig& c, std::string_view v) { c.field = table.parse(v); },              \
            [](const RunConfig& c) { return std::string(table.name(c.field)); }, Check{}, std::nullopt  \
    }

const std::vector<Key>& key_table() {
    static const std::vector<Key> keys = [] {
        std::vector<Key> k;
        k.push_back(FERMI_ENUM("run", "mode", mode, kModes, "windows | convert | classical | quantum | sweep"));
        k.push_back(FERMI_REAL("run", "t_final", t_final, non_negative, "final scaled time", std::nullopt));
        k.push_back(FERMI_INT("run", "seed", seed, std::uint64_t, non_negative, "ensemble sampling seed"));
        k.push_back(FERMI_INT("run", "threads", threads, unsigned, positive, "worker threads (classical points, sweep cells)"));

        k.push_back(FERMI_REAL("model", "lambda", params.lambda, non_negative, "modulation strength", ParamStyle::Dimensionless));
        k.push_back(FERMI_REAL("model", "kappa", params.kappa, positive, "inverse scaled decay length", ParamStyle::Dimensionless));
        k.push_back(FERMI_REAL("model", "v0", params.v0, non_negative, "scaled mirror height", ParamStyle::Dimensionless));
        k.push_back(FERMI_REAL("model", "kbar", params.kbar, positive, "effective Planck constant", ParamStyle::Dimensionless));

        k.push_back(FERMI_REAL("lab", "mass", lab.mass, positive, "atomic mass, kg", ParamStyle::Lab));
        k.push_back(FERMI_REAL("lab", "omega", lab.omega, positive, "modulation angular frequency, rad/s", ParamStyle::Lab));
        k.push_back(FERMI_REAL("lab", "epsilon", lab.epsilon, positive, "intensity modulation amplitude", ParamStyle::Lab));
        k.push_back(FERMI_REAL("lab", "decay_k", lab.decay_k, positive, "evanescent decay rate, 1/m", ParamStyle::Lab));
        k.push_back(FERMI_REAL("lab", "g", lab.g, positive, "gravitational acceleration, m/s^2", ParamStyle::Lab));
        k.push_back(FERMI_REAL("lab", "hbar", lab.hbar, positive, "reduced Planck constant, J s", ParamStyle::Lab));
        k.push_back(FERMI_REAL("lab", "omega_eff", lab.omega_eff, positive, "effective Rabi frequency, rad/s", ParamStyle::Lab));

        k.push_back(FERMI_REAL("windows", "s_max", s_max, non_negative, "largest acceleration branch listed", std::nullopt));

        k.push_back(FERMI_REAL("grid", "z_min", grid.z_min, [](auto) { return Check{}; }, "lower grid edge", std::nullopt));
        k.push_back(FERMI_REAL("grid", "z_max", grid.z_max, [](auto) { return Check{}; }, "upper grid edge (exclusive)", std::nullopt));
        k.push_back(FERMI_INT("grid", "n", grid.n, Eigen::Index,
                              [](auto get) {
                                  return Check([get](const RunConfig& c) -> std::optional<std::string> {
                                      const auto n = get(c);
                                      if (n >= 2 && (n & (n - 1)) == 0) return std::nullopt;
                                      return "must be a power of two >= 2";
                                  });
                              },
                              "grid points (power of two)"));

        k.push_back(FERMI_REAL("quantum", "dt", propagator.dt, positive, "split-operator time step", std::nullopt));
        k.push_back(FERMI_ENUM("quantum", "boundary", propagator.boundary, kBoundaries, "reflecting | absorber"));
        k.push_back(FERMI_REAL("quantum", "absorber_width", propagator.absorber_width, positive, "absorber band, fraction of grid", std::nullopt));
        k.push_back(FERMI_REAL("quantum", "leak_threshold", propagator.leak_threshold, positive, "edge probability that aborts a reflecting run", std::nullopt));
        k.push_back(FERMI_REAL("quantum", "edge_fraction", propagator.edge_fraction, positive, "monitored edge band, fraction of grid", std::nullopt));
        k.push_back(FERMI_REAL("quantum", "z0", quantum.z0, [](auto) { return Check{}; }, "initial packet centre", std::nullopt));
        k.push_back(FERMI_REAL("quantum", "p0", quantum.p0, [](auto) { return Check{}; }, "initial mean momentum", std::nullopt));
        k.push_back(Key{"quantum", "width", "initial position spread, or auto for sqrt(kbar/2)",
                        [](RunConfig& c, std::string_view v) {
                            if (v == "auto") c.quantum.width.reset();
                            else c.quantum.width = to_real(v);
                        },
                        [](const RunConfig& c) { return c.quantum.width ? format_real(*c.quantum.width) : std::string("auto"); },
                        [](const RunConfig& c) -> std::optional<std::string> {
                            if (!c.quantum.width || *c.quantum.width > 0.0) return std::nullopt;
                            return "must be > 0 or auto";
                        },
                        std::nullopt});
        k.push_back(FERMI_INT("quantum", "record_every", quantum.record_every, long, positive, "steps between series rows"));
        k.push_back(FERMI_INT("quantum", "raster_every", quantum.raster_every, long, positive, "steps between raster columns"));
        k.push_back(FERMI_INT("quantum", "raster_rows", quantum.raster_rows, long, positive, "raster rows after block averaging"));
        k.push_back(FERMI_REAL("quantum", "spike_ratio", quantum.spike_ratio, positive, "spike threshold over the median background", std::nullopt));
        k.push_back(FERMI_INT("quantum", "spike_min_separation", quantum.spike_min_separation, long, non_negative,
                              "minimum spike separation in bins, 0 for ceil(n/256)"));

        k.push_back(FERMI_REAL("classical", "dt", integrator.dt, positive, "step (soft) or recording cadence (hardwall)", std::nullopt));
        k.push_back(FERMI_ENUM("classical", "mode", integrator.mode, kMirrorModes, "soft | hardwall"));
        k.push_back(FERMI_REAL("classical", "event_tol", integrator.event_tol, positive, "impact time tolerance", std::nullopt));
        k.push_back(FERMI_INT("classical", "max_impacts", integrator.max_impacts, int, positive, "impacts per step before chattering"));
        k.push_back(FERMI_REAL("classical", "max_failure_fraction", integrator.max_failure_fraction, non_negative,
                               "tolerated fraction of failed trajectories", std::nullopt));
        k.push_back(FERMI_ENUM("classical", "init", classical.init, kInits, "accelerator | gaussian | patch"));
        k.push_back(FERMI_INT("classical", "n", classical.n, std::size_t, positive, "ensemble size"));
        k.push_back(FERMI_REAL("classical", "branch", classical.branch, positive, "accelerator seeding branch s", std::nullopt));
        k.push_back(FERMI_INT("classical", "order", classical.order, int, positive, "accelerator seeding momentum, in units of pi"));
        k.push_back(FERMI_REAL("classical", "delay", classical.delay, non_negative, "accelerator seeding delay after impact", std::nullopt));
        k.push_back(FERMI_REAL("classical", "width_z", classical.width_z, non_negative, "position spread (sigma or half-width)", std::nullopt));
        k.push_back(FERMI_REAL("classical", "width_p", classical.width_p, non_negative, "momentum spread (sigma or half-width)", std::nullopt));
        k.push_back(FERMI_REAL("classical", "z0", classical.z0, [](auto) { return Check{}; }, "gaussian/patch centre position", std::nullopt));
        k.push_back(FERMI_REAL("classical", "p0", classical.p0, [](auto) { return Check{}; }, "gaussian/patch centre momentum", std::nullopt));
        k.push_back(FERMI_REAL("classical", "t0", classical.t0, [](auto) { return Check{}; }, "gaussian/patch start time", std::nullopt));
        k.push_back(FERMI_INT("classical", "record_every", classical.record_every, long, positive, "steps between series rows"));
        k.push_back(FERMI_INT("classical", "histogram_bins", classical.histogram_bins, long, positive, "bins of the final marginals"));

        k.push_back(FERMI_ENUM("sweep", "base", sweep.base, kModes, "classical | quantum"));
        k.push_back(FERMI_ENUM("sweep", "parameter", sweep.parameter, kSweepParams, "kbar | lambda"));
        k.push_back(Key{"sweep", "values", "comma-separated parameter values",
                        [](RunConfig& c, std::string_view v) { c.sweep.values = to_real_list(v); },
                        [](const RunConfig& c) { return format_real_list(c.sweep.values); }, Check{}, std::nullopt});
        return k;
    }();
    return keys;
}

#undef FERMI_REAL
#undef FERMI_INT
#undef FERMI_ENUM

const Key* find_key(const std::string& full) {
    for (const Key& k : key_table()) {
        if (k.full() == full) return &k;
    }
    return nullptr;
}

}  // namespace

std::string_view to_string(RunMode mode) { return kModes.name(mode); }

RunMode parse_run_mode(std::string_view name) {
    try {
        return kModes.parse(name);
    } catch (const InvalidParameter& e) {
        throw ConfigError(std::string("mode: ") + e.what());
    }
}

double QuantumScenario::resolved_width(double kbar) const { return width ? *width : std::sqrt(kbar / 2.0); }

DimensionlessParams RunConfig::effective_params() const {
    return style == ParamStyle::Lab ? scale_to_dimensionless(lab) : params;
}

void RunConfig::validate() const {
    for (const Key& k : key_table()) {
        if (k.style && *k.style != style) continue;
        if (!k.check) continue;
        if (auto problem = k.check(*this)) throw ConfigError(k.full() + " " + *problem);
    }
    if (!(grid.z_min < grid.z_max)) throw ConfigError("grid.z_max must exceed grid.z_min");
    if (!(propagator.absorber_width < 0.5)) throw ConfigError("quantum.absorber_width must be < 0.5");
    if (!(propagator.edge_fraction < 0.5)) throw ConfigError("quantum.edge_fraction must be < 0.5");
    if (!(integrator.max_failure_fraction <= 1.0)) throw ConfigError("classical.max_failure_fraction must be <= 1");
    try {
        (void)Branch(classical.branch);
    } catch (const InvalidParameter& e) {
        throw ConfigError(std::string("classical.branch: ") + e.what());
    }
    if (s_max > 0.0) {
        try {
            (void)Branch(s_max);
        } catch (const InvalidParameter& e) {
            throw ConfigError(std::string("windows.s_max: ") + e.what());
        }
    }
    if (sweep.base != RunMode::Quantum && sweep.base != RunMode::Classical) {
        throw ConfigError("sweep.base must be quantum or classical");
    }
    for (double v : sweep.values) {
        if (sweep.parameter == SweepParameter::Kbar ? !(v > 0.0) : !(v >= 0.0)) {
            throw ConfigError("sweep.values contains an out-of-range value " + format_real(v));
        }
    }
}

RunConfig parse_config(std::string_view text) {
    RunConfig config;
    std::string section;
    std::set<std::string> seen;
    bool saw_lab = false;
    bool saw_model = false;
    int line_no = 0;

    while (!text.empty()) {
        ++line_no;
        const auto eol = text.find('\n');
        std::string_view line = text.substr(0, eol);
        text.remove_prefix(eol == std::string_view::npos ? text.size() : eol + 1);

        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError("unterminated section header", line_no);
            section = std::string(trim(line.substr(1, line.size() - 2)));
            if (section.empty() || section.find('.') != std::string::npos) {
                throw ConfigError("invalid section name '" + section + "'", line_no);
            }
            continue;
        }

        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ConfigError("expected 'key = value'", line_no);
        std::string key(trim(line.substr(0, eq)));
        const std::string_view value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("missing key before '='", line_no);
        if (key.find('.') == std::string::npos) {
            if (section.empty()) throw ConfigError("key '" + key + "' needs a section", line_no);
            key = section + "." + key;
        }
        if (key.starts_with("meta.")) continue;

        const Key* entry = find_key(key);
        if (!entry) throw ConfigError("unknown key '" + key + "'", line_no);
        if (!seen.insert(key).second) throw ConfigError("duplicate key '" + key + "'", line_no);
        if (value.empty()) throw ConfigError("missing value for '" + key + "'", line_no);
        try {
            entry->set(config, value);
        } catch (const InvalidParameter& e) {
            throw ConfigError(key + ": " + e.what(), line_no);
        }
        saw_lab = saw_lab || entry->section == "lab";
        saw_model = saw_model || entry->section == "model";
    }

    if (saw_lab && saw_model) throw ConfigError("use either the [model] or the [lab] parameter block, not both");
    config.style = saw_lab ? ParamStyle::Lab : ParamStyle::Dimensionless;
    config.validate();
    if (config.style == ParamStyle::Lab) {
        try {
            (void)config.effective_params();
        } catch (const InvalidParameter& e) {
            throw ConfigError(std::string("lab: ") + e.what());
        }
    }
    return config;
}

std::string format_config(const RunConfig& config, bool with_comments) {
    std::ostringstream out;
    std::string section;
    for (const Key& k : key_table()) {
        if (k.style && *k.style != config.style) continue;
        if (k.section != section) {
            if (!section.empty()) out << '\n';
            section = k.section;
            out << '[' << section << "]\n";
        }
        if (with_comments) out << "# " << k.comment << '\n';
        out << k.name << " = " << k.get(config) << '\n';
    }
    return out.str();
}

std::string default_config_text() {
    std::string text =
        "# fermi-bullet configuration.\n"
        "# Keys are written as 'key = value' under a [section] header or as 'section.key = value'.\n"
        "# Replace the [model] block by a [lab] block (mass, omega, epsilon, decay_k, g, hbar,\n"
        "# omega_eff) to derive the dimensionless parameters from laboratory units.\n\n";
    return text + format_config(RunConfig{}, true);
}

InitDescriptor classical_descriptor(const RunConfig& config) {
    const ClassicalScenario& c = config.classical;
    if (c.init == ClassicalInit::Accelerator) {
        return accelerator_seed(config.effective_params().lambda, Branch(c.branch), c.order, c.delay, c.width_z, c.width_p);
    }
    InitDescriptor d;
    d.z0 = c.z0;
    d.p0 = c.p0;
    d.t0 = c.t0;
    d.width_z = c.width_z;
    d.width_p = c.width_p;
    d.shape = c.init == ClassicalInit::Gaussian ? SampleShape::Gaussian : SampleShape::UniformPatch;
    return d;
}

}  // namespace fermi
