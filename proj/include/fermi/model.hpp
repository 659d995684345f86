#ifndef FERMI_MODEL_HPP
#define FERMI_MODEL_HPP

#include <cmath>
#include <numbers>
#include <optional>
#include <string_view>
#include <vector>

namespace fermi {

/// Onset of global classical diffusion for the sinusoidally driven bouncer.
inline constexpr double kClassicalChaosThreshold = 0.24;

inline constexpr double kDefaultGravity = 9.8;
inline constexpr double kDefaultHbar = 1.0546e-34;

/// Laboratory description of an atom over a modulated evanescent-wave mirror (SI units).
struct LabParams {
    double mass = 0.0;       // kg
    double omega = 0.0;      // modulation angular frequency, rad/s
    double epsilon = 0.0;    // intensity modulation amplitude
    double decay_k = 0.0;    // evanescent-field decay rate, 1/m
    double g = kDefaultGravity;
    double hbar = kDefaultHbar;
    double omega_eff = 0.0;  // effective Rabi frequency, rad/s

    bool operator==(const LabParams&) const = default;
};

/// Parameters of H = p^2/2 + z + v0 exp(-kappa (z - lambda sin t)).
struct DimensionlessParams {
    double lambda = 0.0;
    double kappa = 2.0;
    double v0 = 50.0;
    double kbar = 1.0;

    /// Throws InvalidParameter unless lambda >= 0, kappa > 0, v0 >= 0, kbar > 0.
    void validate() const;
    bool operator==(const DimensionlessParams&) const = default;
};

/// Acceleration branch index s; only positive multiples of 1/2 are valid.
class Branch {
public:
    /// Throws InvalidParameter if s is not a positive multiple of 0.5.
    explicit Branch(double s);
    static Branch from_half_units(int half_units);

    double value() const noexcept { return 0.5 * half_units_; }
    int half_units() const noexcept { return half_units_; }
    bool operator==(const Branch&) const = default;

private:
    struct HalfUnits {};
    Branch(HalfUnits, int h) : half_units_(h) {}
    int half_units_;
};

enum class WindowKind { Localization, Acceleration, Overlap };

std::string_view to_string(WindowKind kind);

/// Half-open interval [lo, hi) of modulation strengths. Empty when lo == hi.
struct Window {
    double lo = 0.0;
    double hi = 0.0;
    WindowKind kind = WindowKind::Localization;
    std::optional<Branch> s;

    bool empty() const noexcept { return !(lo < hi); }
    bool contains(double lambda) const noexcept { return lo <= lambda && lambda < hi; }
    double width() const noexcept { return hi - lo; }
};

/// Throws InvalidParameter unless every field is strictly positive.
DimensionlessParams scale_to_dimensionless(const LabParams& lab);

/// Inverse of the lambda/kappa part of the scaling for fixed (omega, g):
/// epsilon = lambda * kappa, decay_k = kappa * omega^2 / (2 g).
struct MirrorGeometry {
    double epsilon;
    double decay_k;
};
MirrorGeometry mirror_from_dimensionless(double lambda, double kappa, double omega, double g);

/// Dynamical localization: [0.24, sqrt(kbar)/2), empty when the upper bound falls below 0.24.
Window localization_window(double kbar);

/// Accelerator modes: [s pi, sqrt(1 + (s pi)^2)).
Window acceleration_window(Branch s);
Window acceleration_window(double s);

/// Intersection of the localization window and acceleration branch s.
Window overlap_window(double kbar, Branch s);
Window overlap_window(double kbar, double s);

struct Classification {
    WindowKind kind;
    std::optional<Branch> s;
    bool operator==(const Classification&) const = default;
};

/// Every window (acceleration and overlap branches up to s_max) that contains lambda.
std::vector<Classification> classify_lambda(double lambda, double kbar, double s_max);

}  // namespace fermi

#endif  // FERMI_MODEL_HPP
