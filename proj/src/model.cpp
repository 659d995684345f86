#include "fermi/model.hpp"

#include <algorithm>
#include <string>

#include "fermi/errors.hpp"

namespace fermi {

namespace {

void require_positive(double value, const char* name) {
    if (!(value > 0.0) || !std::isfinite(value)) {
        throw InvalidParameter(std::string(name) + " must be finite and > 0, got " + std::to_string(value));
    }
}

}  // namespace

void DimensionlessParams::validate() const {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw InvalidParameter("lambda must be >= 0");
    require_positive(kappa, "kappa");
    if (!(v0 >= 0.0) || !std::isfinite(v0)) throw InvalidParameter("v0 must be >= 0");
    require_positive(kbar, "kbar");
}

Branch::Branch(double s) {
    const double doubled = 2.0 * s;
    const double rounded = std::round(doubled);
    if (!std::isfinite(s) || rounded < 1.0 || std::abs(doubled - rounded) > 1e-9 || rounded > 1e9) {
        throw InvalidParameter("branch index s must be a positive multiple of 0.5, got " + std::to_string(s));
    }
    half_units_ = static_cast<int>(rounded);
}

Branch Branch::from_half_units(int half_units) {
    if (half_units < 1) throw InvalidParameter("branch index must be positive");
    return Branch(HalfUnits{}, half_units);
}

std::string_view to_string(WindowKind kind) {
    switch (kind) {
        case WindowKind::Localization: return "Localization";
        case WindowKind::Acceleration: return "Acceleration";
        case WindowKind::Overlap: return "Overlap";
    }
    return "?";
}

DimensionlessParams scale_to_dimensionless(const LabParams& lab) {
    require_positive(lab.mass, "mass");
    require_positive(lab.omega, "omega");
    require_positive(lab.epsilon, "epsilon");
    require_positive(lab.decay_k, "decay_k");
    require_positive(lab.g, "g");
    require_positive(lab.hbar, "hbar");
    require_positive(lab.omega_eff, "omega_eff");

    const double w2 = lab.omega * lab.omega;
    const double mg2 = lab.mass * lab.g * lab.g;
    DimensionlessParams out;
    out.lambda = w2 * lab.epsilon / (2.0 * lab.decay_k * lab.g);
    out.kappa = 2.0 * lab.decay_k * lab.g / w2;
    out.v0 = lab.hbar * w2 * lab.omega_eff / (4.0 * mg2);
    out.kbar = lab.hbar * w2 * lab.omega / mg2;
    return out;
}

MirrorGeometry mirror_from_dimensionless(double lambda, double kappa, double omega, double g) {
    require_positive(kappa, "kappa");
    require_positive(omega, "omega");
    require_positive(g, "g");
    return {lambda * kappa, kappa * omega * omega / (2.0 * g)};
}

Window localization_window(double kbar) {
    require_positive(kbar, "kbar");
    const double hi = std::sqrt(kbar) / 2.0;
    Window w{kClassicalChaosThreshold, hi, WindowKind::Localization, std::nullopt};
    if (hi <= kClassicalChaosThreshold) w.hi = w.lo;
    return w;
}

Window acceleration_window(Branch s) {
    const double lo = s.value() * std::numbers::pi;
    return {lo, std::sqrt(1.0 + lo * lo), WindowKind::Acceleration, s};
}

Window acceleration_window(double s) { return acceleration_window(Branch(s)); }

Window overlap_window(double kbar, Branch s) {
    const Window loc = localization_window(kbar);
    const Window acc = acceleration_window(s);
    Window w{std::max(loc.lo, acc.lo), std::min(loc.hi, acc.hi), WindowKind::Overlap, s};
    if (loc.empty() || w.lo >= w.hi) w.hi = w.lo;
    return w;
}

Window overlap_window(double kbar, double s) { return overlap_window(kbar, Branch(s)); }

std::vector<Classification> classify_lambda(double lambda, double kbar, double s_max) {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw InvalidParameter("lambda must be >= 0");
    require_positive(kbar, "kbar");
    const int max_half = s_max >= 0.5 ? Branch(s_max).half_units() : 0;

    std::vector<Classification> out;
    if (localization_window(kbar).contains(lambda)) out.push_back({WindowKind::Localization, std::nullopt});
    for (int h = 1; h <= max_half; ++h) {
        const Branch s = Branch::from_half_units(h);
        if (acceleration_window(s).contains(lambda)) out.push_back({WindowKind::Acceleration, s});
        if (overlap_window(kbar, s).contains(lambda)) out.push_back({WindowKind::Overlap, s});
    }
    return out;
}

}  // namespace fermi
