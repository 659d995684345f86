#ifndef FERMI_FIELD_HPP
#define FERMI_FIELD_HPP

#include <Eigen/Core>
#include <algorithm>
#include <cmath>

#include "fermi/model.hpp"

namespace fermi {

/// Largest exponent -kappa (z - lambda sin t) evaluated before saturating.
inline constexpr double kMirrorExponentCap = 700.0;

/// A field sample; `saturated` is set when the exponent hit kMirrorExponentCap.
template <typename Scalar>
struct Guarded {
    Scalar value;
    bool saturated = false;
};

/// Wall (mirror centre) position lambda sin t.
template <typename Scalar>
Scalar wall_position(Scalar t, const DimensionlessParams& params) {
    using std::sin;
    return Scalar(params.lambda) * sin(t);
}

template <typename Scalar>
Guarded<Scalar> mirror_exponential(Scalar z, Scalar t, const DimensionlessParams& params) {
    using std::exp;
    Scalar arg = -Scalar(params.kappa) * (z - wall_position(t, params));
    bool saturated = false;
    if (arg > Scalar(kMirrorExponentCap)) {
        arg = Scalar(kMirrorExponentCap);
        saturated = true;
    }
    return {exp(arg), saturated};
}

/// Mirror part of the potential, v0 exp(-kappa (z - lambda sin t)), over a whole array of positions.
template <typename Derived>
Eigen::ArrayXd mirror_potential(const Eigen::ArrayBase<Derived>& z, double t, const DimensionlessParams& params) {
    const double wall = wall_position(t, params);
    return params.v0 * (-params.kappa * (z - wall)).min(kMirrorExponentCap).exp();
}

}  // namespace fermi

#endif  // FERMI_FIELD_HPP
