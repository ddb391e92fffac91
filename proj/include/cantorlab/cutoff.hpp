#pragma once

#include "cantorlab/real.hpp"

namespace cantorlab {

// Quintic smoothstep S(t) = 6t^5 - 15t^4 + 10t^3 and its sharp derivative bounds.
inline constexpr double kCutoffC1 = 15.0 / 8.0;
inline constexpr double kCutoffC2 = 10.0 * 1.7320508075688772935 / 3.0;

struct RampValue {
    Real v = 0;
    Real d1 = 0;
    Real d2 = 0;
};

// 1-D profile: 1 for |y| <= half_inner, 0 for |y| >= half_inner + width,
// smoothstep in between. Derivatives are with respect to y.
RampValue ramp(const Real& y, const Real& half_inner, const Real& width);

struct CutoffProfile {
    Vec center;
    Real inner_side = 0;
    Real rho = 0;
    Real width = 0;       // rho / 4
    Real outer_side = 0;  // inner_side + rho / 2

    Real value(const Vec& x) const;
    Vec gradient(const Vec& x) const;
    Mat hessian(const Vec& x) const;
};

CutoffProfile make_cutoff(const Vec& inner_center, const Real& inner_side, const Real& rho);

}  // namespace cantorlab
