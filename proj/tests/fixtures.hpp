#pragma once

#include "cantorlab/lusin.hpp"
#include "cantorlab/scaffold.hpp"

#include <memory>

namespace fixtures {

using namespace cantorlab;

inline constexpr double kDelta = 1e-3;
inline constexpr double kEta = 0.2;

// Heisenberg datum on Omega = (-delta, delta)^2 with the sobolev schedule
// (s, B = 10); delta = 1e-3 meets the smallness condition for eta = 0.2.
inline std::shared_ptr<const CantorScaffold> sobolev_scaffold(int depth, double s = 0.25) {
    return std::make_shared<const CantorScaffold>(
        build_scaffold(BoxDomain::cube(2, Real(-kDelta), Real(kDelta)),
                       make_schedule(Regime::sobolev, 2, 10, Real(kDelta), s), depth));
}

inline LusinFunction heisenberg_build(int depth, double s = 0.25) {
    auto sc = sobolev_scaffold(depth, s);
    return build_lusin(heisenberg_datum(sc->domain()), sc, depth, Real(kEta));
}

inline Vec vec2(const Real& a, const Real& b) {
    Vec v(2);
    v << a, b;
    return v;
}

}  // namespace fixtures
