#include "cantorlab/cutoff.hpp"

#include "cantorlab/error.hpp"

#include <vector>

namespace cantorlab {

RampValue ramp(const Real& y, const Real& half_inner, const Real& width) {
    const Real a = boost::multiprecision::abs(y);
    if (a <= half_inner) return {1, 0, 0};
    if (a >= half_inner + width) return {0, 0, 0};
    const Real t = (half_inner + width - a) / width;
    const Real t2 = t * t;
    const Real sign = y > 0 ? Real(-1) : Real(1);
    RampValue r;
    r.v = t2 * t * (10 - 15 * t + 6 * t2);
    r.d1 = sign * 30 * t2 * (1 - t) * (1 - t) / width;
    r.d2 = 60 * t * (1 - t) * (1 - 2 * t) / (width * width);
    return r;
}

CutoffProfile make_cutoff(const Vec& inner_center, const Real& inner_side, const Real& rho) {
    if (!(inner_side > 0)) throw InvalidArgument("cutoff inner side must be positive");
    if (!(rho > 0)) throw InvalidArgument("cutoff rho must be positive");
    if (inner_center.size() < 1) throw InvalidArgument("cutoff center needs a dimension");
    CutoffProfile c;
    c.center = inner_center;
    c.inner_side = inner_side;
    c.rho = rho;
    c.width = rho / 4;
    c.outer_side = inner_side + rho / 2;
    return c;
}

namespace {

std::vector<RampValue> axis_ramps(const CutoffProfile& c, const Vec& x) {
    std::vector<RampValue> r;
    for (Eigen::Index i = 0; i < c.center.size(); ++i)
        r.push_back(ramp(x[i] - c.center[i], c.inner_side / 2, c.width));
    return r;
}

}  // namespace

Real CutoffProfile::value(const Vec& x) const {
    Real v = 1;
    for (const auto& r : axis_ramps(*this, x)) v *= r.v;
    return v;
}

Vec CutoffProfile::gradient(const Vec& x) const {
    const auto r = axis_ramps(*this, x);
    const auto k = static_cast<Eigen::Index>(r.size());
    Vec g(k);
    for (Eigen::Index i = 0; i < k; ++i) {
        Real p = r[static_cast<std::size_t>(i)].d1;
        for (Eigen::Index j = 0; j < k; ++j)
            if (j != i) p *= r[static_cast<std::size_t>(j)].v;
        g[i] = p;
    }
    return g;
}

Mat CutoffProfile::hessian(const Vec& x) const {
    const auto r = axis_ramps(*this, x);
    const auto k = static_cast<Eigen::Index>(r.size());
    Mat h(k, k);
    for (Eigen::Index i = 0; i < k; ++i)
        for (Eigen::Index j = 0; j < k; ++j) {
            Real p = 1;
            for (Eigen::Index l = 0; l < k; ++l) {
                const auto& rl = r[static_cast<std::size_t>(l)];
                if (l == i && l == j)
                    p *= rl.d2;
                else if (l == i || l == j)
                    p *= rl.d1;
                else
                    p *= rl.v;
            }
            h(i, j) = p;
        }
    return h;
}

}  // namespace cantorlab
