#pragma once

#include <boost/multiprecision/float128.hpp>
#include <boost/math/constants/constants.hpp>
#include <boost/multiprecision/eigen.hpp>
#include <Eigen/Dense>

#include <cstdint>
#include <limits>

namespace cantorlab {

// Deep levels reach side lengths near 1e-21 with gaps near 1e-30, so the
// geometry and the Lusin layers run in quad precision.
using Real = boost::multiprecision::float128;

inline constexpr int kMaxDim = 6;

using Vec = Eigen::Matrix<Real, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using Mat = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;
using Vec2 = Eigen::Matrix<Real, 2, 1>;

inline double to_double(const Real& x) { return static_cast<double>(x); }

inline Real pow2(int e) { return boost::multiprecision::ldexp(Real(1), e); }

inline Real real_pi() { return boost::math::constants::pi<Real>(); }

inline Vec to_vec(const Eigen::VectorXd& v) { return v.cast<Real>(); }

inline Eigen::VectorXd to_vecd(const Vec& v) {
    Eigen::VectorXd out(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) out[i] = to_double(v[i]);
    return out;
}

}  // namespace cantorlab
