#pragma once

#include "cantorlab/real.hpp"
#include "cantorlab/rng.hpp"
#include "cantorlab/scaffold.hpp"

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace cantorlab {

// F(x, u): a linear map R^k -> R^m stored as an m x k matrix.
struct GradientDatum {
    int k = 0;
    int m = 0;
    std::function<Mat(const Vec& x, const Vec& u)> eval;
    Real M1 = 0;  // sup of ||F||_F on K x [-1,1]^m
    Real M2 = 0;  // Lipschitz bound of F in (x, u) on the same set
    bool u_independent = false;
    std::string name;
};

// F((x1, x2), u) = (-2 x2, 2 x1); M1 = 2 max |x| over the closed box, M2 = 2.
GradientDatum heisenberg_datum(const BoxDomain& domain);
GradientDatum constant_datum(const Mat& A);
GradientDatum zero_datum(int k, int m);

struct DatumSpotCheck {
    Real max_norm = 0;
    Real max_quotient = 0;
};
// Sampled ||F|| and difference quotients on domain x [-1,1]^m.
DatumSpotCheck spot_check(const GradientDatum& F, const BoxDomain& domain, int samples,
                          std::uint64_t seed);

struct LusinOptions {
    bool enforce_smallness = true;
};

class LusinFunction {
public:
    struct Jet {
        Vec value;
        Mat grad;
    };

    int k() const { return k_; }
    int m() const { return m_; }
    int depth() const { return depth_; }
    const Real& eta() const { return eta_; }
    const CantorScaffold& scaffold() const { return *scaffold_; }
    std::shared_ptr<const CantorScaffold> scaffold_ptr() const { return scaffold_; }
    bool has_datum() const { return static_cast<bool>(datum_.eval); }
    const GradientDatum& datum() const { return datum_; }

    // u_upto(x) and Du_upto(x).
    Jet evaluate(const Vec& x, int upto) const;
    Jet evaluate(const Vec& x) const { return evaluate(x, depth_); }
    // The single layer u_level - u_{level-1} and its derivative.
    Jet increment(const Vec& x, int level) const;

    // a_1 .. a_L along the address (index 0 holds a_1).
    std::vector<Mat> path_coefficients(const CubeAddress& address) const;
    Mat coefficient(const CubeAddress& address) const;

    // 4 M1 sqrt(k) sum_{j=1}^N r_j.
    Real sup_bound() const;
    // eta / (10 M2 k^{3/2} (2 + 12 M1 pi^2 k^{3/2} + 2 M1)); infinite when M2 = 0.
    Real smallness_limit() const;
    bool smallness_ok() const;
    // C = 2 M2 sqrt(k) (M2 + M1 + 2).
    Real residual_constant() const;
    // C_impl = 16 k^2 (M1 + 1) M2 max(1, c1, c2).
    Real increment_constant() const;

    Json to_json(std::uint64_t max_cubes = 100000) const;
    static LusinFunction from_json(const Json& doc);

private:
    friend LusinFunction build_lusin(const GradientDatum&, std::shared_ptr<const CantorScaffold>,
                                     int, Real, LusinOptions);
    LusinFunction() = default;

    std::shared_ptr<const CantorScaffold> scaffold_;
    GradientDatum datum_;
    int k_ = 0;
    int m_ = 0;
    int depth_ = 0;
    Real eta_ = 1;
    Real M1_ = 0;
    Real M2_ = 0;
    // Imported coefficients keyed by serialized cube path.
    std::shared_ptr<const std::map<std::vector<std::uint64_t>, Mat>> table_;
};

LusinFunction build_lusin(const GradientDatum& F, std::shared_ptr<const CantorScaffold> scaffold,
                          int N, Real eta, LusinOptions options = {});

Vec eval(const LusinFunction& u, const Vec& x);
Mat eval_grad(const LusinFunction& u, const Vec& x);
// ||Du(x) - F(x, u(x))||_F.
Real residual(const LusinFunction& u, const GradientDatum& F, const Vec& x);

struct IncrementRow {
    int level = 0;  // the increment u_level - u_{level-1}
    Real sup_u = 0;
    Real bound_u = 0;
    Real sup_du = 0;
    Real bound_du = 0;
    int samples = 0;
};
std::vector<IncrementRow> level_increment_norms(const LusinFunction& u, int samples_per_level = 10000,
                                                std::uint64_t seed = 1);

// Random point near the level-`level` support of a uniformly chosen cube: half
// the draws land in the transition shell, half anywhere in the support.
Vec sample_support_point(const CantorScaffold& scaffold, int level, Rng& rng);
// Uniform random level-`level` cube address.
CubeAddress sample_address(const CantorScaffold& scaffold, int level, Rng& rng);

}  // namespace cantorlab
