#pragma once

#include "cantorlab/lusin.hpp"
#include "cantorlab/real.hpp"
#include "cantorlab/rng.hpp"
#include "cantorlab/scaffold.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace cantorlab {

using PointD = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using ValueD = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim * kMaxDim, 1>;

// Integration region for the Monte Carlo estimators: an open box or ball.
struct SampleDomain {
    enum class Shape { box, ball };

    Shape shape = Shape::box;
    std::vector<std::pair<double, double>> box;
    PointD center;
    double radius = 0.0;

    static SampleDomain make_box(std::vector<std::pair<double, double>> intervals);
    static SampleDomain cube(int n, double lo, double hi);
    static SampleDomain from_box(const BoxDomain& domain);
    static SampleDomain make_ball(const PointD& center, double radius);

    int dim() const;
    double volume() const;
    double diameter() const;
    bool contains(const PointD& x) const;
    PointD sample(Rng& rng) const;
};

enum class FieldKind { function, indicator, gradient_field };

std::string to_string(FieldKind kind);

struct FieldSampler {
    SampleDomain domain;
    FieldKind kind = FieldKind::function;
    std::function<ValueD(const PointD&)> eval;
    // f is extended by zero and the seminorm is taken over R^n x R^n.
    bool compact_support = false;
    std::string name;

    // Evaluates f; throws NumericFailure when an indicator leaves {0, 1}.
    ValueD operator()(const PointD& x) const;
};

FieldSampler scalar_field(SampleDomain domain, std::function<double(const PointD&)> f,
                          FieldKind kind = FieldKind::function, std::string name = {});
FieldSampler indicator_field(SampleDomain domain, std::function<bool(const PointD&)> inside,
                             std::string name = {});
// 1 on the level-`level` cubes of the scaffold; membership is decided in
// quad precision at the sampled double point.
FieldSampler cantor_indicator(std::shared_ptr<const CantorScaffold> scaffold, int level);

struct EstimatorOptions {
    int shells = 30;
    int jobs = 1;
    // Anchors carried from one shell to the next for the adaptive x proposal;
    // zero gives plain uniform sampling.
    int anchors = 64;
    // Weight of the uniform component in the x proposal.
    double defensive = 0.1;
};

struct ShellStat {
    int index = 0;  // -1 for the far stratum of compact-support runs
    double inner = 0.0;
    double outer = 0.0;
    std::uint64_t samples = 0;
    std::uint64_t hits = 0;
    double contribution = 0.0;
    double std_error = 0.0;
};

struct SeminormEstimate {
    double value = 0.0;  // p-th root
    double std_error = 0.0;
    double power = 0.0;  // the p-th power
    double power_std_error = 0.0;
    double s = 0.0;
    double p = 1.0;
    std::uint64_t budget = 0;
    std::uint64_t seed = 0;
    double truncation_radius = 0.0;
    // Pairs closer than truncation_radius are not integrated.
    bool lower_bound = true;
    std::vector<ShellStat> shells;
};

SeminormEstimate fractional_seminorm(const FieldSampler& f, double s, double p, std::uint64_t budget,
                                     std::uint64_t seed, const EstimatorOptions& options = {});

// 2(2^s - 1)/(s(1 - s)): [1_{(0,1/2)}]_{W^{s,1}(0,1)}.
double half_interval_seminorm(double s);

// Graph chart x -> (x, g(x)) evaluated in double.
struct GraphChart {
    int k = 0;
    int m = 0;
    std::function<ValueD(const PointD&)> value;
    std::function<Eigen::MatrixXd(const PointD&)> grad;  // m x k
};

GraphChart lusin_chart(const LusinFunction& u);
GraphChart linear_chart(const Eigen::MatrixXd& A);

struct GraphCompare {
    double ratio = 1.0;  // graph / base, both as p-th powers
    double std_error = 0.0;
    double graph = 0.0;
    double base = 0.0;
    double lipschitz = 0.0;
    double window_lo = 0.0;
    double window_hi = 0.0;
    bool in_window = true;
};

// The graph seminorm weights pairs by the area factors JF(x) JF(y) and
// measures distances between graph points; `lipschitz_samples` points bound L.
GraphCompare graph_seminorm_compare(const GraphChart& chart, const FieldSampler& f, double s, double p,
                                    std::uint64_t budget, std::uint64_t seed,
                                    const EstimatorOptions& options = {}, int lipschitz_samples = 4096);

// Quad-precision probe for the Hoelder estimator: values are flattened
// vectors, base points come from `propose`.
struct HolderProbe {
    int dim = 0;
    std::function<Vec(const Vec&)> eval;
    std::function<Vec(Rng&, std::uint64_t)> propose;
    std::function<bool(const Vec&)> admissible;  // pair endpoints; empty accepts all
    std::string name;
};

HolderProbe holder_probe(const FieldSampler& f);
// Du of the build, base points cycling through the transition shells of
// levels 1..N.
HolderProbe gradient_probe(const LusinFunction& u);

struct HolderRow {
    double scale = 0.0;
    double sup = 0.0;
    std::uint64_t pairs = 0;
};

struct HolderTable {
    double alpha = 0.0;
    std::vector<HolderRow> rows;
    // Least-squares slope of log sup against log t.
    std::optional<double> slope;
    // -slope: positive when the quotient grows as t decreases.
    std::optional<double> growth;
};

HolderTable holder_estimate(const HolderProbe& g, double alpha, const std::vector<Real>& scales,
                            std::uint64_t pairs_per_scale, std::uint64_t seed);

struct DimensionFit {
    double slope = 0.0;
    double theoretical = 0.0;
    std::vector<int> levels;
    std::vector<double> log_inverse_side;
    std::vector<double> log_count;
};

// Box counting from the exact counts Card(L1) 2^{Bki} at eps_i = r_i.
DimensionFit box_dimension_estimate(const CantorScaffold& scaffold, int first_level, int last_level);

struct DensityRow {
    double radius = 0.0;
    double measure = 0.0;
    double measure_std_error = 0.0;
    double ratio = 0.0;
    double ratio_std_error = 0.0;
};

struct DensityProfile {
    double b = 0.0;
    double s = 0.0;
    double exponent = 0.0;  // k + b k/(k - s)
    bool exact = false;
    std::uint64_t samples = 0;
    std::uint64_t seed = 0;
    std::vector<DensityRow> rows;
    std::optional<double> slope;  // log ratio against log r over rows with ratio > 0
};

double one_star(int k, double s);

// Monte Carlo complement measure of E in Euclidean balls B(x, r).
DensityProfile superdensity_profile(const std::function<bool(const Vec&)>& inside, const Vec& x,
                                    const std::vector<Real>& radii, double b, double s,
                                    std::uint64_t samples = 100000, std::uint64_t seed = 1);
// Exact complement measure of the level-`level` set in the cubes
// x + [-r, r]^k, from per-axis gap lengths.
DensityProfile superdensity_profile_exact(const CantorScaffold& scaffold, int level, const Vec& x,
                                          const std::vector<Real>& radii, double b, double s);

struct SliceRow {
    std::string name;
    double lhs = 0.0;
    double lhs_std_error = 0.0;
    double rhs = 0.0;
    double rhs_std_error = 0.0;
    std::optional<double> ratio;
    double ratio_std_error = 0.0;
};

// [f]^p against the direction average of the line seminorms, n = 2, k = 1.
std::vector<SliceRow> slicing_ratio(const std::vector<FieldSampler>& fs, double s, double p,
                                    int direction_count, std::uint64_t budget, std::uint64_t seed,
                                    const EstimatorOptions& options = {});
// Rotates a planar field by `angle` about the centre of its domain; the
// domain must be a disc.
FieldSampler rotated(const FieldSampler& f, double angle);

struct PoincareResult {
    double ratio = 0.0;
    double l1 = 0.0;
    double l1_std_error = 0.0;
    double seminorm = 0.0;
    double seminorm_std_error = 0.0;
};

// ||f||_{L1(B)} / (R^{n(1-1/q)+alpha} [f]_{W^{alpha,q}(B)}) on B = B(0, R).
std::optional<PoincareResult> poincare_ratio(const std::function<double(const PointD&)>& f, int n, double R,
                                             double alpha, double q, std::uint64_t budget,
                                             std::uint64_t seed, const EstimatorOptions& options = {});

}  // namespace cantorlab
