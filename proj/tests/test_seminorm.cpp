#include "doctest.h"
#include "fixtures.hpp"

#include "cantorlab/error.hpp"
#include "cantorlab/seminorm.hpp"

#include <cmath>
#include <numbers>

using namespace cantorlab;

namespace {

FieldSampler half_interval() {
    return indicator_field(SampleDomain::cube(1, 0.0, 1.0), [](const PointD& x) { return x[0] < 0.5; }, "half");
}

FieldSampler shifted(const FieldSampler& f, double scale, double shift) {
    FieldSampler g = f;
    g.kind = FieldKind::function;
    g.eval = [f, scale, shift](const PointD& x) { return ValueD((scale * f.eval(x)).array() + shift); };
    return g;
}

double segment_area(double r, double h) { return r * r * std::acos(h / r) - h * std::sqrt(r * r - h * h); }

}  // namespace

TEST_CASE("constant field has zero seminorm") {
    const auto f = scalar_field(SampleDomain::cube(2, 0.0, 1.0), [](const PointD&) { return 3.0; });
    const auto e = fractional_seminorm(f, 0.5, 2.0, 6000, 1);
    CHECK(e.value == 0.0);
    CHECK(e.std_error == 0.0);
}

TEST_CASE("half-interval indicator matches the closed form") {
    CHECK(half_interval_seminorm(0.5) == doctest::Approx(8.0 * (std::sqrt(2.0) - 1.0)).epsilon(1e-14));
    for (double s : {0.25, 0.5}) {
        const auto e = fractional_seminorm(half_interval(), s, 1.0, 600000, 3);
        CHECK(std::abs(e.value - half_interval_seminorm(s)) <= 3.0 * e.std_error);
        CHECK(e.lower_bound);
        CHECK(e.truncation_radius == doctest::Approx(std::ldexp(1.0, -30)));
    }
}

TEST_CASE("seminorm is invariant under sign change and constant shift") {
    const auto f = half_interval();
    const auto base = fractional_seminorm(f, 0.4, 1.5, 60000, 9);
    const auto neg = fractional_seminorm(shifted(f, -1.0, 0.0), 0.4, 1.5, 60000, 9);
    CHECK(neg.value == base.value);
    const auto up = fractional_seminorm(shifted(f, 1.0, 0.25), 0.4, 1.5, 60000, 9);
    CHECK(up.value == doctest::Approx(base.value).epsilon(1e-12));
}

TEST_CASE("seminorm scales linearly on identical streams") {
    const auto f = scalar_field(SampleDomain::cube(2, -1.0, 1.0),
                                [](const PointD& x) { return std::sin(3.0 * x[0]) * x[1]; });
    const auto base = fractional_seminorm(f, 0.3, 2.0, 60000, 4);
    const auto twice = fractional_seminorm(shifted(f, 2.0, 0.0), 0.3, 2.0, 60000, 4);
    CHECK(twice.value == doctest::Approx(2.0 * base.value).epsilon(1e-12));
    const auto third = fractional_seminorm(shifted(f, -3.0, 0.0), 0.3, 2.0, 60000, 4);
    CHECK(third.value == doctest::Approx(3.0 * base.value).epsilon(1e-12));
}

TEST_CASE("quadrupling the budget halves the standard error") {
    const auto small = fractional_seminorm(half_interval(), 0.5, 1.0, 150000, 21);
    const auto large = fractional_seminorm(half_interval(), 0.5, 1.0, 600000, 21);
    const double factor = small.std_error / large.std_error;
    CHECK(factor >= 1.7);
    CHECK(factor <= 2.3);
}

TEST_CASE("adding a far component increases the indicator seminorm") {
    const auto dom = SampleDomain::cube(1, 0.0, 1.0);
    const auto E = indicator_field(dom, [](const PointD& x) { return x[0] > 0.1 && x[0] < 0.3; });
    const auto E2 = indicator_field(
        dom, [](const PointD& x) { return (x[0] > 0.1 && x[0] < 0.3) || (x[0] > 0.8 && x[0] < 0.9); });
    const auto a = fractional_seminorm(E, 0.5, 1.0, 120000, 5);
    const auto b = fractional_seminorm(E2, 0.5, 1.0, 120000, 5);
    CHECK(b.value - a.value > 3.0 * std::hypot(a.std_error, b.std_error));
}

TEST_CASE("compact support counts pairs leaving the domain") {
    // [1_{(0,1)}] over R x R is 4/(s(1-s)) for p = 1.
    const auto f = indicator_field(SampleDomain::cube(1, 0.0, 1.0), [](const PointD&) { return true; });
    auto g = f;
    g.compact_support = true;
    const auto e = fractional_seminorm(g, 0.5, 1.0, 400000, 8);
    CHECK(std::abs(e.value - 16.0) <= 3.0 * e.std_error);
    CHECK(e.shells.front().index == -1);
}

TEST_CASE("cantor indicator stays below twice the analytic bound") {
    auto sc = fixtures::sobolev_scaffold(3);
    const auto e = fractional_seminorm(cantor_indicator(sc, 3), 0.2, 1.0, 120000, 2);
    const auto bound = indicator_seminorm_bound(sc->schedule(), to_double(sc->domain().volume()), 0.2, 3);
    CHECK(e.value > 0.0);
    CHECK(e.value <= 2.0 * bound.value);
}

TEST_CASE("estimates do not depend on the job count") {
    EstimatorOptions one, three;
    three.jobs = 3;
    const auto a = fractional_seminorm(half_interval(), 0.5, 1.0, 50000, 6, one);
    const auto b = fractional_seminorm(half_interval(), 0.5, 1.0, 50000, 6, three);
    CHECK(a.value == b.value);
    CHECK(a.std_error == b.std_error);
}

TEST_CASE("seminorm argument validation") {
    const auto f = half_interval();
    CHECK_THROWS_AS(fractional_seminorm(f, 0.0, 1.0, 1000, 1), InvalidArgument);
    CHECK_THROWS_AS(fractional_seminorm(f, 1.0, 1.0, 1000, 1), InvalidArgument);
    CHECK_THROWS_AS(fractional_seminorm(f, 0.5, 0.5, 1000, 1), InvalidArgument);
    CHECK_THROWS_AS(fractional_seminorm(f, 0.5, 1.0, 0, 1), InvalidArgument);
    const auto bad = scalar_field(SampleDomain::cube(1, 0.0, 1.0), [](const PointD&) { return 0.5; },
                                  FieldKind::indicator);
    CHECK_THROWS_AS(fractional_seminorm(bad, 0.5, 1.0, 1000, 1), NumericFailure);
}

TEST_CASE("flat graph leaves the seminorm unchanged") {
    const auto f = indicator_field(SampleDomain::cube(2, 0.0, 1.0), [](const PointD& x) { return x[0] < 0.5; });
    const auto cmp = graph_seminorm_compare(linear_chart(Eigen::MatrixXd::Zero(1, 2)), f, 0.5, 1.0, 30000, 1);
    CHECK(cmp.ratio == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(cmp.lipschitz == 0.0);
}

TEST_CASE("tilted line scales the seminorm by two to the quarter") {
    // |x - y| -> sqrt2 |x - y| and JF = sqrt2: ratio 2 * 2^{-(sp+k)/2} = 2^{1/4}.
    Eigen::MatrixXd A(1, 1);
    A << 1.0;
    const auto cmp = graph_seminorm_compare(linear_chart(A), half_interval(), 0.5, 1.0, 60000, 3);
    CHECK(cmp.ratio == doctest::Approx(std::pow(2.0, 0.25)).epsilon(1e-12));
    CHECK(cmp.lipschitz == doctest::Approx(1.0));
    CHECK(cmp.in_window);
}

TEST_CASE("lusin graph ratio lies in the equivalence window") {
    const auto u = fixtures::heisenberg_build(2);
    const auto dom = SampleDomain::from_box(u.scaffold().domain());
    const auto f = scalar_field(dom, [](const PointD& x) { return 1e3 * x[0] + std::cos(2e3 * x[1]); });
    const auto cmp = graph_seminorm_compare(lusin_chart(u), f, 0.5, 1.0, 6000, 4, {}, 256);
    CHECK(cmp.in_window);
    CHECK(cmp.ratio >= 1.0 - 1e-3);
}

TEST_CASE("hoelder probe of a linear function") {
    const auto g = scalar_field(SampleDomain::cube(1, 0.0, 1.0), [](const PointD& x) { return 3.0 * x[0]; });
    const std::vector<Real> scales{Real(1e-1), Real(1e-2), Real(1e-3), Real(1e-4)};
    const auto table = holder_estimate(holder_probe(g), 1.0, scales, 500, 1);
    for (const auto& row : table.rows) CHECK(row.sup == doctest::Approx(3.0).epsilon(1e-8));
    REQUIRE(table.slope);
    CHECK(std::abs(*table.slope) < 1e-8);
    CHECK(*table.growth == -*table.slope);
}

TEST_CASE("hoelder probe of |x|^beta at its own exponent") {
    const double beta = 0.5;
    const auto g = scalar_field(SampleDomain::cube(1, -1.0, 1.0),
                                [beta](const PointD& x) { return std::pow(std::abs(x[0]), beta); });
    std::vector<Real> scales;
    for (int m = 1; m <= 10; ++m) scales.push_back(pow2(-m));
    const auto table = holder_estimate(holder_probe(g), beta, scales, 10000, 2);
    for (const auto& row : table.rows) CHECK(row.sup <= std::pow(2.0, 1.0 - beta) + 1e-12);
    REQUIRE(table.slope);
    CHECK(std::abs(*table.slope) < 0.1);
}

TEST_CASE("gradient probe evaluates the build gradient") {
    const auto u = fixtures::heisenberg_build(3);
    const auto probe = gradient_probe(u);
    Rng rng = make_stream(3);
    for (std::uint64_t i = 0; i < 6; ++i) {
        const Vec x = probe.propose(rng, i);
        const Mat g = eval_grad(u, x);
        const Vec v = probe.eval(x);
        CHECK(v.size() == g.size());
        CHECK((v - Eigen::Map<const Vec>(g.data(), g.size())).norm() == 0);
    }
    CHECK_THROWS_AS(holder_estimate(probe, 0.5, {}, 10, 1), InvalidArgument);
    CHECK_THROWS_AS(holder_estimate(probe, 1.5, {Real(1e-9)}, 10, 1), InvalidArgument);
}

TEST_CASE("box counting recovers the dimension") {
    struct Case {
        int k, B;
        double d;
    };
    for (const auto& c : {Case{2, 1, 1.0}, Case{2, 2, 1.5}, Case{1, 1, 0.5}}) {
        const auto sched = make_schedule(Regime::dimension, c.k, c.B, Real(0.1), c.d);
        const auto sc = build_scaffold(BoxDomain::cube(c.k, 0, 1), sched, 8);
        const auto fit = box_dimension_estimate(sc, 2, 8);
        CHECK(fit.slope == doctest::Approx(c.d).epsilon(0.05 / c.d));
        CHECK(fit.theoretical == doctest::Approx(c.d).epsilon(1e-12));
        CHECK(fit.levels.size() == 7);
    }
    const auto full = RhoSchedule::tabulated(2, 1, Real(0.25), {Real(0)});
    const auto sc = build_scaffold(BoxDomain::cube(2, 0, 1), full, 6);
    CHECK(box_dimension_estimate(sc, 1, 6).slope == doctest::Approx(2.0).epsilon(1e-12));
    CHECK_THROWS_AS(box_dimension_estimate(sc, 1, 2), InvalidArgument);
}

TEST_CASE("superdensity of the whole space vanishes") {
    Vec x(2);
    x << Real(0.1), Real(0.2);
    const auto prof = superdensity_profile([](const Vec&) { return true; }, x, {Real(0.1), Real(0.01)}, 0.1, 0.5,
                                           1000, 1);
    for (const auto& row : prof.rows) CHECK(row.ratio == 0.0);
    CHECK_FALSE(prof.slope);
    CHECK(prof.exponent == doctest::Approx(2.0 + 0.1 * 2.0 / 1.5));
    CHECK_THROWS_AS(superdensity_profile([](const Vec&) { return true; }, x, {Real(-1)}, 0.1, 0.5), InvalidArgument);
    CHECK_THROWS_AS(superdensity_profile([](const Vec&) { return true; }, x, {Real(1)}, 0.6, 0.5), InvalidArgument);
}

TEST_CASE("superdensity against a half-plane matches the segment area") {
    const double h = 0.1;
    Vec x(2);
    x << Real(-h), Real(0);
    auto half = [](const Vec& y) { return y[0] < 0; };
    const std::vector<Real> radii{Real(0.05), Real(0.2), Real(0.4), Real(0.8)};
    const auto prof = superdensity_profile(half, x, radii, 0.2, 0.5, 100000, 7);
    CHECK(prof.rows[0].measure == 0.0);
    for (std::size_t i = 1; i < radii.size(); ++i) {
        const double r = prof.rows[i].radius;
        CHECK(std::abs(prof.rows[i].measure - segment_area(r, h)) <= 3.0 * prof.rows[i].measure_std_error + 1e-12);
    }
}

TEST_CASE("exact cube-window complement agrees with sampling") {
    auto sc = std::make_shared<const CantorScaffold>(build_scaffold(
        BoxDomain::cube(2, 0, 1), make_schedule(Regime::dimension, 2, 1, Real(0.25), 1.5), 3));
    Vec x(2);
    x << Real(0.41), Real(0.52);
    const Real r(0.07);
    const auto exact = superdensity_profile_exact(*sc, 3, x, {r}, 0.1, 0.5);
    Rng rng = make_stream(12);
    const int n = 200000;
    int out = 0;
    for (int i = 0; i < n; ++i) {
        Vec y = x;
        for (int a = 0; a < 2; ++a) y[a] += r * Real(2 * uniform01(rng) - 1);
        if (!sc->contains(y, 3)) ++out;
    }
    const double area = 4 * 0.07 * 0.07;
    const double frac = static_cast<double>(out) / n;
    const double se = area * std::sqrt(frac * (1 - frac) / n);
    CHECK(exact.exact);
    CHECK(std::abs(exact.rows[0].measure - area * frac) <= 3.0 * se);
}

TEST_CASE("superdensity decays at a deep cantor point") {
    auto sc = fixtures::sobolev_scaffold(6);
    CubeAddress addr;
    addr.root = {0, 0};
    for (int l = 0; l < 6; ++l) addr.digits.push_back({511, 700});
    const Vec x = sc->center(addr);
    std::vector<Real> radii;
    for (int i = 1; i <= 6; ++i) radii.push_back(sc->side(i));
    const double b = 0.2, s = 0.25;
    const auto prof = superdensity_profile_exact(*sc, 6, x, radii, b, s);
    REQUIRE(prof.slope);
    CHECK(*prof.slope >= 0.5 * b * one_star(2, s));
}

TEST_CASE("slicing ratio is the same for different bumps") {
    const auto disc = SampleDomain::make_ball(PointD::Zero(2), 1.0);
    const auto bump = scalar_field(disc, [](const PointD& x) { return std::exp(-4.0 * x.squaredNorm()); }, FieldKind::function, "gauss");
    const auto aniso = scalar_field(
        disc, [](const PointD& x) { return std::exp(-6.0 * x[0] * x[0] - 2.0 * (x[1] - 0.2) * (x[1] - 0.2)); },
        FieldKind::function, "aniso");
    const auto rows = slicing_ratio({bump, aniso, rotated(aniso, 0.7)}, 0.5, 2.0, 12, 240000, 3);
    REQUIRE(rows.size() == 3);
    for (const auto& row : rows) REQUIRE(row.ratio);
    auto close = [](const SliceRow& a, const SliceRow& b) {
        return std::abs(*a.ratio - *b.ratio) <= 3.0 * std::hypot(a.ratio_std_error, b.ratio_std_error);
    };
    CHECK(close(rows[0], rows[1]));
    CHECK(close(rows[1], rows[2]));
    // Averaging over [0, pi) makes the constant pi.
    CHECK(std::abs(*rows[0].ratio - std::numbers::pi) <= 3.0 * rows[0].ratio_std_error);
}

TEST_CASE("slicing guards") {
    const auto flat = scalar_field(SampleDomain::cube(2, 0.0, 1.0), [](const PointD&) { return 1.0; });
    const auto rows = slicing_ratio({flat}, 0.5, 1.0, 3, 3000, 1);
    CHECK_FALSE(rows[0].ratio);
    const auto line = scalar_field(SampleDomain::cube(1, 0.0, 1.0), [](const PointD& x) { return x[0]; });
    CHECK_THROWS_AS(slicing_ratio({line}, 0.5, 1.0, 3, 3000, 1), InvalidArgument);
}

TEST_CASE("fractional poincare ratio") {
    auto f = [](const PointD& x) { return 1.0 - x.squaredNorm(); };
    const auto a = poincare_ratio(f, 1, 1.0, 0.8, 3.0, 100000, 5);
    const auto b = poincare_ratio(f, 1, 1.0, 0.8, 3.0, 200000, 5);
    REQUIRE(a);
    REQUIRE(b);
    CHECK(std::isfinite(a->ratio));
    CHECK(std::abs(a->ratio / b->ratio - 1.0) <= 0.1);
    const auto twice = poincare_ratio([&](const PointD& x) { return 2.0 * f(x); }, 1, 1.0, 0.8, 3.0, 100000, 5);
    CHECK(twice->ratio == doctest::Approx(a->ratio).epsilon(1e-12));
    CHECK_FALSE(poincare_ratio([](const PointD&) { return 0.0; }, 1, 1.0, 0.8, 3.0, 1000, 5));
    CHECK_THROWS_AS(poincare_ratio(f, 1, 1.0, 0.3, 3.0, 1000, 5), InvalidArgument);
    CHECK_THROWS_AS(poincare_ratio([](const PointD&) { return 1.0; }, 1, 1.0, 0.8, 3.0, 1000, 5), InvalidArgument);
}
