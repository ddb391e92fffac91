#include <doctest.h>

#include "cantorlab/error.hpp"
#include "cantorlab/scaffold.hpp"

#include <algorithm>
#include <cmath>
#include <random>

using namespace cantorlab;

namespace {

// Brute-force enumeration of (delta Z) ∩ {p : Q(p, delta) inside (lo, hi)} per axis.
int brute_axis_roots(double lo, double hi, double delta) {
    int n = 0;
    for (int m = -1000; m <= 1000; ++m) {
        const long double p = static_cast<long double>(m) * delta;
        if (p - delta / 2.0L > lo && p + delta / 2.0L < hi) ++n;
    }
    return n;
}

// All level-`level` intervals of a 1-D scaffold, listed explicitly.
std::vector<std::pair<long double, long double>> enumerate_intervals(const CantorScaffold& sc,
                                                                     int level) {
    std::vector<long double> centers;
    const auto& ax = sc.axis(0);
    for (std::int64_t r = 0; r < ax.root_count(); ++r) centers.push_back(to_double(ax.root_center(r)));
    const int M = 1 << sc.B();
    for (int l = 1; l <= level; ++l) {
        std::vector<long double> next;
        const long double spacing = to_double(sc.side(l - 1)) / M;
        for (long double c : centers)
            for (int m = 0; m < M; ++m) next.push_back(c + (m - (M - 1) / 2.0L) * spacing);
        centers = std::move(next);
    }
    std::vector<std::pair<long double, long double>> out;
    const long double half = to_double(sc.side(level)) / 2.0L;
    for (long double c : centers) out.emplace_back(c - half, c + half);
    return out;
}

long double brute_uncovered(const std::vector<std::pair<long double, long double>>& iv,
                            long double a, long double b) {
    long double covered = 0;
    for (const auto& [lo, hi] : iv) covered += std::max(0.0L, std::min(b, hi) - std::max(a, lo));
    return (b - a) - covered;
}

Vec point(std::initializer_list<double> xs) {
    Vec v(static_cast<Eigen::Index>(xs.size()));
    int i = 0;
    for (double x : xs) v[i++] = x;
    return v;
}

}  // namespace

TEST_CASE("root lattice follows the closed-cube containment rule") {
    const auto unit = BoxDomain::cube(2, Real(0), Real(1));
    const auto sch = make_schedule(Regime::dimension, 2, 1, Real(0.3), 1.0);
    const auto sc = build_scaffold(unit, sch, 2);
    const int per_axis = brute_axis_roots(0.0, 1.0, 0.3);
    CHECK(per_axis == 2);
    CHECK(sc.card_roots() == per_axis * per_axis);

    const auto sc9 = build_scaffold(unit, make_schedule(Regime::dimension, 2, 1, Real(0.25), 1.0), 2);
    CHECK(sc9.card_roots() == 9);

    const BoxDomain skew({{Real(-0.37), Real(0.81)}, {Real(0.02), Real(0.5)}});
    const auto scs = build_scaffold(skew, make_schedule(Regime::dimension, 2, 1, Real(0.07), 1.0), 1);
    CHECK(scs.card_roots() == brute_axis_roots(-0.37, 0.81, 0.07) * brute_axis_roots(0.02, 0.5, 0.07));

    CHECK_THROWS_AS(build_scaffold(unit, make_schedule(Regime::dimension, 2, 1, Real(2), 1.0), 1),
                    InvalidArgument);
    const BoxDomain thin({{Real(0), Real(1)}, {Real(0), Real(0.45)}});
    CHECK_THROWS_AS(build_scaffold(thin, make_schedule(Regime::dimension, 2, 1, Real(0.44), 1.0), 1),
                    InvalidArgument);
}

TEST_CASE("cube counts and sibling gaps") {
    const auto sc = build_scaffold(BoxDomain::cube(2, Real(0), Real(1)),
                                   make_schedule(Regime::sobolev, 2, 10, Real(0.01), 0.25), 6);
    CHECK(sc.cube_count(2) == Real(sc.card_roots()) * pow2(2 * 10 * 2));
    const auto& ax = sc.axis(0);
    for (int level = 1; level <= 6; ++level) {
        const Real spacing = ax.child_offset(level, 1) - ax.child_offset(level, 0);
        const Real gap = spacing - sc.side(level);
        CHECK(to_double(abs(gap - sc.rho(level)) / sc.rho(level)) < 1e-20);
        // Edge margin between the outermost child and the parent boundary.
        const Real margin = sc.side(level - 1) / 2 - (ax.child_offset(level, 1023) + sc.side(level) / 2);
        CHECK(margin > 0);
        CHECK(to_double(abs(margin - sc.rho(level) / 2) / sc.rho(level)) < 1e-20);
    }
}

TEST_CASE("membership examples") {
    const auto sch = make_schedule(Regime::dimension, 2, 1, Real(0.1), 1.0);
    const auto sc = build_scaffold(BoxDomain::cube(2, Real(0), Real(1)), sch, 5);
    CubeAddress root;
    root.root = {3, 4};
    const Vec c0 = sc.center(root);
    CHECK(membership(sc, c0, 0));
    CHECK_FALSE(membership(sc, c0, 1));

    CubeAddress deep = root;
    deep.digits = {{0, 1}, {1, 1}, {0, 0}, {1, 0}, {1, 1}};
    const Vec cN = sc.center(deep);
    for (int l = 0; l <= 5; ++l) CHECK(membership(sc, cN, l));
    CHECK(sc.locate(cN, 5) == deep);
    CHECK(sc.deserialize(sc.serialize(deep)) == deep);
    CHECK_FALSE(membership(sc, point({-3.0, 0.5}), 0));
}

TEST_CASE("membership is nested") {
    const auto sc = build_scaffold(BoxDomain::cube(2, Real(0), Real(1)),
                                   make_schedule(Regime::dimension, 2, 1, Real(0.1), 1.0), 6);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int deep_hits = 0;
    for (int n = 0; n < 10000; ++n) {
        const Vec x = point({u(rng), u(rng)});
        for (int i = 0; i < 6; ++i)
            if (membership(sc, x, i + 1)) CHECK(membership(sc, x, i));
        deep_hits += membership(sc, x, 6);
    }
    CHECK(deep_hits > 0);
}

TEST_CASE("measure identities") {
    const auto gap_free = build_scaffold(BoxDomain::cube(2, Real(0), Real(1)),
                                         RhoSchedule::tabulated(2, 2, Real(0.2), {}), 5);
    for (int l = 0; l <= 5; ++l)
        CHECK(to_double(gap_free.measure(l)) ==
              doctest::Approx(gap_free.card_roots() * 0.04).epsilon(1e-15));

    const auto sc = build_scaffold(BoxDomain::cube(2, Real(0), Real(1)),
                                   make_schedule(Regime::dimension, 2, 1, Real(0.1), 1.0), 12);
    for (int i = 0; i < 12; ++i) {
        CHECK(sc.measure(i + 1) < sc.measure(i));
        const Real lhs = sc.measure(i) - sc.measure(i + 1);
        const Real rhs = Real(sc.card_roots()) * pow2(2 * i) *
                         (pow(sc.side(i), 2) - pow2(2) * pow(sc.side(i + 1), 2));
        CHECK(to_double(abs(lhs - rhs) / rhs) < 1e-12);
    }
    CHECK(to_double(sc.measure(12)) < 1e-3 * to_double(sc.measure(0)));
}

TEST_CASE("Monte Carlo membership agrees with the exact measure") {
    const auto sc = build_scaffold(BoxDomain::cube(2, Real(0), Real(1)),
                                   make_schedule(Regime::dimension, 2, 1, Real(0.1), 1.0), 4);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const int n = 200000;
    int hits = 0;
    for (int i = 0; i < n; ++i) hits += membership(sc, point({u(rng), u(rng)}), 4);
    const double p = static_cast<double>(hits) / n;
    const double se = std::sqrt(p * (1 - p) / n);
    CHECK(std::fabs(p - to_double(sc.measure(4))) < 3 * se);
}

TEST_CASE("dimension regime is self-similar") {
    const auto sch = make_schedule(Regime::dimension, 2, 2, Real(0.1), 1.5);
    const auto sc = build_scaffold(BoxDomain::cube(2, Real(0), Real(1)), sch, 6);
    const Real scale = pow2(2) / sch.lambda();
    for (int level = 1; level < 6; ++level)
        for (std::uint32_t d = 0; d < 4; ++d) {
            const Real rescaled = sc.axis(0).child_offset(level + 1, d) * scale;
            CHECK(to_double(abs(rescaled - sc.axis(0).child_offset(level, d))) < 1e-12 * 0.1);
        }
}

TEST_CASE("uncovered length matches explicit interval enumeration") {
    const auto sch = RhoSchedule::tabulated(1, 1, Real(0.2),
                                            {Real(0.01), Real(0.02), Real(0.004), Real(0.001)});
    const auto sc = build_scaffold(BoxDomain::cube(1, Real(0), Real(1)), sch, 3);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-0.1, 1.1);
    for (int level = 0; level <= 3; ++level) {
        const auto iv = enumerate_intervals(sc, level);
        for (int n = 0; n < 200; ++n) {
            double a = u(rng), b = u(rng);
            if (a > b) std::swap(a, b);
            const double got = to_double(sc.axis(0).uncovered_length(Real(a), Real(b), level));
            CHECK(got == doctest::Approx(static_cast<double>(brute_uncovered(iv, a, b))).epsilon(1e-12));
        }
    }
}

TEST_CASE("uncovered length of a whole deep interval is the closed-form gap sum") {
    const auto sc = build_scaffold(BoxDomain::cube(1, Real(-0.001), Real(0.001)),
                                   make_schedule(Regime::sobolev, 1, 10, Real(0.001), 0.25), 7);
    const auto& ax = sc.axis(0);
    Real c = ax.root_center(0);
    for (int j = 1; j <= 4; ++j) c += ax.child_offset(j, 511);
    const Real half = sc.side(4) / 2;
    const Real got = ax.uncovered_length(c - half, c + half, 7);
    Real expected = 0;
    for (int m = 5; m <= 7; ++m) expected += pow2(10 * (m - 4)) * sc.rho(m);
    CHECK(to_double(abs(got - expected) / expected) < 1e-12);
}

TEST_CASE("scaffold JSON round trip") {
    const auto sc = build_scaffold(BoxDomain::cube(2, Real(0), Real(1)),
                                   make_schedule(Regime::dimension, 2, 1, Real(0.1), 1.0), 6);
    const Json doc = sc.to_json();
    CHECK(doc["card_L1"].get<int>() == 81);
    CHECK(doc["r"].size() == 7);
    const auto back = CantorScaffold::from_json(Json::parse(doc.dump()));
    CHECK(back.to_json().dump() == doc.dump());
    CHECK_THROWS_AS(CantorScaffold::from_json(Json::parse("{\"depth\":2}")), InvalidArgument);
}
