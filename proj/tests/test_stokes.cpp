#include "doctest.h"
#include "fixtures.hpp"

#include "cantorlab/error.hpp"
#include "cantorlab/stokes.hpp"

#include <algorithm>
#include <cmath>

using namespace cantorlab;
namespace bmp = boost::multiprecision;

namespace {

// x1^a x2^b dx_j.
OneForm monomial_form(int a, int b, int j) {
    OneForm g;
    g.g = [=](const Vec2& x) {
        const Real v = bmp::pow(x[0], a) * bmp::pow(x[1], b);
        return j == 0 ? Vec2(v, 0) : Vec2(0, v);
    };
    g.curl = [=](const Vec2& x) -> Real {
        if (j == 1) return a == 0 ? Real(0) : a * bmp::pow(x[0], a - 1) * bmp::pow(x[1], b);
        return b == 0 ? Real(0) : -b * bmp::pow(x[0], a) * bmp::pow(x[1], b - 1);
    };
    return g;
}

OneForm heisenberg_form() {
    OneForm m;
    m.g = [](const Vec2& x) { return Vec2(-2 * x[1], 2 * x[0]); };
    m.curl = [](const Vec2&) { return Real(4); };
    return m;
}

RectangleProbe random_probe(Rng& rng, int order = 8) {
    const double angle = 2 * M_PI * uniform01(rng);
    const Vec2 c(Real(2 * uniform01(rng) - 1), Real(2 * uniform01(rng) - 1));
    const Vec2 v(Real(std::cos(angle)), Real(std::sin(angle)));
    return RectangleProbe(c, Vec2(v / v.norm()), Real(0.1 + uniform01(rng)), Real(0.1 + uniform01(rng)), order);
}

// Closed level intervals of one axis, enumerated from the roots down.
std::vector<std::pair<Real, Real>> axis_intervals(const CantorScaffold& sc, int axis, int level) {
    const AxisCantor& ax = sc.axis(axis);
    std::vector<Real> centers;
    for (std::int64_t m = 0; m < ax.root_count(); ++m) centers.push_back(ax.root_center(m));
    for (int l = 1; l <= level; ++l) {
        std::vector<Real> next;
        for (const auto& c : centers)
            for (std::uint32_t d = 0; d < sc.children_per_axis(); ++d) next.push_back(c + ax.child_offset(l, d));
        centers = std::move(next);
    }
    std::vector<std::pair<Real, Real>> out;
    for (const auto& c : centers) out.emplace_back(c - sc.side(level) / 2, c + sc.side(level) / 2);
    std::sort(out.begin(), out.end());
    return out;
}

Real brute_uncovered(const std::vector<std::pair<Real, Real>>& iv, const Real& a, const Real& b) {
    Real covered = 0;
    for (const auto& [lo, hi] : iv) {
        const Real l = std::max(lo, a), h = std::min(hi, b);
        if (h > l) covered += h - l;
    }
    return (b - a) - covered;
}

bool brute_inside(const std::vector<std::pair<Real, Real>>& iv, const Real& t) {
    return std::any_of(iv.begin(), iv.end(), [&](const auto& p) { return p.first <= t && t <= p.second; });
}

std::shared_ptr<const CantorScaffold> small_scaffold() {
    return std::make_shared<const CantorScaffold>(build_scaffold(
        BoxDomain::cube(2, Real(0), Real(1)), make_schedule(Regime::dimension, 2, 1, Real(0.1), 1.0), 4));
}

}  // namespace

TEST_CASE("gauss-legendre rule integrates polynomials exactly") {
    for (int order : {2, 5, 8, 16}) {
        const auto& rule = gauss_legendre(order);
        for (int d = 0; d < 2 * order; ++d) {
            Real sum = 0;
            for (std::size_t i = 0; i < rule.nodes.size(); ++i) sum += rule.weights[i] * bmp::pow(rule.nodes[i], d);
            const Real exact = d % 2 ? Real(0) : Real(2) / (d + 1);
            CHECK(to_double(bmp::abs(sum - exact)) < 1e-30);
        }
    }
    CHECK_THROWS_AS(gauss_legendre(1), InvalidArgument);
}

TEST_CASE("green identity for monomial forms on rotated rectangles") {
    Rng rng = make_stream(11);
    std::vector<RectangleProbe> probes;
    probes.emplace_back(Vec2(Real(0.5), Real(0.5)), Vec2(1, 0), Real(0.5), Real(0.5));
    while (probes.size() < 10) probes.push_back(random_probe(rng));
    double worst = 0;
    for (const auto& P : probes)
        for (int a = 0; a <= 6; ++a)
            for (int b = 0; a + b <= 6; ++b)
                for (int j = 0; j < 2; ++j) worst = std::max(worst, to_double(stokes_residual(monomial_form(a, b, j), P)));
    CHECK(worst <= 1e-10);
}

TEST_CASE("x1 dx2 on the unit square") {
    const RectangleProbe P(Vec2(Real(0.5), Real(0.5)), Vec2(1, 0), Real(0.5), Real(0.5));
    const OneForm g = monomial_form(1, 0, 1);
    CHECK(to_double(bmp::abs(circulation(g, P) - 1)) < 1e-12);
    CHECK(to_double(bmp::abs(curl_flux(g, P) - 1)) < 1e-12);
    CHECK(to_double(stokes_residual(g, P)) < 1e-12);
}

TEST_CASE("exact gradients and constant forms circulate to zero") {
    OneForm dphi;  // phi = x1^2 x2
    dphi.g = [](const Vec2& x) { return Vec2(2 * x[0] * x[1], x[0] * x[0]); };
    dphi.curl = [](const Vec2&) { return Real(0); };
    OneForm constant;
    constant.g = [](const Vec2&) { return Vec2(Real(3), Real(-7)); };
    constant.curl = [](const Vec2&) { return Real(0); };
    Rng rng = make_stream(12);
    for (int i = 0; i < 10; ++i) {
        const auto P = random_probe(rng);
        CHECK(to_double(bmp::abs(circulation(dphi, P))) < 1e-12);
        CHECK(to_double(stokes_residual(dphi, P)) < 1e-12);
        CHECK(to_double(bmp::abs(circulation(constant, P))) < 1e-12);
        CHECK(to_double(curl_flux(constant, P)) == 0);
    }
}

TEST_CASE("smooth trigonometric form against a high-order oracle") {
    OneForm g;
    g.g = [](const Vec2& x) { return Vec2(bmp::sin(x[0]) * bmp::cos(x[1]), 0); };
    g.curl = [](const Vec2& x) { return Real(bmp::sin(x[0]) * bmp::sin(x[1])); };
    const RectangleProbe P8(Vec2(Real(0.5), Real(0.5)), Vec2(1, 0), Real(0.5), Real(0.5), 8);
    const RectangleProbe P16(Vec2(Real(0.5), Real(0.5)), Vec2(1, 0), Real(0.5), Real(0.5), 16);
    CHECK(to_double(stokes_residual(g, P8)) <= 1e-8);
    CHECK(to_double(bmp::abs(circulation(g, P8) - circulation(g, P16))) <= 1e-8);
    // Closed form: (1 - cos 1)^2.
    const Real exact = (1 - bmp::cos(Real(1))) * (1 - bmp::cos(Real(1)));
    CHECK(to_double(bmp::abs(curl_flux(g, P16) - exact)) < 1e-25);
}

TEST_CASE("orientation flips the circulation sign exactly") {
    Rng rng = make_stream(13);
    const OneForm m = heisenberg_form();
    for (int i = 0; i < 10; ++i) {
        const auto P = random_probe(rng);
        CHECK(circulation(m, P, Orientation::negative) == -circulation(m, P));
    }
}

TEST_CASE("circulation is additive under splitting") {
    Rng rng = make_stream(14);
    const OneForm g = monomial_form(3, 2, 0);
    for (int i = 0; i < 10; ++i) {
        const auto P = random_probe(rng);
        const Real t = Real(uniform01(rng));  // split point along v in (0, 1)
        const Real left = P.half1() * t, right = P.half1() * (1 - t);
        const Vec2 a = P.direction();
        const RectangleProbe L(Vec2(P.center() - a * (P.half1() - left)), a, left, P.half2());
        const RectangleProbe R(Vec2(P.center() + a * (P.half1() - right)), a, right, P.half2());
        CHECK(to_double(bmp::abs(circulation(g, L) + circulation(g, R) - circulation(g, P))) < 1e-12);
    }
}

TEST_CASE("heisenberg flux is four times the area") {
    Rng rng = make_stream(15);
    const OneForm m = heisenberg_form();
    for (int i = 0; i < 5; ++i) {
        const auto P = random_probe(rng);
        CHECK(to_double(bmp::abs(curl_flux(m, P) - 4 * P.area())) < 1e-25);
        CHECK(to_double(stokes_residual(m, P)) < 1e-12);
    }
}

TEST_CASE("probe and quadrature validation") {
    CHECK_THROWS_AS(RectangleProbe(Vec2(0, 0), Vec2(1, 1), Real(1), Real(1)), InvalidArgument);
    CHECK_THROWS_AS(RectangleProbe(Vec2(0, 0), Vec2(1, 0), Real(0), Real(1)), InvalidArgument);
    CHECK_THROWS_AS(RectangleProbe(Vec2(0, 0), Vec2(1, 0), Real(1), Real(1), 1), InvalidArgument);
    OneForm no_curl;
    no_curl.g = [](const Vec2&) { return Vec2(0, 0); };
    const RectangleProbe P(Vec2(0, 0), Vec2(1, 0), Real(1), Real(1));
    CHECK_THROWS_AS(curl_flux(no_curl, P), InvalidArgument);
}

TEST_CASE("exact escape lengths match interval enumeration") {
    const auto sc = small_scaffold();
    const int level = 4;
    const EscapeSet E = EscapeSet::cantor(sc, level);
    const auto ix = axis_intervals(*sc, 0, level);
    const auto iy = axis_intervals(*sc, 1, level);
    Rng rng = make_stream(16);
    for (int i = 0; i < 200; ++i) {
        const Real y = Real(uniform01(rng));
        const Real a = Real(uniform01(rng)), b = a + Real(0.3 * uniform01(rng));
        bool exact = false;
        const Real got = escape_length(E, Segment{Vec2(a, y), Vec2(b, y)}, EscapeOptions{}, &exact);
        CHECK(exact);
        const Real want = brute_inside(iy, y) ? brute_uncovered(ix, a, b) : b - a;
        CHECK(to_double(bmp::abs(got - want)) < 1e-12);
        const Real vert = escape_length(E, Segment{Vec2(y, b), Vec2(y, a)}, EscapeOptions{});
        const Real want_v = brute_inside(ix, y) ? brute_uncovered(iy, a, b) : b - a;
        CHECK(to_double(bmp::abs(vert - want_v)) < 1e-12);
    }
}

TEST_CASE("exact scan rows equal the side-by-side gap sum") {
    const auto sc = small_scaffold();
    const int level = 4;
    const auto ix = axis_intervals(*sc, 0, level);
    const auto iy = axis_intervals(*sc, 1, level);
    Rng rng = make_stream(17);
    const Vec c = sc->center(sample_address(*sc, level, rng));
    const Vec2 x(c[0], c[1]);
    std::vector<Real> radii;
    for (int l = 1; l <= level; ++l) radii.push_back(sc->side(l - 1) / 3);
    const auto scan = boundary_escape_scan(EscapeSet::cantor(sc, level), x, Vec2(1, 0), radii);
    CHECK(scan.mode == "exact");
    REQUIRE(scan.rows.size() == radii.size());
    for (std::size_t i = 0; i < radii.size(); ++i) {
        const auto& row = scan.rows[i];
        CHECK(row.offsets_tried == 32);
        const Real r = radii[i];
        const Vec2 z = x + row.offset;
        const Real x0 = z[0] - r, x1 = z[0] + r, y0 = z[1] - r, y1 = z[1] + r;
        Real want = 0;
        for (const Real& y : {y0, y1}) want += brute_inside(iy, y) ? brute_uncovered(ix, x0, x1) : x1 - x0;
        for (const Real& xx : {x0, x1}) want += brute_inside(ix, xx) ? brute_uncovered(iy, y0, y1) : y1 - y0;
        CHECK(to_double(bmp::abs(row.measure - want)) < 1e-12);
        // The kept offset is the minimum over the family.
        for (int j = 0; j < 32; ++j) {
            const RectangleProbe P(Vec2(x + escape_offset(j, r, Vec2(1, 0))), Vec2(1, 0), r, r);
            Real total = 0;
            for (const auto& s : P.sides()) total += escape_length(EscapeSet::cantor(sc, level), s, EscapeOptions{});
            CHECK(row.measure <= total);
        }
    }
}

TEST_CASE("sampled escape agrees with exact mode") {
    const auto sc = small_scaffold();
    const EscapeSet E = EscapeSet::cantor(sc, 3);
    EscapeOptions sampled;
    sampled.force_sampling = true;
    sampled.samples_per_side = 200000;
    Rng rng = make_stream(18);
    for (int i = 0; i < 20; ++i) {
        const Real y = Real(uniform01(rng));
        const Real a = Real(uniform01(rng) * 0.5);
        const Segment s{Vec2(a, y), Vec2(Real(a + 0.4), y)};
        bool exact = true;
        const Real est = escape_length(E, s, sampled, &exact);
        CHECK_FALSE(exact);
        CHECK(to_double(bmp::abs(est - escape_length(E, s, EscapeOptions{}))) < 1e-4);
    }
}

TEST_CASE("whole plane has no escape and no exponent") {
    const auto E = EscapeSet::oracle([](const Vec2&) { return true; });
    EscapeOptions opts;
    opts.samples_per_side = 100;
    const auto scan = boundary_escape_scan(E, Vec2(0, 0), Vec2(1, 0), {Real(1), Real(0.1), Real(0.01)}, opts);
    CHECK(scan.mode == "sampled");
    for (const auto& row : scan.rows) CHECK(row.measure == 0);
    CHECK_FALSE(scan.exponent.has_value());
}

TEST_CASE("half-plane escape is zero until the square reaches the edge") {
    const auto E = EscapeSet::oracle([](const Vec2& x) { return x[0] < 1; });
    EscapeOptions opts;
    opts.samples_per_side = 1000;
    const auto zero = boundary_escape_scan(E, Vec2(0, 0), Vec2(1, 0), {Real(0.5), Real(0.25), Real(0.1)}, opts);
    for (const auto& row : zero.rows) CHECK(row.measure == 0);
    CHECK_FALSE(zero.exponent.has_value());
    const auto far = boundary_escape_scan(E, Vec2(0, 0), Vec2(1, 0), {Real(3)}, opts);
    CHECK(far.rows[0].measure > 0);
}

TEST_CASE("escape scan reaches a supercritical exponent at a deep cantor point") {
    const auto sc = fixtures::sobolev_scaffold(6, 0.25);
    Rng rng = make_stream(1);
    const Vec c = sc->center(sample_address(*sc, 6, rng));
    std::vector<Real> radii;
    for (int i = 1; i <= 4; ++i) radii.push_back(sc->side(i - 1) / 3);
    const auto scan = boundary_escape_scan(EscapeSet::cantor(sc, 6), Vec2(c[0], c[1]), Vec2(1, 0), radii);
    REQUIRE(scan.exponent.has_value());
    CHECK(*scan.exponent >= 1.05);
    REQUIRE(scan.rows.back().exponent_so_far.has_value());
    CHECK(*scan.rows.back().exponent_so_far == doctest::Approx(*scan.exponent));
}

TEST_CASE("locality witness for the heisenberg form") {
    const OneForm m = heisenberg_form();
    const auto empty = EscapeSet::oracle([](const Vec2&) { return false; });
    EscapeOptions opts;
    opts.samples_per_side = 10;
    opts.offsets = 1;
    const std::vector<Real> radii{Real(0.1), Real(0.01), Real(0.001)};
    const auto zero_potential = [](const Vec2&) { return Real(0); };
    const auto rec = locality_witness(m, zero_potential, empty, Vec2(Real(0.3), Real(-0.2)), Vec2(1, 0), radii, 8, opts);
    REQUIRE(rec.rows.size() == 3);
    for (const auto& row : rec.rows) {
        CHECK(to_double(bmp::abs(row.ratio - 4)) < 1e-12);
        CHECK(to_double(bmp::abs(row.flux_m - 4 * 4 * Real(row.radius) * Real(row.radius))) < 1e-12);
    }
    OneForm h_zero;
    h_zero.g = [](const Vec2&) { return Vec2(0, 0); };
    const auto full = EscapeSet::oracle([](const Vec2&) { return true; });
    const auto rec0 = locality_witness(m, h_zero, full, Vec2(0, 0), Vec2(1, 0), radii, 8, opts);
    for (const auto& row : rec0.rows) {
        CHECK(row.circulation_h == 0);
        CHECK(row.flux_m > 0);
        CHECK(row.escape_measure == 0);
    }
    // A gradient potential does not change the circulation.
    const auto phi = [](const Vec2& x) { return Real(x[0] * x[0] * x[1] + bmp::sin(x[1])); };
    const auto rec1 = locality_witness(m, phi, empty, Vec2(Real(0.3), Real(-0.2)), Vec2(1, 0), radii, 8, opts);
    for (std::size_t i = 0; i < radii.size(); ++i)
        CHECK(to_double(bmp::abs(rec1.rows[i].circulation_h - rec.rows[i].circulation_h)) < 1e-25);
    OneForm no_curl;
    no_curl.g = m.g;
    CHECK_THROWS_AS(locality_witness(no_curl, zero_potential, empty, Vec2(0, 0), Vec2(1, 0), radii), InvalidArgument);
}
