#include "commands.hpp"

#include "cantorlab/distribution.hpp"
#include "cantorlab/error.hpp"
#include "cantorlab/lusin.hpp"
#include "cantorlab/phase.hpp"
#include "cantorlab/schedule.hpp"
#include "cantorlab/seminorm.hpp"
#include "cantorlab/stokes.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace cli {

using namespace cantorlab;
namespace bmp = boost::multiprecision;

namespace {

// ---------------------------------------------------------------- setup

std::vector<OptSpec> operator+(std::vector<OptSpec> a, const std::vector<OptSpec>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

std::vector<OptSpec> scaffold_specs() {
    return {
        {"scaffold", Kind::text, nullptr, "scaffold JSON file (otherwise built from the schedule options)"},
        {"regime", Kind::text, "sobolev", "sobolev, dimension or extremal"},
        {"k", Kind::integer, 2, "dimension of the base"},
        {"B", Kind::integer, 10, "branching exponent"},
        {"s", Kind::real, 0.25, "sobolev exponent"},
        {"d", Kind::real, 1.0, "target dimension (dimension regime)"},
        {"delta", Kind::real, 1e-3, "root mesh"},
        {"depth", Kind::integer, 4, "construction depth"},
        {"domain", Kind::list, nullptr, "lo,hi for a cube or lo1,hi1,...,lok,hik (default (0,1)^k)"},
    };
}

std::vector<OptSpec> lusin_specs() {
    return scaffold_specs() + std::vector<OptSpec>{
        {"distribution", Kind::text, "heisenberg", "builtin name or polynomial JSON file"},
        {"eta", Kind::real, nullptr, "sup-norm target; enforces the smallness condition when given"},
    };
}

Json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open " + path);
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw InvalidArgument(path + " is not valid JSON: " + e.what());
    }
}

// Schema errors raised by nlohmann while decoding a file are schema errors.
template <class F>
auto decode(const std::string& what, F&& f) {
    try {
        return f();
    } catch (const Json::exception& e) {
        throw InvalidArgument(what + ": " + e.what());
    }
}

BoxDomain domain_from(const Options& o, int k) {
    if (!o.has("domain")) return BoxDomain::cube(k, Real(0), Real(1));
    const auto v = o.list("domain");
    std::vector<std::pair<Real, Real>> iv;
    if (v.size() == 2) {
        for (int a = 0; a < k; ++a) iv.emplace_back(Real(v[0]), Real(v[1]));
    } else if (v.size() == static_cast<std::size_t>(2 * k)) {
        for (int a = 0; a < k; ++a) iv.emplace_back(Real(v[2 * a]), Real(v[2 * a + 1]));
    } else {
        throw InvalidArgument("--domain needs 2 or 2k numbers");
    }
    return BoxDomain(iv);
}

RhoSchedule schedule_from(const Options& o) {
    const Regime regime = parse_regime(o.text("regime"));
    const int k = static_cast<int>(o.integer("k"));
    const int B = static_cast<int>(o.integer("B"));
    double param = 0.0;
    if (regime == Regime::sobolev) param = o.real("s");
    if (regime == Regime::dimension) param = o.real("d");
    if (regime == Regime::tabulated) throw InvalidArgument("tabulated schedules are read from scaffold files");
    return make_schedule(regime, k, B, Real(o.real("delta")), param);
}

std::shared_ptr<const CantorScaffold> scaffold_from(const Options& o) {
    if (o.has("scaffold")) {
        const Json doc = read_json_file(o.text("scaffold"));
        return std::make_shared<const CantorScaffold>(
            decode("scaffold file", [&] { return CantorScaffold::from_json(doc); }));
    }
    const RhoSchedule schedule = schedule_from(o);
    const int depth = static_cast<int>(o.integer("depth"));
    return std::make_shared<const CantorScaffold>(build_scaffold(domain_from(o, schedule.k()), schedule, depth));
}

DistributionField distribution_from(const Options& o) {
    const std::string name = o.text("distribution");
    if (std::filesystem::exists(name)) {
        const Json doc = read_json_file(name);
        return decode("distribution file", [&] { return distribution_from_json(doc); });
    }
    return builtin_distribution(name);
}

int level_from(const Options& o, const std::string& key, const CantorScaffold& sc) {
    if (!o.has(key)) return sc.depth();
    const auto level = o.integer(key);
    if (level < 0 || level > sc.depth()) throw InvalidArgument("--" + key + " outside the scaffold depth");
    return static_cast<int>(level);
}

LusinFunction lusin_from(const Options& o, const std::shared_ptr<const CantorScaffold>& sc,
                         const DistributionField& V) {
    if (V.k != sc->k()) throw InvalidArgument("distribution base dimension differs from the scaffold");
    const GradientDatum F = graph_datum(V, sc->domain());
    const int N = o.given("depth") ? static_cast<int>(o.integer("depth")) : sc->depth();
    if (N < 1 || N > sc->depth()) throw InvalidArgument("--depth outside the scaffold depth");
    LusinOptions opts;
    opts.enforce_smallness = o.has("eta");
    const Real eta = o.has("eta") ? Real(o.real("eta")) : Real(1);
    return build_lusin(F, sc, N, eta, opts);
}

Vec point_from(const Options& o, const std::string& key, const CantorScaffold& sc, int level) {
    if (o.has(key)) {
        const auto v = o.list(key);
        if (static_cast<int>(v.size()) != sc.k()) throw InvalidArgument("--" + key + " needs k coordinates");
        Vec x(sc.k());
        for (int i = 0; i < sc.k(); ++i) x[i] = Real(v[static_cast<std::size_t>(i)]);
        return x;
    }
    Rng rng = make_stream(static_cast<std::uint64_t>(o.integer("seed")), 0xce47);
    return sc.center(sample_address(sc, level, rng));
}

// r_i = l_{i-1} / 3 for i = 1..level unless radii are given.
std::vector<Real> radii_from(const Options& o, const CantorScaffold& sc, int level) {
    std::vector<Real> radii;
    if (o.has("radii")) {
        for (double r : o.list("radii")) {
            if (!(r > 0)) throw InvalidArgument("radii must be positive");
            radii.push_back(Real(r));
        }
        return radii;
    }
    for (int i = 1; i <= std::max(level, 1); ++i) radii.push_back(sc.side(i - 1) / 3);
    return radii;
}

Vec2 direction_from(const Options& o) {
    const double angle = o.real("angle");
    if (angle == 0.0) return Vec2(1, 0);
    const Real a(angle);
    return Vec2(bmp::cos(a), bmp::sin(a));
}

OneForm heisenberg_form() {
    OneForm m;
    m.g = [](const Vec2& x) { return Vec2(-2 * x[1], 2 * x[0]); };
    m.curl = [](const Vec2&) { return Real(4); };
    return m;
}

OneForm monomial_form(int a, int b, int j) {
    OneForm g;
    g.g = [=](const Vec2& x) {
        const Real v = bmp::pow(x[0], a) * bmp::pow(x[1], b);
        return j == 1 ? Vec2(v, 0) : Vec2(0, v);
    };
    g.curl = [=](const Vec2& x) -> Real {
        if (j == 2) return a == 0 ? Real(0) : a * bmp::pow(x[0], a - 1) * bmp::pow(x[1], b);
        return b == 0 ? Real(0) : -b * bmp::pow(x[0], a) * bmp::pow(x[1], b - 1);
    };
    return g;
}

std::string str(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

// ---------------------------------------------------------------- build

Outcome run_build(const Options& o) {
    const auto sc = scaffold_from(o);
    Outcome out;
    Report& r = out.report;
    r.columns = {"level", "side", "rho", "cube_count", "measure", "closed_form", "relative_error"};
    const RhoSchedule& sch = sc->schedule();
    Real previous = -1;
    for (int l = 0; l <= sc->depth(); ++l) {
        const Real m = sc->measure(l);
        const Real closed = Real(sc->card_roots()) * bmp::pow(pow2(sc->B() * sc->k()), l) *
                            bmp::pow(sch.closed_form_side(l), sc->k());
        const Real rel = closed == 0 ? bmp::abs(m) : bmp::abs(m - closed) / closed;
        r.add_row({l, number(sc->side(l)), number(sch.rho(l)), number(sc->cube_count(l)), number(m), number(closed),
                   number(rel)});
        if (rel > Real(1e-12)) out.violations.push_back("measure identity fails at level " + std::to_string(l));
        if (previous >= 0 && m > previous) out.violations.push_back("measure increases at level " + std::to_string(l));
        previous = m;
    }
    r.summary["regime"] = to_string(sch.regime());
    r.summary["card_roots"] = sc->card_roots();
    r.summary["depth"] = sc->depth();
    r.summary["limit_measure"] = number(sc->limit_measure());
    if (sch.regime() == Regime::dimension) r.summary["dimension"] = theoretical_dimension(sch);
    if (o.has("out")) {
        out.artifact = sc->to_json().dump(2) + "\n";
        out.artifact_path = o.text("out");
    }
    out.report_path = o.has("table") ? o.text("table") : std::string();
    if (o.has("lusin_out")) {
        const auto u = lusin_from(o, sc, distribution_from(o));
        std::ofstream f(o.text("lusin_out"), std::ios::binary);
        if (!f) throw InvalidArgument("cannot write " + o.text("lusin_out"));
        f << u.to_json().dump(2) << "\n";
    }
    return out;
}

// ---------------------------------------------------------------- eval

Outcome run_eval(const Options& o) {
    std::optional<LusinFunction> u;
    if (o.has("lusin")) {
        const Json doc = read_json_file(o.text("lusin"));
        u = decode("function file", [&] { return LusinFunction::from_json(doc); });
    } else {
        const auto sc = scaffold_from(o);
        u = lusin_from(o, sc, distribution_from(o));
    }
    const int k = u->k(), m = u->m();
    std::vector<Vec> points;
    if (o.has("points")) {
        const auto v = o.list("points");
        if (v.size() % static_cast<std::size_t>(k) != 0) throw InvalidArgument("--points needs k coordinates per point");
        for (std::size_t i = 0; i < v.size(); i += static_cast<std::size_t>(k)) {
            Vec x(k);
            for (int a = 0; a < k; ++a) x[a] = Real(v[i + static_cast<std::size_t>(a)]);
            points.push_back(x);
        }
    } else {
        Rng rng = make_stream(static_cast<std::uint64_t>(o.integer("seed")), 0xe7a1);
        for (long long i = 0; i < o.integer("samples"); ++i)
            points.push_back(sample_support_point(u->scaffold(), u->depth(), rng));
    }
    Outcome out;
    Report& r = out.report;
    for (int a = 1; a <= k; ++a) r.columns.push_back("x" + std::to_string(a));
    for (int p = 1; p <= m; ++p) r.columns.push_back("u" + std::to_string(p));
    for (int p = 1; p <= m; ++p)
        for (int a = 1; a <= k; ++a) r.columns.push_back("du" + std::to_string(p) + "_" + std::to_string(a));
    Real sup = 0;
    for (const auto& x : points) {
        const auto jet = u->evaluate(x);
        std::vector<Json> row;
        for (int a = 0; a < k; ++a) row.push_back(number(x[a]));
        for (int p = 0; p < m; ++p) {
            row.push_back(number(jet.value[p]));
            sup = std::max<Real>(sup, Real(bmp::abs(jet.value[p])));
        }
        for (int p = 0; p < m; ++p)
            for (int a = 0; a < k; ++a) row.push_back(number(jet.grad(p, a)));
        r.add_row(std::move(row));
    }
    r.summary["depth"] = u->depth();
    r.summary["sup_bound"] = number(u->sup_bound());
    if (sup > u->sup_bound()) out.violations.push_back("|u| exceeds 4 M1 sqrt(k) sum r_j");
    return out;
}

// ---------------------------------------------------------------- residuals

Outcome run_residuals(const Options& o) {
    const auto sc = scaffold_from(o);
    const auto u = lusin_from(o, sc, distribution_from(o));
    const int N = u.depth();
    const Real C = u.residual_constant();
    const Real bound = C * sc->side(N);
    Outcome out;
    Report& r = out.report;
    r.columns = {"kind", "index"};
    for (int a = 1; a <= u.k(); ++a) r.columns.push_back("x" + std::to_string(a));
    r.columns.insert(r.columns.end(), {"residual", "bound", "pass"});
    Rng rng = make_stream(static_cast<std::uint64_t>(o.integer("seed")), 0x7e51);
    Real worst = 0;
    const long long samples = o.integer("samples");
    for (long long i = 0; i < samples; ++i) {
        const Vec c = sc->center(sample_address(*sc, N, rng));
        Vec y = c;
        for (int a = 0; a < u.k(); ++a) y[a] += (Real(uniform01(rng)) - Real(0.5)) * sc->side(N);
        for (const auto& [kind, x] : {std::pair<std::string, Vec>{"center", c}, {"interior", y}}) {
            const Real res = residual(u, u.datum(), x);
            worst = std::max<Real>(worst, res);
            std::vector<Json> row{kind, i};
            for (int a = 0; a < u.k(); ++a) row.push_back(number(x[a]));
            row.insert(row.end(), {number(res), number(bound), res <= bound});
            r.add_row(std::move(row));
        }
    }
    if (worst > bound) out.violations.push_back("residual exceeds C r_N");
    r.summary["constant"] = number(C);
    r.summary["bound"] = number(bound);
    r.summary["max_residual"] = number(worst);
    return out;
}

// ---------------------------------------------------------------- verify

Outcome run_verify(const Options& o) {
    const auto sc = scaffold_from(o);
    const DistributionField V = distribution_from(o);
    const auto u = lusin_from(o, sc, V);
    std::optional<Real> tol;
    if (o.has("tol")) tol = Real(o.real("tol"));
    const auto rep = tangency_rate(u, V, tol, static_cast<std::uint64_t>(o.integer("samples")),
                                   static_cast<std::uint64_t>(o.integer("seed")),
                                   static_cast<std::uint64_t>(o.integer("exhaustive_limit")));
    Outcome out;
    Report& r = out.report;
    r.columns = {"centers", "passed", "rate", "tolerance", "max_deviation", "exhaustive",
                 "certificate_a", "certificate_b", "certificate_p", "certificate_value"};
    Rng rng = make_stream(static_cast<std::uint64_t>(o.integer("seed")), 0xce47);
    const Vec c = sc->center(sample_address(*sc, u.depth(), rng));
    const auto check = tangency_check(u, V, c, rep.tolerance);
    const auto cert = noninvolutivity_certificate(V, check.graph_point);
    r.add_row({rep.centers, rep.passed, rep.rate(), number(rep.tolerance), number(rep.max_deviation),
               rep.exhaustive, cert ? Json(cert->a) : Json(nullptr), cert ? Json(cert->b) : Json(nullptr),
               cert ? Json(cert->p) : Json(nullptr), cert ? number(cert->value) : Json(nullptr)});
    if (rep.passed != rep.centers) out.violations.push_back("tangency fails at some level-N centres");
    r.summary["distribution"] = V.provenance;
    r.summary["depth"] = u.depth();
    return out;
}

// ---------------------------------------------------------------- seminorm

Outcome run_seminorm(const Options& o) {
    const std::string field = o.text("field");
    const double s = o.real("s"), p = o.real("p");
    EstimatorOptions eo;
    eo.jobs = static_cast<int>(o.integer("jobs"));
    eo.shells = static_cast<int>(o.integer("shells"));
    eo.anchors = static_cast<int>(o.integer("anchors"));
    std::optional<FieldSampler> f;
    std::optional<double> reference;
    std::string reference_kind;
    if (field == "half-interval") {
        f = indicator_field(SampleDomain::cube(1, 0.0, 1.0), [](const PointD& x) { return x[0] < 0.5; },
                            "half-interval");
        if (p == 1.0) {
            reference = half_interval_seminorm(s);
            reference_kind = "closed_form";
        }
    } else if (field == "cantor") {
        const auto sc = scaffold_from(o);
        const int level = level_from(o, "level", *sc);
        f = cantor_indicator(sc, level);
        if (p == 1.0) {
            const auto bound = indicator_seminorm_bound(sc->schedule(), to_double(sc->domain().volume()), s, level);
            reference = bound.value;
            reference_kind = "analytic_bound";
        }
    } else {
        throw InvalidArgument("--field must be half-interval or cantor");
    }
    const auto est = fractional_seminorm(*f, s, p, static_cast<std::uint64_t>(o.integer("budget")),
                                         static_cast<std::uint64_t>(o.integer("seed")), eo);
    Outcome out;
    Report& r = out.report;
    r.columns = {"field", "s", "p", "budget", "seed", "value", "std_error", "power", "power_std_error",
                 "truncation_radius", "reference", "reference_kind", "z"};
    std::optional<double> z;
    if (reference && reference_kind == "closed_form" && est.std_error > 0)
        z = (est.value - *reference) / est.std_error;
    r.add_row({field, s, p, est.budget, est.seed, number(est.value), number(est.std_error), number(est.power),
               number(est.power_std_error), number(est.truncation_radius), number(reference),
               reference_kind.empty() ? Json(nullptr) : Json(reference_kind), number(z)});
    if (z && std::abs(*z) > 3) out.violations.push_back("estimate is more than 3 standard errors off the closed form");
    if (reference && reference_kind == "analytic_bound" && est.value > 2 * *reference)
        out.violations.push_back("estimate exceeds twice the analytic bound");
    Json shells = Json::array();
    for (const auto& sh : est.shells)
        shells.push_back({{"index", sh.index}, {"inner", number(sh.inner)}, {"outer", number(sh.outer)},
                          {"samples", sh.samples}, {"hits", sh.hits}, {"contribution", number(sh.contribution)},
                          {"std_error", number(sh.std_error)}});
    r.summary["shells"] = shells;
    return out;
}

// ---------------------------------------------------------------- dimension

Outcome run_dimension(const Options& o) {
    const auto sc = scaffold_from(o);
    const int first = static_cast<int>(o.integer("first"));
    const int last = o.has("last") ? static_cast<int>(o.integer("last")) : sc->depth();
    const auto fit = box_dimension_estimate(*sc, first, last);
    Outcome out;
    Report& r = out.report;
    r.columns = {"level", "log_inverse_side", "log_count", "slope_so_far", "theoretical"};
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < fit.levels.size(); ++i) {
        xs.push_back(fit.log_inverse_side[i]);
        ys.push_back(fit.log_count[i]);
        std::optional<double> so_far;
        if (xs.size() >= 2) {
            double mx = 0, my = 0;
            for (std::size_t j = 0; j < xs.size(); ++j) mx += xs[j], my += ys[j];
            mx /= xs.size(), my /= ys.size();
            double sxy = 0, sxx = 0;
            for (std::size_t j = 0; j < xs.size(); ++j) sxy += (xs[j] - mx) * (ys[j] - my), sxx += (xs[j] - mx) * (xs[j] - mx);
            if (sxx > 0) so_far = sxy / sxx;
        }
        r.add_row({fit.levels[i], number(fit.log_inverse_side[i]), number(fit.log_count[i]), number(so_far),
                   number(fit.theoretical)});
    }
    r.summary["slope"] = number(fit.slope);
    r.summary["theoretical"] = number(fit.theoretical);
    if (std::isfinite(fit.theoretical) && std::abs(fit.slope - fit.theoretical) > 0.05)
        out.violations.push_back("box-counting slope differs from d by more than 0.05");
    return out;
}

// ---------------------------------------------------------------- superdensity

Outcome run_superdensity(const Options& o) {
    const auto sc = scaffold_from(o);
    const int level = level_from(o, "level", *sc);
    const Vec x = point_from(o, "x", *sc, level);
    const auto radii = radii_from(o, *sc, level);
    const double b = o.real("b");
    const double s = o.real("s");
    const DensityProfile prof =
        o.flag("exact") ? superdensity_profile_exact(*sc, level, x, radii, b, s)
                        : superdensity_profile([&](const Vec& y) { return sc->contains(y, level); }, x, radii, b, s,
                                               static_cast<std::uint64_t>(o.integer("samples")),
                                               static_cast<std::uint64_t>(o.integer("seed")));
    Outcome out;
    Report& r = out.report;
    r.columns = {"radius", "complement", "complement_std_error", "ratio", "ratio_std_error"};
    for (const auto& row : prof.rows)
        r.add_row({number(row.radius), number(row.measure), number(row.measure_std_error), number(row.ratio),
                   number(row.ratio_std_error)});
    r.summary["exponent"] = number(prof.exponent);
    r.summary["exact"] = prof.exact;
    r.summary["slope"] = number(prof.slope);
    Json xs = Json::array();
    for (int a = 0; a < x.size(); ++a) xs.push_back(number(x[a]));
    r.summary["x"] = xs;
    for (const auto& row : prof.rows)
        if (row.measure < 0) out.violations.push_back("negative complement measure");
    return out;
}

// ---------------------------------------------------------------- stokes

Outcome run_stokes(const Options& o) {
    const std::string form = o.text("form");
    std::vector<std::pair<std::string, OneForm>> forms;
    double tol = o.real("tol");
    if (form == "heisenberg") {
        forms.emplace_back("heisenberg", heisenberg_form());
    } else if (form == "x1dx2") {
        forms.emplace_back("x1dx2", monomial_form(1, 0, 2));
    } else if (form == "sin") {
        OneForm g;
        g.g = [](const Vec2& x) { return Vec2(bmp::sin(x[0]) * bmp::cos(x[1]), 0); };
        g.curl = [](const Vec2& x) { return Real(bmp::sin(x[0]) * bmp::sin(x[1])); };
        forms.emplace_back("sin", g);
        if (!o.given("tol")) tol = 1e-8;
    } else if (form == "monomials") {
        const int degree = static_cast<int>(o.integer("degree"));
        for (int a = 0; a <= degree; ++a)
            for (int b = 0; a + b <= degree; ++b)
                for (int j = 1; j <= 2; ++j)
                    forms.emplace_back("x1^" + std::to_string(a) + " x2^" + std::to_string(b) + " dx" + std::to_string(j),
                                       monomial_form(a, b, j));
    } else {
        throw InvalidArgument("--form must be heisenberg, x1dx2, sin or monomials");
    }
    const int order = static_cast<int>(o.integer("order"));
    const int panels = static_cast<int>(o.integer("panels"));
    std::vector<RectangleProbe> probes;
    if (o.has("center")) {
        const auto c = o.list("center");
        if (c.size() != 2) throw InvalidArgument("--center needs two coordinates");
        probes.emplace_back(Vec2(Real(c[0]), Real(c[1])), direction_from(o), Real(o.real("half1")),
                            Real(o.real("half2")), order, panels);
    } else {
        Rng rng = make_stream(static_cast<std::uint64_t>(o.integer("seed")), 0x570c);
        for (long long i = 0; i < o.integer("rectangles"); ++i) {
            const Real angle(2 * M_PI * uniform01(rng));
            const Vec2 c(Real(2 * uniform01(rng) - 1), Real(2 * uniform01(rng) - 1));
            const Real h1(0.1 + uniform01(rng)), h2(0.1 + uniform01(rng));
            probes.emplace_back(c, Vec2(bmp::cos(angle), bmp::sin(angle)), h1, h2, order, panels);
        }
    }
    Outcome out;
    Report& r = out.report;
    r.columns = {"rectangle", "form", "center_x", "center_y", "angle", "half1", "half2", "circulation", "flux",
                 "residual"};
    Real worst = 0;
    for (std::size_t i = 0; i < probes.size(); ++i) {
        const auto& P = probes[i];
        const double angle = std::atan2(to_double(P.direction()[1]), to_double(P.direction()[0]));
        for (const auto& [name, g] : forms) {
            const Real circ = circulation(g, P), flux = curl_flux(g, P);
            const Real res = bmp::abs(circ - flux);
            worst = std::max<Real>(worst, res);
            r.add_row({i, name, number(P.center()[0]), number(P.center()[1]), angle, number(P.half1()),
                       number(P.half2()), number(circ), number(flux), number(res)});
        }
    }
    r.summary["max_residual"] = number(worst);
    r.summary["tolerance"] = tol;
    if (worst > Real(tol)) out.violations.push_back("stokes residual " + str(to_double(worst)) + " above tolerance");
    return out;
}

// ---------------------------------------------------------------- escape / witness

std::vector<OptSpec> probe_specs() {
    return {
        {"level", Kind::integer, nullptr, "scaffold level of E (default: depth)"},
        {"x", Kind::list, nullptr, "probe point (default: centre of a seeded level cube)"},
        {"radii", Kind::list, nullptr, "radii (default l_{i-1}/3, i = 1..level)"},
        {"angle", Kind::real, 0.0, "direction angle of v"},
        {"offsets", Kind::integer, 32, "offset family size"},
        {"samples_per_side", Kind::integer, 10000, "sampling mode points per side"},
        {"force_sampling", Kind::flag, false, "sample even when exact mode is available"},
    };
}

EscapeOptions escape_options(const Options& o) {
    EscapeOptions eo;
    eo.offsets = static_cast<int>(o.integer("offsets"));
    eo.samples_per_side = static_cast<int>(o.integer("samples_per_side"));
    eo.force_sampling = o.flag("force_sampling");
    return eo;
}

Outcome run_escape(const Options& o) {
    const auto sc = scaffold_from(o);
    if (sc->k() != 2) throw InvalidArgument("escape scans need k = 2");
    const int level = level_from(o, "level", *sc);
    const Vec x = point_from(o, "x", *sc, level);
    const auto radii = radii_from(o, *sc, level);
    const auto scan =
        boundary_escape_scan(EscapeSet::cantor(sc, level), Vec2(x[0], x[1]), direction_from(o), radii, escape_options(o));
    Outcome out;
    Report& r = out.report;
    r.columns = {"radius", "escape_measure", "offset_1", "offset_2", "offsets_tried", "exponent_so_far", "mode"};
    for (std::size_t i = 0; i < scan.rows.size(); ++i) {
        const auto& row = scan.rows[i];
        r.add_row({number(row.radius), number(row.measure), number(row.offset[0]), number(row.offset[1]),
                   row.offsets_tried, number(row.exponent_so_far), scan.mode});
        if (row.measure < 0 || row.measure > 8 * radii[i] * (1 + Real(1e-12)))
            out.violations.push_back("escape measure outside [0, perimeter]");
    }
    r.summary["exponent"] = number(scan.exponent);
    r.summary["mode"] = scan.mode;
    return out;
}

Outcome run_witness(const Options& o) {
    const auto sc = scaffold_from(o);
    const DistributionField V = distribution_from(o);
    if (V.provenance != "heisenberg") throw InvalidArgument("witness needs the heisenberg distribution");
    const auto u = lusin_from(o, sc, V);
    const int level = level_from(o, "level", *sc);
    const Vec x = point_from(o, "x", *sc, level);
    const auto radii = radii_from(o, *sc, level);
    const auto potential = [&](const Vec2& z) { return u.evaluate(Vec(z)).value[0]; };
    const auto rec = locality_witness(heisenberg_form(), potential, EscapeSet::cantor(sc, level), Vec2(x[0], x[1]),
                                      direction_from(o), radii, static_cast<int>(o.integer("order")), escape_options(o));
    Outcome out;
    Report& r = out.report;
    r.columns = {"radius", "circulation", "flux", "ratio", "escape_measure", "exponent_so_far"};
    std::vector<EscapeRow> so_far;
    for (const auto& row : rec.rows) {
        EscapeRow e;
        e.radius = row.radius;
        e.measure = row.escape_measure;
        so_far.push_back(e);
        std::vector<double> xs, ys;
        for (const auto& q : so_far)
            if (q.measure > 0) xs.push_back(std::log(q.radius)), ys.push_back(std::log(to_double(q.measure)));
        std::optional<double> slope;
        if (xs.size() >= 2) {
            double mx = 0, my = 0;
            for (std::size_t j = 0; j < xs.size(); ++j) mx += xs[j], my += ys[j];
            mx /= xs.size(), my /= ys.size();
            double sxy = 0, sxx = 0;
            for (std::size_t j = 0; j < xs.size(); ++j) sxy += (xs[j] - mx) * (ys[j] - my), sxx += (xs[j] - mx) * (xs[j] - mx);
            if (sxx > 0) slope = sxy / sxx;
        }
        r.add_row({number(row.radius), number(row.circulation_h), number(row.flux_m), number(row.ratio),
                   number(row.escape_measure), number(slope)});
        if (bmp::abs(row.ratio - 4) > Real(1e-8)) out.violations.push_back("circulation ratio differs from curl = 4");
    }
    r.summary["mode"] = rec.mode;
    r.summary["escape_exponent"] = number(rec.escape_exponent);
    return out;
}

// ---------------------------------------------------------------- phase

Outcome run_phase(const Options& o) {
    const double q = o.real("q");
    Outcome out;
    Report& r = out.report;
    r.columns = {"s", "alpha", "q", "tau", "classification"};
    if (o.has("s") || o.has("alpha")) {
        const auto p = classify(o.real("s"), o.real("alpha"), q);
        r.add_row({p.s, p.alpha, format_q(p.q), p.tau, to_string(p.phase)});
        return out;
    }
    const auto g = figure_grid(q, static_cast<int>(o.integer("resolution")));
    for (const auto& c : g.cells) r.add_row({c.s, c.alpha, format_q(c.q), c.tau, to_string(c.phase)});
    const double expected = std::isinf(q) ? 0.5 : q / (2 * q - 1);
    r.summary["zero_crossing"] = g.zero_crossing;
    r.summary["expected_crossing"] = expected;
    if (std::abs(g.zero_crossing - expected) > 1.0 / g.resolution)
        out.violations.push_back("zero crossing misses q/(2q-1) by more than one cell");
    return out;
}

// ---------------------------------------------------------------- check

Outcome run_check(const Options&) {
    Outcome out;
    Report& r = out.report;
    r.columns = {"invariant", "value", "tolerance", "pass"};
    auto record = [&](const std::string& name, double value, double tol, bool pass) {
        r.add_row({name, number(value), tol, pass});
        if (!pass) out.violations.push_back(name);
    };
    {
        const auto sc = build_scaffold(BoxDomain::cube(2, Real(0), Real(1)),
                                       make_schedule(Regime::dimension, 2, 1, Real(0.1), 1.0), 8);
        Real worst = 0;
        for (int l = 0; l <= 8; ++l) {
            const Real closed = Real(sc.card_roots()) * bmp::pow(pow2(2), l) * bmp::pow(sc.side(l), 2);
            worst = std::max<Real>(worst, Real(bmp::abs(sc.measure(l) - closed) / closed));
        }
        record("measure identity", to_double(worst), 1e-12, worst <= Real(1e-12));
        const auto fit = box_dimension_estimate(sc, 2, 8);
        record("box dimension (2,1,1)", fit.slope, 0.05, std::abs(fit.slope - 1.0) <= 0.05);
    }
    {
        const auto V = heisenberg();
        Vec x(3);
        x << Real(0.3), Real(-0.2), Real(0.1);
        const Real defect = involutivity_defect(V, x, 1, 2, 1);
        record("heisenberg defect", to_double(defect), 0.0, defect == 4);
        const Vec br = lie_bracket(spanning_pair(V, 1, 2), x);
        const Real err = std::max<Real>(bmp::abs(br[0]), std::max<Real>(bmp::abs(br[1]), bmp::abs(br[2] + 4)));
        record("heisenberg bracket", to_double(err), 1e-12, err <= Real(1e-12));
    }
    {
        Rng rng = make_stream(5, 0x570c);
        Real worst = 0;
        for (int i = 0; i < 3; ++i) {
            const Real angle(2 * M_PI * uniform01(rng));
            const RectangleProbe P(Vec2(Real(uniform01(rng)), Real(uniform01(rng))),
                                   Vec2(bmp::cos(angle), bmp::sin(angle)), Real(0.5), Real(0.3));
            for (int a = 0; a <= 6; ++a)
                for (int b = 0; a + b <= 6; ++b)
                    for (int j = 1; j <= 2; ++j) worst = std::max<Real>(worst, stokes_residual(monomial_form(a, b, j), P));
        }
        record("stokes residual", to_double(worst), 1e-10, worst <= Real(1e-10));
    }
    {
        const double inf = std::numeric_limits<double>::infinity();
        const bool ok = classify(0.25, 0.6, inf).phase == Phase::frobenius &&
                        classify(0.25, 0.4, inf).phase == Phase::counterexample &&
                        classify(0.6, 0.1, 2).phase == Phase::frobenius &&
                        classify(0.1, 0.95, 1).phase == Phase::frobenius &&
                        classify(0.1, 0.85, 1).phase == Phase::counterexample &&
                        classify(0.5, 0.4, inf).phase == Phase::frobenius;
        record("phase probes", ok ? 1.0 : 0.0, 0.0, ok);
    }
    {
        const auto sc = std::make_shared<const CantorScaffold>(
            build_scaffold(BoxDomain::cube(2, Real(-1e-3), Real(1e-3)),
                           make_schedule(Regime::sobolev, 2, 10, Real(1e-3), 0.25), 3));
        const auto u = build_lusin(heisenberg_datum(sc->domain()), sc, 3, Real(0.2));
        const auto rep = tangency_rate(u, heisenberg(), std::nullopt, 2000, 1);
        record("tangency rate", rep.rate(), 0.0, rep.passed == rep.centers);
    }
    return out;
}

}  // namespace

std::vector<Command> all_commands() {
    const std::vector<OptSpec> none;
    return {
        {"build", "build a scaffold and print its measure table",
         scaffold_specs() + std::vector<OptSpec>{
                                {"table", Kind::text, nullptr, "measure table file (stdout when absent)"},
                                {"distribution", Kind::text, "heisenberg", "distribution for --lusin-out"},
                                {"eta", Kind::real, nullptr, "sup-norm target for --lusin-out"},
                                {"lusin_out", Kind::text, nullptr, "also export the Lusin function here"},
                            },
         run_build},
        {"eval", "evaluate u and Du",
         lusin_specs() + std::vector<OptSpec>{
                             {"lusin", Kind::text, nullptr, "exported function file"},
                             {"points", Kind::list, nullptr, "flattened k-tuples"},
                             {"samples", Kind::integer, 10, "seeded support points when --points is absent"},
                         },
         run_eval},
        {"residuals", "residual |Du - F(x, u)| at level-N cubes",
         lusin_specs() + std::vector<OptSpec>{{"samples", Kind::integer, 1000, "sampled cubes"}}, run_residuals},
        {"verify", "tangency pass rate at level-N centres",
         lusin_specs() + std::vector<OptSpec>{
                             {"samples", Kind::integer, 10000, "sampled centres above the exhaustive limit"},
                             {"tol", Kind::real, nullptr, "tolerance (default 2 C r_N)"},
                             {"exhaustive_limit", Kind::integer, 100000, "exhaustive below this many centres"},
                         },
         run_verify},
        {"seminorm", "Monte Carlo fractional seminorm",
         scaffold_specs() + std::vector<OptSpec>{
                                {"field", Kind::text, "half-interval", "half-interval or cantor"},
                                {"p", Kind::real, 1.0, "integrability exponent"},
                                {"budget", Kind::integer, 1000000, "pair budget"},
                                {"shells", Kind::integer, 30, "dyadic shells"},
                                {"anchors", Kind::integer, 64, "adaptive proposal anchors"},
                                {"level", Kind::integer, nullptr, "scaffold level for the cantor field"},
                            },
         run_seminorm},
        {"dimension", "box-counting dimension from exact counts",
         scaffold_specs() + std::vector<OptSpec>{
                                {"first", Kind::integer, 2, "first level"},
                                {"last", Kind::integer, nullptr, "last level (default: depth)"},
                            },
         run_dimension},
        {"superdensity", "complement density profile around a point",
         scaffold_specs() + std::vector<OptSpec>{
                                {"level", Kind::integer, nullptr, "scaffold level of E"},
                                {"x", Kind::list, nullptr, "centre (default: centre of a seeded level cube)"},
                                {"radii", Kind::list, nullptr, "radii (default l_{i-1}/3)"},
                                {"b", Kind::real, 0.1, "superdensity exponent b < s"},
                                {"samples", Kind::integer, 100000, "samples per radius"},
                                {"exact", Kind::flag, false, "exact cube windows instead of sampled balls"},
                            },
         run_superdensity},
        {"stokes", "circulation against curl flux on rectangles",
         std::vector<OptSpec>{
             {"form", Kind::text, "monomials", "heisenberg, x1dx2, sin or monomials"},
             {"degree", Kind::integer, 6, "max degree for monomials"},
             {"rectangles", Kind::integer, 10, "seeded random rectangles"},
             {"center", Kind::list, nullptr, "single rectangle centre"},
             {"angle", Kind::real, 0.0, "single rectangle direction angle"},
             {"half1", Kind::real, 0.5, "single rectangle half side along v"},
             {"half2", Kind::real, 0.5, "single rectangle half side along v_perp"},
             {"order", Kind::integer, 8, "Gauss-Legendre order"},
             {"panels", Kind::integer, 1, "panels per side"},
             {"tol", Kind::real, 1e-10, "residual tolerance for --check"},
         },
         run_stokes},
        {"escape", "boundary-escape scan at a Cantor point", scaffold_specs() + probe_specs(), run_escape},
        {"witness", "circulation-versus-curl locality record",
         lusin_specs() + probe_specs() + std::vector<OptSpec>{{"order", Kind::integer, 8, "Gauss-Legendre order"}},
         run_witness},
        {"phase", "phase classification grid",
         std::vector<OptSpec>{
             {"q", Kind::extended, "inf", "integrability q (real >= 1 or inf)"},
             {"resolution", Kind::integer, 128, "grid cells per axis"},
             {"s", Kind::real, nullptr, "classify a single point"},
             {"alpha", Kind::real, nullptr, "classify a single point"},
         },
         run_phase},
        {"check", "fast invariant self-check", none, run_check, true},
    };
}

}  // namespace cli
