#include "cantorlab/stokes.hpp"

#include "cantorlab/error.hpp"
#include "cantorlab/fit.hpp"

#include <cmath>
#include <map>
#include <mutex>

namespace cantorlab {

namespace bmp = boost::multiprecision;

namespace {

GaussRule build_rule(int n) {
    GaussRule rule;
    rule.nodes.resize(static_cast<std::size_t>(n));
    rule.weights.resize(static_cast<std::size_t>(n));
    const Real pi = real_pi();
    const Real tol = Real(1e-32);
    for (int i = 0; i < n; ++i) {
        Real x = bmp::cos(pi * (Real(i) + Real(0.75)) / (Real(n) + Real(0.5)));
        Real dp = 0;
        for (int it = 0; it < 100; ++it) {
            Real p0 = 1, p1 = x;
            for (int j = 2; j <= n; ++j) {
                const Real p2 = ((2 * j - 1) * x * p1 - (j - 1) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1);
            const Real dx = p1 / dp;
            x -= dx;
            if (bmp::abs(dx) < tol) break;
        }
        Real p0 = 1, p1 = x;
        for (int j = 2; j <= n; ++j) {
            const Real p2 = ((2 * j - 1) * x * p1 - (j - 1) * p0) / j;
            p0 = p1;
            p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1);
        rule.nodes[static_cast<std::size_t>(i)] = x;
        rule.weights[static_cast<std::size_t>(i)] = 2 / ((1 - x * x) * dp * dp);
    }
    return rule;
}

bool axis_aligned(const Vec2& v) { return v[0] == 0 || v[1] == 0; }

Real segment_length(const Segment& s) { return (s.end - s.start).norm(); }

bool covered_1d(const AxisCantor& axis, const Real& t, int level) {
    const auto tr = axis.trace(t, level);
    return tr.root >= 0 && tr.depth >= level;
}

std::optional<double> fit_positive(const std::vector<EscapeRow>& rows) {
    std::vector<double> xs, ys;
    for (const auto& row : rows)
        if (row.measure > 0) {
            xs.push_back(std::log(row.radius));
            ys.push_back(std::log(to_double(row.measure)));
        }
    if (const auto fit = fit_line(xs, ys)) return fit->slope;
    return std::nullopt;
}

}  // namespace

const GaussRule& gauss_legendre(int order) {
    if (order < 2) throw InvalidArgument("quadrature order must be at least 2");
    static std::mutex mutex;
    static std::map<int, GaussRule> cache;
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(order);
    if (it == cache.end()) it = cache.emplace(order, build_rule(order)).first;
    return it->second;
}

RectangleProbe::RectangleProbe(Vec2 center, Vec2 v, Real half1, Real half2, int order, int panels)
    : center_(std::move(center)), v_(std::move(v)), half1_(half1), half2_(half2), order_(order), panels_(panels) {
    if (bmp::abs(v_.norm() - 1) > Real(1e-12)) throw InvalidArgument("rectangle direction must be a unit vector");
    if (!(half1_ > 0) || !(half2_ > 0)) throw InvalidArgument("rectangle sides must be positive");
    if (order_ < 2) throw InvalidArgument("quadrature order must be at least 2");
    if (panels_ < 1) throw InvalidArgument("panel count must be positive");
}

std::array<Segment, 4> RectangleProbe::sides() const {
    const Vec2 a = half1_ * v_;
    const Vec2 b = half2_ * normal_direction();
    const Vec2 c0 = center_ - a - b;
    const Vec2 c1 = center_ + a - b;
    const Vec2 c2 = center_ + a + b;
    const Vec2 c3 = center_ - a + b;
    return {Segment{c0, c1}, Segment{c1, c2}, Segment{c2, c3}, Segment{c3, c0}};
}

Real line_integral(const OneForm& g, const Segment& s, int order, int panels) {
    if (!g.g) throw InvalidArgument("one-form has no evaluator");
    if (panels < 1) throw InvalidArgument("panel count must be positive");
    const GaussRule& rule = gauss_legendre(order);
    const Vec2 d = s.end - s.start;
    Real sum = 0;
    for (int p = 0; p < panels; ++p)
        for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
            const Real t = (Real(p) + (rule.nodes[i] + 1) / 2) / panels;
            const Vec2 x = s.start + t * d;
            sum += rule.weights[i] * g.g(x).dot(d);
        }
    return sum / (2 * panels);
}

Real circulation(const OneForm& g, const RectangleProbe& P, Orientation orientation) {
    Real sum = 0;
    for (const auto& s : P.sides()) sum += line_integral(g, s, P.order(), P.panels());
    return orientation == Orientation::positive ? sum : Real(-sum);
}

Real curl_flux(const OneForm& g, const RectangleProbe& P) {
    if (!g.curl) throw InvalidArgument("one-form has no curl evaluator");
    const GaussRule& rule = gauss_legendre(P.order());
    const Vec2 a = P.half1() * P.direction();
    const Vec2 b = P.half2() * P.normal_direction();
    const int np = P.panels();
    Real sum = 0;
    for (int pi = 0; pi < np; ++pi)
        for (int pj = 0; pj < np; ++pj)
            for (std::size_t i = 0; i < rule.nodes.size(); ++i)
                for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
                    const Real s = (2 * Real(pi) + rule.nodes[i] + 1) / np - 1;
                    const Real t = (2 * Real(pj) + rule.nodes[j] + 1) / np - 1;
                    sum += rule.weights[i] * rule.weights[j] * g.curl(P.center() + s * a + t * b);
                }
    return sum * P.half1() * P.half2() / (Real(np) * np);
}

Real stokes_residual(const OneForm& g, const RectangleProbe& P) {
    return bmp::abs(circulation(g, P) - curl_flux(g, P));
}

EscapeSet EscapeSet::oracle(std::function<bool(const Vec2&)> inside) {
    if (!inside) throw InvalidArgument("membership oracle is empty");
    EscapeSet E;
    E.inside = std::move(inside);
    return E;
}

EscapeSet EscapeSet::cantor(std::shared_ptr<const CantorScaffold> scaffold, int level) {
    if (!scaffold) throw InvalidArgument("scaffold is null");
    if (scaffold->k() != 2) throw InvalidArgument("escape scans need a planar scaffold");
    if (level < 0 || level > scaffold->depth()) throw InvalidArgument("level outside the scaffold depth");
    EscapeSet E;
    E.scaffold = std::move(scaffold);
    E.level = level;
    return E;
}

bool EscapeSet::contains(const Vec2& x) const {
    if (scaffold) return scaffold->contains(Vec(x), level);
    return inside(x);
}

Real escape_length(const EscapeSet& E, const Segment& s, const EscapeOptions& options, bool* exact_used) {
    const bool horizontal = s.start[1] == s.end[1];
    const bool vertical = s.start[0] == s.end[0];
    if (E.exact() && !options.force_sampling && (horizontal || vertical)) {
        if (exact_used) *exact_used = true;
        const int along = horizontal ? 0 : 1;
        const int across = 1 - along;
        const Real lo = std::min(s.start[along], s.end[along]);
        const Real hi = std::max(s.start[along], s.end[along]);
        if (!covered_1d(E.scaffold->axis(across), s.start[across], E.level)) return hi - lo;
        return E.scaffold->axis(along).uncovered_length(lo, hi, E.level);
    }
    if (exact_used) *exact_used = false;
    if (options.samples_per_side < 1) throw InvalidArgument("samples per side must be positive");
    const int n = options.samples_per_side;
    int out = 0;
    for (int i = 0; i < n; ++i) {
        const Real t = (Real(i) + Real(0.5)) / n;
        if (!E.contains(Vec2(s.start + t * (s.end - s.start)))) ++out;
    }
    return segment_length(s) * out / n;
}

Vec2 escape_offset(int j, const Real& r, const Vec2& v) {
    const Real a = Real((j % 4) - 2) / 8;
    const Real b = Real((j / 4) % 8 - 4) / 16;
    const Vec2 vp(-v[1], v[0]);
    return r * (a * v + b * vp);
}

EscapeScan boundary_escape_scan(const EscapeSet& E, const Vec2& x, const Vec2& v, const std::vector<Real>& radii,
                                const EscapeOptions& options) {
    if (radii.empty()) throw InvalidArgument("radius list is empty");
    if (options.offsets < 1) throw InvalidArgument("offset count must be positive");
    EscapeScan scan;
    const bool want_exact = E.exact() && !options.force_sampling && axis_aligned(v);
    scan.mode = want_exact ? "exact" : "sampled";
    for (const auto& r : radii) {
        if (!(r > 0)) throw InvalidArgument("radii must be positive");
        EscapeRow row;
        row.radius = to_double(r);
        bool first = true;
        for (int j = 0; j < options.offsets; ++j) {
            const Vec2 off = escape_offset(j, r, v);
            const RectangleProbe P(Vec2(x + off), v, r, r);
            Real total = 0;
            for (const auto& s : P.sides()) total += escape_length(E, s, options);
            if (first || total < row.measure) {
                row.measure = total;
                row.offset = off;
                first = false;
            }
            ++row.offsets_tried;
        }
        scan.rows.push_back(row);
        scan.rows.back().exponent_so_far = fit_positive(scan.rows);
    }
    scan.exponent = fit_positive(scan.rows);
    return scan;
}

namespace {

WitnessRecord witness_impl(const OneForm& m, const std::function<Real(const RectangleProbe&)>& circ_h,
                           const EscapeSet& E, const Vec2& x, const Vec2& v, const std::vector<Real>& radii, int order,
                           const EscapeOptions& options) {
    if (!m.curl) throw InvalidArgument("witness needs a one-form with a curl evaluator");
    const EscapeScan scan = boundary_escape_scan(E, x, v, radii, options);
    WitnessRecord rec;
    rec.mode = scan.mode;
    rec.escape_exponent = scan.exponent;
    for (std::size_t i = 0; i < radii.size(); ++i) {
        const auto& row = scan.rows[i];
        const RectangleProbe P(Vec2(x + row.offset), v, radii[i], radii[i], order);
        WitnessRow w;
        w.radius = row.radius;
        w.offset = row.offset;
        w.circulation_h = circ_h(P);
        w.flux_m = curl_flux(m, P);
        w.ratio = w.circulation_h / P.area();
        w.escape_measure = row.measure;
        rec.rows.push_back(w);
    }
    return rec;
}

}  // namespace

WitnessRecord locality_witness(const OneForm& m, const std::function<Real(const Vec2&)>& potential,
                               const EscapeSet& E, const Vec2& x, const Vec2& v, const std::vector<Real>& radii,
                               int order, const EscapeOptions& options) {
    if (!potential) throw InvalidArgument("potential is empty");
    auto circ = [&](const RectangleProbe& P) {
        Real exact_part = 0;
        for (const auto& s : P.sides()) exact_part += potential(s.end) - potential(s.start);
        return circulation(m, P) - exact_part;
    };
    return witness_impl(m, circ, E, x, v, radii, order, options);
}

WitnessRecord locality_witness(const OneForm& m, const OneForm& h, const EscapeSet& E, const Vec2& x, const Vec2& v,
                               const std::vector<Real>& radii, int order, const EscapeOptions& options) {
    auto circ = [&](const RectangleProbe& P) { return circulation(h, P); };
    return witness_impl(m, circ, E, x, v, radii, order, options);
}

}  // namespace cantorlab
