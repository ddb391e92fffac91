#include "cantorlab/seminorm.hpp"

#include "cantorlab/error.hpp"
#include "cantorlab/fit.hpp"
#include "cantorlab/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace cantorlab {

namespace bmp = boost::multiprecision;

namespace {

constexpr std::uint64_t kChunks = 8;

double unit_ball_volume(int n) {
    return std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n + 1.0);
}

double sphere_area(int n) { return 2.0 * std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n); }

PointD gaussian_direction(int n, Rng& rng) {
    std::normal_distribution<double> normal;
    PointD e(n);
    double norm = 0.0;
    do {
        for (int i = 0; i < n; ++i) e[i] = normal(rng);
        norm = e.norm();
    } while (!(norm > 1e-300));
    return e / norm;
}

PointD sphere_direction(int n, Rng& rng) {
    if (n == 1) {
        PointD e(1);
        e[0] = uniform01(rng) < 0.5 ? -1.0 : 1.0;
        return e;
    }
    return gaussian_direction(n, rng);
}

PointD ball_point(int n, double radius, Rng& rng) {
    const PointD e = gaussian_direction(n, rng);
    return e * (radius * std::pow(uniform01(rng), 1.0 / n));
}

// Welford moments of the pair (a, b) with Chan merging.
struct Moments {
    std::uint64_t n = 0;
    double mean_a = 0.0, mean_b = 0.0;
    double m2_a = 0.0, m2_b = 0.0, c_ab = 0.0;

    void add(double a, double b) {
        ++n;
        const double da = a - mean_a;
        const double db = b - mean_b;
        mean_a += da / static_cast<double>(n);
        mean_b += db / static_cast<double>(n);
        m2_a += da * (a - mean_a);
        m2_b += db * (b - mean_b);
        c_ab += da * (b - mean_b);
    }

    void merge(const Moments& o) {
        if (o.n == 0) return;
        if (n == 0) {
            *this = o;
            return;
        }
        const double na = static_cast<double>(n), nb = static_cast<double>(o.n);
        const double nt = na + nb;
        const double da = o.mean_a - mean_a, db = o.mean_b - mean_b;
        m2_a += o.m2_a + da * da * na * nb / nt;
        m2_b += o.m2_b + db * db * na * nb / nt;
        c_ab += o.c_ab + da * db * na * nb / nt;
        mean_a += da * nb / nt;
        mean_b += db * nb / nt;
        n += o.n;
    }

    double var_a() const { return n > 1 ? m2_a / static_cast<double>(n - 1) : 0.0; }
    double var_b() const { return n > 1 ? m2_b / static_cast<double>(n - 1) : 0.0; }
    double cov() const { return n > 1 ? c_ab / static_cast<double>(n - 1) : 0.0; }
};

struct Anchor {
    double key = -std::numeric_limits<double>::infinity();
    PointD z;
};

// Per pair: first the base integrand |f(x) - f(y)|^p (times 2 for a
// compact-support partner outside the domain), second an optional
// reweighted companion.
using PairTerm = std::function<std::pair<double, double>(const PointD& x, const ValueD& fx, const PointD& y,
                                                         bool y_inside)>;

struct EngineSetup {
    const FieldSampler* field = nullptr;
    double gamma = 1.0;  // s p
    double mass = 1.0;   // total mass of the direction measure
    std::function<PointD(Rng&)> direction;
    PairTerm term;
    std::uint64_t budget = 0;
    std::uint64_t seed = 0;
    std::uint64_t tag = 0;
    EstimatorOptions options;
};

struct ShellResult {
    ShellStat stat;
    Moments moments;  // already scaled by mass W / q
};

struct EngineResult {
    std::vector<ShellResult> shells;
    double truncation = 0.0;
};

struct Stratum {
    int index = 0;
    double inner = 0.0;
    double outer = std::numeric_limits<double>::infinity();
};

double radial_weight(const Stratum& st, double gamma) {
    if (std::isinf(st.outer)) return std::pow(st.inner, -gamma) / gamma;
    return (std::pow(st.inner, -gamma) - std::pow(st.outer, -gamma)) / gamma;
}

double radial_draw(const Stratum& st, double gamma, Rng& rng) {
    const double u = uniform01(rng);
    if (std::isinf(st.outer)) return st.inner * std::pow(1.0 - u, -1.0 / gamma);
    const double ai = std::pow(st.inner, -gamma);
    const double bi = std::pow(st.outer, -gamma);
    return std::pow(ai - u * (ai - bi), -1.0 / gamma);
}

EngineResult run_engine(const EngineSetup& setup) {
    const FieldSampler& f = *setup.field;
    const SampleDomain& dom = f.domain;
    const int n = dom.dim();
    const double D = dom.diameter();
    const double V = dom.volume();
    const EstimatorOptions& opt = setup.options;
    if (opt.shells < 1) throw InvalidArgument("at least one shell is required");
    if (opt.anchors < 0) throw InvalidArgument("anchor count must be non-negative");
    if (!(opt.defensive > 0.0) || opt.defensive > 1.0) throw InvalidArgument("defensive weight must lie in (0, 1]");

    std::vector<Stratum> strata;
    if (f.compact_support) strata.push_back({-1, D, std::numeric_limits<double>::infinity()});
    for (int m = 0; m < opt.shells; ++m) strata.push_back({m, std::ldexp(D, -m - 1), std::ldexp(D, -m)});

    const std::uint64_t count = strata.size();
    if (setup.budget < 2 * count) throw InvalidArgument("budget must allow two pairs per shell");

    EngineResult result;
    result.truncation = std::ldexp(D, -opt.shells);
    std::vector<PointD> anchors;
    double anchor_radius = 0.0;
    const double ball_unit = unit_ball_volume(n);

    for (std::uint64_t si = 0; si < count; ++si) {
        const Stratum& st = strata[si];
        const std::uint64_t share = setup.budget / count + (si < setup.budget % count ? 1 : 0);
        const double W = radial_weight(st, setup.gamma);
        const double anchor_volume = ball_unit * std::pow(anchor_radius, n);
        const bool adaptive = !anchors.empty() && st.index >= 0;
        const double eps = adaptive ? opt.defensive : 1.0;

        std::vector<Moments> chunk_moments(kChunks);
        std::vector<std::uint64_t> chunk_hits(kChunks, 0);
        std::vector<std::vector<Anchor>> chunk_anchors(kChunks);

        parallel_for(kChunks, opt.jobs, [&](std::size_t c) {
            const std::uint64_t todo = share / kChunks + (c < share % kChunks ? 1 : 0);
            Rng rng = make_stream(setup.seed, setup.tag * 4096 + si, c);
            std::uniform_int_distribution<std::size_t> pick(0, anchors.empty() ? 0 : anchors.size() - 1);
            auto& keep = chunk_anchors[c];
            for (std::uint64_t i = 0; i < todo; ++i) {
                PointD x;
                if (adaptive && uniform01(rng) >= eps)
                    x = anchors[pick(rng)] + ball_point(n, anchor_radius, rng);
                else
                    x = dom.sample(rng);
                const double rho = radial_draw(st, setup.gamma, rng);
                const PointD e = setup.direction(rng);
                const double key_u = uniform01(rng);
                if (!dom.contains(x)) {
                    chunk_moments[c].add(0.0, 0.0);
                    continue;
                }
                double q = eps / V;
                if (adaptive) {
                    std::size_t near = 0;
                    for (const auto& z : anchors)
                        if ((x - z).norm() < anchor_radius) ++near;
                    q += (1.0 - eps) * static_cast<double>(near) /
                         (static_cast<double>(anchors.size()) * anchor_volume);
                }
                const PointD y = x + rho * e;
                const bool y_inside = dom.contains(y);
                if (!y_inside && !f.compact_support) {
                    chunk_moments[c].add(0.0, 0.0);
                    continue;
                }
                const ValueD fx = f(x);
                const auto [b, a] = setup.term(x, fx, y, y_inside);
                const double coef = setup.mass * W / q;
                chunk_moments[c].add(coef * a, coef * b);
                if (b > 0.0) {
                    ++chunk_hits[c];
                    if (opt.anchors > 0) {
                        const double key = std::log(std::max(key_u, 1e-300)) / (coef * b);
                        if (keep.size() < static_cast<std::size_t>(opt.anchors) || key > keep.front().key) {
                            auto cmp = [](const Anchor& l, const Anchor& r) { return l.key > r.key; };
                            if (keep.size() == static_cast<std::size_t>(opt.anchors)) {
                                std::pop_heap(keep.begin(), keep.end(), cmp);
                                keep.pop_back();
                            }
                            keep.push_back({key, 0.5 * (x + y)});
                            std::push_heap(keep.begin(), keep.end(), cmp);
                        }
                    }
                }
            }
        });

        ShellResult sr;
        sr.stat.index = st.index;
        sr.stat.inner = st.inner;
        sr.stat.outer = st.outer;
        std::vector<Anchor> merged;
        for (std::uint64_t c = 0; c < kChunks; ++c) {
            sr.moments.merge(chunk_moments[c]);
            sr.stat.hits += chunk_hits[c];
            merged.insert(merged.end(), chunk_anchors[c].begin(), chunk_anchors[c].end());
        }
        sr.stat.samples = sr.moments.n;
        sr.stat.contribution = sr.moments.mean_b;
        sr.stat.std_error = std::sqrt(sr.moments.var_b() / static_cast<double>(std::max<std::uint64_t>(1, sr.moments.n)));
        result.shells.push_back(sr);

        if (st.index >= 0) {
            std::stable_sort(merged.begin(), merged.end(),
                             [](const Anchor& l, const Anchor& r) { return l.key > r.key; });
            if (merged.size() > static_cast<std::size_t>(opt.anchors)) merged.resize(static_cast<std::size_t>(opt.anchors));
            anchors.clear();
            for (const auto& m : merged) anchors.push_back(m.z);
            // Pairs of the next shell lie within its outer radius of a jump,
            // and the anchors within this shell's outer radius.
            anchor_radius = st.outer + 0.5 * st.outer;
        }
    }
    return result;
}

double field_gap(const ValueD& fx, const ValueD& fy, double p) {
    const double d = (fx - fy).norm();
    if (d == 0.0) return 0.0;
    return p == 1.0 ? d : std::pow(d, p);
}

ValueD zero_like(const ValueD& v) { return ValueD::Zero(v.size()); }

void check_sp(double s, double p) {
    if (!(s > 0.0) || !(s < 1.0)) throw InvalidArgument("s must lie in (0, 1)");
    if (!(p >= 1.0) || !std::isfinite(p)) throw InvalidArgument("p must lie in [1, inf)");
}

}  // namespace

SampleDomain SampleDomain::make_box(std::vector<std::pair<double, double>> intervals) {
    if (intervals.empty() || static_cast<int>(intervals.size()) > kMaxDim)
        throw InvalidArgument("box dimension must lie in [1, 6]");
    for (const auto& [lo, hi] : intervals)
        if (!(hi > lo)) throw InvalidArgument("box interval must have lo < hi");
    SampleDomain d;
    d.shape = Shape::box;
    d.box = std::move(intervals);
    return d;
}

SampleDomain SampleDomain::cube(int n, double lo, double hi) {
    return make_box(std::vector<std::pair<double, double>>(static_cast<std::size_t>(std::max(n, 0)), {lo, hi}));
}

SampleDomain SampleDomain::from_box(const BoxDomain& domain) {
    std::vector<std::pair<double, double>> iv;
    for (const auto& [lo, hi] : domain.intervals) iv.emplace_back(to_double(lo), to_double(hi));
    return make_box(std::move(iv));
}

SampleDomain SampleDomain::make_ball(const PointD& center, double radius) {
    if (center.size() < 1 || center.size() > kMaxDim) throw InvalidArgument("ball dimension must lie in [1, 6]");
    if (!(radius > 0.0)) throw InvalidArgument("ball radius must be positive");
    SampleDomain d;
    d.shape = Shape::ball;
    d.center = center;
    d.radius = radius;
    return d;
}

int SampleDomain::dim() const {
    return shape == Shape::box ? static_cast<int>(box.size()) : static_cast<int>(center.size());
}

double SampleDomain::volume() const {
    if (shape == Shape::ball) return unit_ball_volume(dim()) * std::pow(radius, dim());
    double v = 1.0;
    for (const auto& [lo, hi] : box) v *= hi - lo;
    return v;
}

double SampleDomain::diameter() const {
    if (shape == Shape::ball) return 2.0 * radius;
    double d2 = 0.0;
    for (const auto& [lo, hi] : box) d2 += (hi - lo) * (hi - lo);
    return std::sqrt(d2);
}

bool SampleDomain::contains(const PointD& x) const {
    if (shape == Shape::ball) return (x - center).norm() < radius;
    for (std::size_t i = 0; i < box.size(); ++i)
        if (!(x[static_cast<Eigen::Index>(i)] > box[i].first && x[static_cast<Eigen::Index>(i)] < box[i].second))
            return false;
    return true;
}

PointD SampleDomain::sample(Rng& rng) const {
    if (shape == Shape::ball) return center + ball_point(dim(), radius, rng);
    PointD x(dim());
    for (std::size_t i = 0; i < box.size(); ++i)
        x[static_cast<Eigen::Index>(i)] = box[i].first + (box[i].second - box[i].first) * uniform01(rng);
    return x;
}

std::string to_string(FieldKind kind) {
    switch (kind) {
        case FieldKind::function: return "function";
        case FieldKind::indicator: return "indicator";
        case FieldKind::gradient_field: return "gradient-field";
    }
    return "function";
}

ValueD FieldSampler::operator()(const PointD& x) const {
    ValueD v = eval(x);
    if (kind == FieldKind::indicator)
        for (Eigen::Index i = 0; i < v.size(); ++i)
            if (v[i] != 0.0 && v[i] != 1.0) throw NumericFailure("indicator field returned a value outside {0, 1}");
    return v;
}

FieldSampler scalar_field(SampleDomain domain, std::function<double(const PointD&)> f, FieldKind kind,
                          std::string name) {
    FieldSampler out;
    out.domain = std::move(domain);
    out.kind = kind;
    out.name = std::move(name);
    out.eval = [f = std::move(f)](const PointD& x) {
        ValueD v(1);
        v[0] = f(x);
        return v;
    };
    return out;
}

FieldSampler indicator_field(SampleDomain domain, std::function<bool(const PointD&)> inside, std::string name) {
    return scalar_field(
        std::move(domain), [inside = std::move(inside)](const PointD& x) { return inside(x) ? 1.0 : 0.0; },
        FieldKind::indicator, std::move(name));
}

FieldSampler cantor_indicator(std::shared_ptr<const CantorScaffold> scaffold, int level) {
    if (!scaffold) throw InvalidArgument("scaffold is null");
    if (level < 0 || level > scaffold->depth()) throw InvalidArgument("level outside the scaffold depth");
    SampleDomain dom = SampleDomain::from_box(scaffold->domain());
    return indicator_field(
        std::move(dom),
        [scaffold, level](const PointD& x) {
            Vec xr(x.size());
            for (Eigen::Index i = 0; i < x.size(); ++i) xr[i] = Real(x[i]);
            return scaffold->contains(xr, level);
        },
        "cantor_level_" + std::to_string(level));
}

SeminormEstimate fractional_seminorm(const FieldSampler& f, double s, double p, std::uint64_t budget,
                                     std::uint64_t seed, const EstimatorOptions& options) {
    check_sp(s, p);
    if (budget == 0) throw InvalidArgument("budget must be positive");
    if (!f.eval) throw InvalidArgument("field has no evaluator");
    const int n = f.domain.dim();

    EngineSetup setup;
    setup.field = &f;
    setup.gamma = s * p;
    setup.mass = sphere_area(n);
    setup.direction = [n](Rng& rng) { return sphere_direction(n, rng); };
    setup.term = [&f, p](const PointD&, const ValueD& fx, const PointD& y, bool y_inside) {
        const double g = y_inside ? field_gap(fx, f(y), p) : 2.0 * field_gap(fx, zero_like(fx), p);
        return std::pair<double, double>{g, g};
    };
    setup.budget = budget;
    setup.seed = seed;
    setup.options = options;
    const EngineResult res = run_engine(setup);

    SeminormEstimate est;
    est.s = s;
    est.p = p;
    est.budget = budget;
    est.seed = seed;
    est.truncation_radius = res.truncation;
    double var = 0.0;
    for (const auto& sh : res.shells) {
        est.power += sh.stat.contribution;
        var += sh.stat.std_error * sh.stat.std_error;
        est.shells.push_back(sh.stat);
    }
    est.power = std::max(est.power, 0.0);
    est.power_std_error = std::sqrt(var);
    est.value = std::pow(est.power, 1.0 / p);
    est.std_error = est.power > 0.0 ? est.value / (p * est.power) * est.power_std_error : 0.0;
    return est;
}

double half_interval_seminorm(double s) { return 2.0 * (std::pow(2.0, s) - 1.0) / (s * (1.0 - s)); }

GraphChart lusin_chart(const LusinFunction& u) {
    GraphChart chart;
    chart.k = u.k();
    chart.m = u.m();
    chart.value = [u](const PointD& x) {
        Vec xr(x.size());
        for (Eigen::Index i = 0; i < x.size(); ++i) xr[i] = Real(x[i]);
        const Vec v = eval(u, xr);
        ValueD out(v.size());
        for (Eigen::Index i = 0; i < v.size(); ++i) out[i] = to_double(v[i]);
        return out;
    };
    chart.grad = [u](const PointD& x) {
        Vec xr(x.size());
        for (Eigen::Index i = 0; i < x.size(); ++i) xr[i] = Real(x[i]);
        const Mat g = eval_grad(u, xr);
        Eigen::MatrixXd out(g.rows(), g.cols());
        for (Eigen::Index i = 0; i < g.rows(); ++i)
            for (Eigen::Index j = 0; j < g.cols(); ++j) out(i, j) = to_double(g(i, j));
        return out;
    };
    return chart;
}

GraphChart linear_chart(const Eigen::MatrixXd& A) {
    GraphChart chart;
    chart.k = static_cast<int>(A.cols());
    chart.m = static_cast<int>(A.rows());
    chart.value = [A](const PointD& x) {
        const Eigen::VectorXd v = A * Eigen::VectorXd(x);
        return ValueD(v);
    };
    chart.grad = [A](const PointD&) { return A; };
    return chart;
}

GraphCompare graph_seminorm_compare(const GraphChart& chart, const FieldSampler& f, double s, double p,
                                    std::uint64_t budget, std::uint64_t seed, const EstimatorOptions& options,
                                    int lipschitz_samples) {
    check_sp(s, p);
    if (budget == 0) throw InvalidArgument("budget must be positive");
    if (chart.k != f.domain.dim()) throw InvalidArgument("chart and field dimensions differ");
    if (lipschitz_samples < 1) throw InvalidArgument("lipschitz sample count must be positive");
    const int k = chart.k;

    auto area_factor = [&](const PointD& x) {
        const Eigen::MatrixXd G = chart.grad(x);
        const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(k, k);
        return std::sqrt((I + G.transpose() * G).determinant());
    };

    double L = 0.0;
    Rng lrng = make_stream(seed, 0x1195, 0);
    for (int i = 0; i < lipschitz_samples; ++i) L = std::max(L, chart.grad(f.domain.sample(lrng)).norm());
    if (!std::isfinite(L)) throw NumericFailure("Lipschitz estimate is not finite");

    const double expo = s * p + k;
    EngineSetup setup;
    setup.field = &f;
    setup.gamma = s * p;
    setup.mass = sphere_area(k);
    setup.direction = [k](Rng& rng) { return sphere_direction(k, rng); };
    setup.term = [&](const PointD& x, const ValueD& fx, const PointD& y, bool y_inside) {
        const double g = y_inside ? field_gap(fx, f(y), p) : 2.0 * field_gap(fx, zero_like(fx), p);
        if (g == 0.0) return std::pair<double, double>{0.0, 0.0};
        const ValueD gx = chart.value(x);
        const ValueD gy = chart.value(y);
        const double base_d = (x - y).norm();
        const double graph_d = std::sqrt(base_d * base_d + (gx - gy).squaredNorm());
        const double w = area_factor(x) * area_factor(y) * std::pow(base_d / graph_d, expo);
        return std::pair<double, double>{g, g * w};
    };
    setup.budget = budget;
    setup.seed = seed;
    setup.options = options;
    const EngineResult res = run_engine(setup);

    GraphCompare out;
    out.lipschitz = L;
    for (const auto& sh : res.shells) {
        out.graph += sh.moments.mean_a;
        out.base += sh.moments.mean_b;
    }
    if (out.base > 0.0) {
        out.ratio = out.graph / out.base;
        double var = 0.0;
        for (const auto& sh : res.shells) {
            const double v = sh.moments.var_a() - 2.0 * out.ratio * sh.moments.cov() +
                             out.ratio * out.ratio * sh.moments.var_b();
            var += std::max(v, 0.0) / static_cast<double>(std::max<std::uint64_t>(1, sh.moments.n));
        }
        out.std_error = std::sqrt(var) / out.base;
    }
    const double n_ambient = k + chart.m;
    out.window_lo = std::pow(1.0 + L * L, -expo / 2.0);
    out.window_hi = n_ambient * (1.0 + L * L);
    out.in_window = out.ratio + 3.0 * out.std_error >= out.window_lo && out.ratio - 3.0 * out.std_error <= out.window_hi;
    return out;
}

HolderProbe holder_probe(const FieldSampler& f) {
    HolderProbe probe;
    probe.dim = f.domain.dim();
    probe.name = f.name;
    Rng rng = make_stream(0);
    const Eigen::Index width = f(f.domain.sample(rng)).size();
    probe.eval = [f, width](const Vec& x) {
        const PointD xd = to_vecd(x);
        const ValueD v = f.domain.contains(xd) ? f(xd) : ValueD(ValueD::Zero(width));
        Vec out(v.size());
        for (Eigen::Index i = 0; i < v.size(); ++i) out[i] = Real(v[i]);
        return out;
    };
    probe.propose = [f](Rng& rng, std::uint64_t) { return to_vec(f.domain.sample(rng)); };
    if (!f.compact_support) probe.admissible = [f](const Vec& x) { return f.domain.contains(to_vecd(x)); };
    return probe;
}

HolderProbe gradient_probe(const LusinFunction& u) {
    HolderProbe probe;
    probe.dim = u.k();
    probe.name = "lusin_gradient";
    probe.eval = [u](const Vec& x) {
        const Mat g = eval_grad(u, x);
        return Vec(Eigen::Map<const Vec>(g.data(), g.size()));
    };
    probe.propose = [u](Rng& rng, std::uint64_t index) {
        const CantorScaffold& sc = u.scaffold();
        if (u.depth() < 1) {
            Vec x(sc.k());
            for (int a = 0; a < sc.k(); ++a) {
                const auto& [lo, hi] = sc.domain().intervals[static_cast<std::size_t>(a)];
                x[a] = lo + (hi - lo) * Real(uniform01(rng));
            }
            return x;
        }
        const int level = 1 + static_cast<int>(index % static_cast<std::uint64_t>(u.depth()));
        return sample_support_point(sc, level, rng);
    };
    return probe;
}

HolderTable holder_estimate(const HolderProbe& g, double alpha, const std::vector<Real>& scales,
                            std::uint64_t pairs_per_scale, std::uint64_t seed) {
    if (scales.empty()) throw InvalidArgument("scale list is empty");
    if (!(alpha > 0.0) || alpha > 1.0) throw InvalidArgument("alpha must lie in (0, 1]");
    if (pairs_per_scale == 0) throw InvalidArgument("pairs per scale must be positive");
    for (const auto& t : scales)
        if (!(t > 0)) throw InvalidArgument("scales must be positive");
    HolderTable table;
    table.alpha = alpha;
    const Real a = alpha;
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < scales.size(); ++i) {
        const Real t = scales[i];
        Rng rng = make_stream(seed, i, 0x401d);
        HolderRow row;
        row.scale = to_double(t);
        Real sup = 0;
        std::uint64_t attempts = 0;
        const std::uint64_t max_attempts = 64 * pairs_per_scale;
        std::uint64_t index = 0;
        while (row.pairs < pairs_per_scale && attempts < max_attempts) {
            ++attempts;
            const Vec x = g.propose(rng, index);
            const PointD e = sphere_direction(g.dim, rng);
            const Real rho = t * Real(1.0 + uniform01(rng));
            Vec y = x;
            for (int d = 0; d < g.dim; ++d) y[d] += rho * Real(e[d]);
            if (g.admissible && (!g.admissible(x) || !g.admissible(y))) continue;
            ++index;
            ++row.pairs;
            const Real dist = (x - y).norm();
            if (!(dist > 0)) continue;
            const Real q = (g.eval(x) - g.eval(y)).norm() / bmp::pow(dist, a);
            if (q > sup) sup = q;
        }
        row.sup = to_double(sup);
        table.rows.push_back(row);
        if (row.sup > 0.0) {
            xs.push_back(std::log(row.scale));
            ys.push_back(std::log(row.sup));
        }
    }
    if (const auto fit = fit_line(xs, ys)) {
        table.slope = fit->slope;
        table.growth = -fit->slope;
    }
    return table;
}

DimensionFit box_dimension_estimate(const CantorScaffold& scaffold, int first_level, int last_level) {
    if (first_level < 0 || last_level > scaffold.depth())
        throw InvalidArgument("levels must lie within the scaffold depth");
    if (last_level - first_level + 1 < 3) throw InvalidArgument("box counting needs at least three levels");
    DimensionFit fit;
    fit.theoretical = scaffold.schedule().regime() == Regime::dimension
                          ? theoretical_dimension(scaffold.schedule())
                          : std::numeric_limits<double>::quiet_NaN();
    for (int i = first_level; i <= last_level; ++i) {
        fit.levels.push_back(i);
        fit.log_inverse_side.push_back(-to_double(bmp::log(scaffold.side(i))));
        fit.log_count.push_back(to_double(bmp::log(scaffold.cube_count(i))));
    }
    const auto line = fit_line(fit.log_inverse_side, fit.log_count);
    if (!line) throw NumericFailure("degenerate box-counting fit");
    fit.slope = line->slope;
    return fit;
}

double one_star(int k, double s) { return static_cast<double>(k) / (static_cast<double>(k) - s); }

namespace {

void check_density_args(const std::vector<Real>& radii, double b, double s) {
    if (!(b >= 0.0) || !(b < s) || !(s < 1.0)) throw InvalidArgument("need 0 <= b < s < 1");
    if (radii.empty()) throw InvalidArgument("radius list is empty");
    for (const auto& r : radii)
        if (!(r > 0)) throw InvalidArgument("radii must be positive");
}

void fit_density(DensityProfile& prof) {
    std::vector<double> xs, ys;
    for (const auto& row : prof.rows)
        if (row.ratio > 0.0) {
            xs.push_back(std::log(row.radius));
            ys.push_back(std::log(row.ratio));
        }
    if (const auto fit = fit_line(xs, ys)) prof.slope = fit->slope;
}

}  // namespace

DensityProfile superdensity_profile(const std::function<bool(const Vec&)>& inside, const Vec& x,
                                    const std::vector<Real>& radii, double b, double s, std::uint64_t samples,
                                    std::uint64_t seed) {
    check_density_args(radii, b, s);
    if (samples == 0) throw InvalidArgument("sample count must be positive");
    const int k = static_cast<int>(x.size());
    DensityProfile prof;
    prof.b = b;
    prof.s = s;
    prof.exponent = k + b * one_star(k, s);
    prof.samples = samples;
    prof.seed = seed;
    for (std::size_t i = 0; i < radii.size(); ++i) {
        const Real r = radii[i];
        Rng rng = make_stream(seed, i, 0x5d);
        std::uint64_t out = 0;
        for (std::uint64_t n = 0; n < samples; ++n) {
            const PointD e = gaussian_direction(k, rng);
            const Real len = r * Real(std::pow(uniform01(rng), 1.0 / k));
            Vec y = x;
            for (int d = 0; d < k; ++d) y[d] += len * Real(e[d]);
            if (!inside(y)) ++out;
        }
        const double frac = static_cast<double>(out) / static_cast<double>(samples);
        const double vol = unit_ball_volume(k) * std::pow(to_double(r), k);
        DensityRow row;
        row.radius = to_double(r);
        row.measure = vol * frac;
        row.measure_std_error = vol * std::sqrt(frac * (1.0 - frac) / static_cast<double>(samples));
        const double scale = std::pow(row.radius, prof.exponent);
        row.ratio = row.measure / scale;
        row.ratio_std_error = row.measure_std_error / scale;
        prof.rows.push_back(row);
    }
    fit_density(prof);
    return prof;
}

DensityProfile superdensity_profile_exact(const CantorScaffold& scaffold, int level, const Vec& x,
                                          const std::vector<Real>& radii, double b, double s) {
    check_density_args(radii, b, s);
    if (level < 0 || level > scaffold.depth()) throw InvalidArgument("level outside the scaffold depth");
    const int k = scaffold.k();
    if (x.size() != k) throw InvalidArgument("point dimension differs from the scaffold");
    DensityProfile prof;
    prof.b = b;
    prof.s = s;
    prof.exponent = k + b * one_star(k, s);
    prof.exact = true;
    for (const auto& r : radii) {
        Real log_covered = 0;
        for (int a = 0; a < k; ++a) {
            const Real gap = scaffold.axis(a).uncovered_length(x[a] - r, x[a] + r, level);
            log_covered += bmp::log1p(-gap / (2 * r));
        }
        const Real complement = -bmp::expm1(log_covered) * bmp::pow(2 * r, k);
        DensityRow row;
        row.radius = to_double(r);
        row.measure = to_double(complement);
        row.ratio = to_double(complement / bmp::pow(r, Real(prof.exponent)));
        prof.rows.push_back(row);
    }
    fit_density(prof);
    return prof;
}

std::vector<SliceRow> slicing_ratio(const std::vector<FieldSampler>& fs, double s, double p, int direction_count,
                                    std::uint64_t budget, std::uint64_t seed, const EstimatorOptions& options) {
    check_sp(s, p);
    if (direction_count < 1) throw InvalidArgument("direction count must be positive");
    if (budget == 0) throw InvalidArgument("budget must be positive");
    std::vector<SliceRow> rows;
    for (const auto& f : fs) {
        if (f.domain.dim() != 2) throw InvalidArgument("slicing is implemented for n = 2 only");
        SliceRow row;
        row.name = f.name;
        const SeminormEstimate lhs = fractional_seminorm(f, s, p, budget, seed, options);
        row.lhs = lhs.power;
        row.lhs_std_error = lhs.power_std_error;

        std::vector<double> per_dir;
        double mc_var = 0.0;
        Rng theta_rng = make_stream(seed, 0x511ce, 0);
        const std::uint64_t share = std::max<std::uint64_t>(budget / static_cast<std::uint64_t>(direction_count), 1);
        for (int j = 0; j < direction_count; ++j) {
            const double theta = std::numbers::pi * (j + uniform01(theta_rng)) / direction_count;
            PointD e(2);
            e << std::cos(theta), std::sin(theta);
            EngineSetup setup;
            setup.field = &f;
            setup.gamma = s * p;
            setup.mass = 2.0;
            setup.direction = [e](Rng& rng) { return PointD(uniform01(rng) < 0.5 ? PointD(-e) : e); };
            setup.term = [&f, p](const PointD&, const ValueD& fx, const PointD& y, bool y_inside) {
                const double g = y_inside ? field_gap(fx, f(y), p) : 2.0 * field_gap(fx, zero_like(fx), p);
                return std::pair<double, double>{g, g};
            };
            setup.budget = share;
            setup.seed = seed;
            setup.tag = static_cast<std::uint64_t>(j) + 1;
            setup.options = options;
            const EngineResult res = run_engine(setup);
            double total = 0.0, var = 0.0;
            for (const auto& sh : res.shells) {
                total += sh.stat.contribution;
                var += sh.stat.std_error * sh.stat.std_error;
            }
            per_dir.push_back(total);
            mc_var += var;
        }
        const double J = static_cast<double>(direction_count);
        double mean = 0.0;
        for (double v : per_dir) mean += v;
        mean /= J;
        double spread = 0.0;
        for (double v : per_dir) spread += (v - mean) * (v - mean);
        const double between = direction_count > 1 ? spread / (J - 1.0) / J : 0.0;
        row.rhs = mean;
        row.rhs_std_error = std::sqrt(std::max(between, mc_var / (J * J)));
        if (row.lhs > 0.0 && row.rhs > 0.0) {
            row.ratio = row.lhs / row.rhs;
            row.ratio_std_error = *row.ratio * std::hypot(row.lhs_std_error / row.lhs, row.rhs_std_error / row.rhs);
        }
        rows.push_back(row);
    }
    return rows;
}

FieldSampler rotated(const FieldSampler& f, double angle) {
    if (f.domain.dim() != 2) throw InvalidArgument("rotation is implemented for planar fields");
    if (f.domain.shape != SampleDomain::Shape::ball) throw InvalidArgument("rotation needs a disc domain");
    FieldSampler g = f;
    const PointD c = f.domain.center;
    const double cs = std::cos(angle), sn = std::sin(angle);
    g.eval = [f, c, cs, sn](const PointD& x) {
        const PointD d = x - c;
        PointD back(2);
        back << cs * d[0] + sn * d[1], -sn * d[0] + cs * d[1];
        return f.eval(PointD(c + back));
    };
    g.name = f.name + "_rotated";
    return g;
}

std::optional<PoincareResult> poincare_ratio(const std::function<double(const PointD&)>& f, int n, double R,
                                             double alpha, double q, std::uint64_t budget, std::uint64_t seed,
                                             const EstimatorOptions& options) {
    if (n < 1 || n > kMaxDim) throw InvalidArgument("dimension must lie in [1, 6]");
    if (!(R > 0.0)) throw InvalidArgument("radius must be positive");
    if (!(alpha > 0.0) || !(alpha < 1.0)) throw InvalidArgument("alpha must lie in (0, 1)");
    if (!(q >= 1.0) || !std::isfinite(q)) throw InvalidArgument("q must lie in [1, inf)");
    if (!(alpha * q > n)) throw InvalidArgument("need alpha q > n");
    if (budget == 0) throw InvalidArgument("budget must be positive");

    Rng srng = make_stream(seed, 0x5fe, 0);
    for (int i = 0; i < 1000; ++i) {
        const PointD z = sphere_direction(n, srng) * R;
        if (std::abs(f(z)) > 1e-8) throw InvalidArgument("f does not vanish on the sphere");
    }

    const SampleDomain ball = SampleDomain::make_ball(PointD::Zero(n), R);
    Rng rng = make_stream(seed, 0x11, 0);
    double mean = 0.0, m2 = 0.0;
    for (std::uint64_t i = 0; i < budget; ++i) {
        const double v = std::abs(f(ball.sample(rng)));
        const double d = v - mean;
        mean += d / static_cast<double>(i + 1);
        m2 += d * (v - mean);
    }
    const double V = ball.volume();
    PoincareResult res;
    res.l1 = V * mean;
    res.l1_std_error = budget > 1 ? V * std::sqrt(m2 / static_cast<double>(budget - 1) / static_cast<double>(budget)) : 0.0;

    const SeminormEstimate sn = fractional_seminorm(scalar_field(ball, f), alpha, q, budget, seed + 1, options);
    res.seminorm = sn.value;
    res.seminorm_std_error = sn.std_error;
    if (!(res.seminorm > 0.0)) return std::nullopt;
    res.ratio = res.l1 / (std::pow(R, n * (1.0 - 1.0 / q) + alpha) * res.seminorm);
    return res;
}

}  // namespace cantorlab
