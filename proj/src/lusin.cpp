#include "cantorlab/lusin.hpp"

#include "cantorlab/cutoff.hpp"
#include "cantorlab/error.hpp"

#include <algorithm>
#include <cmath>

namespace cantorlab {

namespace bmp = boost::multiprecision;

GradientDatum heisenberg_datum(const BoxDomain& domain) {
    if (domain.dim() != 2) throw InvalidArgument("heisenberg datum needs a planar domain");
    GradientDatum F;
    F.k = 2;
    F.m = 1;
    F.name = "heisenberg";
    F.u_independent = true;
    F.eval = [](const Vec& x, const Vec&) {
        Mat a(1, 2);
        a(0, 0) = -2 * x[1];
        a(0, 1) = 2 * x[0];
        return a;
    };
    Real r2 = 0;
    for (const auto& [lo, hi] : domain.intervals) {
        const Real e = std::max(bmp::abs(lo), bmp::abs(hi));
        r2 += e * e;
    }
    F.M1 = 2 * bmp::sqrt(r2);
    F.M2 = 2;
    return F;
}

GradientDatum constant_datum(const Mat& A) {
    GradientDatum F;
    F.k = static_cast<int>(A.cols());
    F.m = static_cast<int>(A.rows());
    F.name = "constant";
    F.u_independent = true;
    F.eval = [A](const Vec&, const Vec&) { return A; };
    F.M1 = A.norm();
    F.M2 = 0;
    return F;
}

GradientDatum zero_datum(int k, int m) {
    GradientDatum F = constant_datum(Mat::Zero(m, k));
    F.name = "zero";
    return F;
}

DatumSpotCheck spot_check(const GradientDatum& F, const BoxDomain& domain, int samples,
                          std::uint64_t seed) {
    Rng rng = make_stream(seed, 0x5107);
    auto draw = [&](Vec& x, Vec& u) {
        x.resize(F.k);
        u.resize(F.m);
        for (int i = 0; i < F.k; ++i) {
            const auto& [lo, hi] = domain.intervals[static_cast<std::size_t>(i)];
            x[i] = lo + (hi - lo) * Real(uniform01(rng));
        }
        for (int i = 0; i < F.m; ++i) u[i] = Real(2 * uniform01(rng) - 1);
    };
    DatumSpotCheck out;
    Vec x, u, y, v;
    for (int n = 0; n < samples; ++n) {
        draw(x, u);
        draw(y, v);
        const Mat fx = F.eval(x, u);
        out.max_norm = std::max(out.max_norm, Real(fx.norm()));
        Real dist2 = (x - y).squaredNorm() + (u - v).squaredNorm();
        if (dist2 > 0)
            out.max_quotient = std::max(out.max_quotient, Real((fx - F.eval(y, v)).norm() / bmp::sqrt(dist2)));
    }
    return out;
}

namespace {

struct PathTrace {
    std::vector<AxisCantor::Trace> axes;
    int min_depth = -1;
};

PathTrace trace_all(const CantorScaffold& sc, const Vec& x, int upto) {
    PathTrace t;
    t.min_depth = upto;
    for (int a = 0; a < sc.k(); ++a) {
        t.axes.push_back(sc.axis(a).trace(x[a], upto));
        t.min_depth = std::min(t.min_depth, t.axes.back().depth);
    }
    return t;
}

CubeAddress address_of(const PathTrace& t, int levels) {
    CubeAddress addr;
    for (const auto& ax : t.axes) addr.root.push_back(ax.root);
    for (int l = 1; l <= levels; ++l) {
        std::vector<std::uint32_t> row;
        for (const auto& ax : t.axes) row.push_back(ax.digits[static_cast<std::size_t>(l - 1)]);
        addr.digits.push_back(std::move(row));
    }
    return addr;
}

Vec local_at(const PathTrace& t, int level) {
    Vec v(static_cast<Eigen::Index>(t.axes.size()));
    for (std::size_t a = 0; a < t.axes.size(); ++a) v[static_cast<Eigen::Index>(a)] = t.axes[a].local[static_cast<std::size_t>(level)];
    return v;
}

struct Bump {
    Real sigma = 1;
    Vec grad;
};

Bump layer_bump(const CantorScaffold& sc, const Vec& local, int level) {
    const Real half = sc.side(level) / 2;
    const Real width = sc.rho(level) / 4;
    const auto k = local.size();
    std::vector<RampValue> r;
    for (Eigen::Index i = 0; i < k; ++i) r.push_back(ramp(local[i], half, width));
    Bump b;
    b.grad = Vec::Zero(k);
    for (const auto& ri : r) b.sigma *= ri.v;
    for (Eigen::Index i = 0; i < k; ++i) {
        Real p = r[static_cast<std::size_t>(i)].d1;
        for (Eigen::Index j = 0; j < k && p != 0; ++j)
            if (j != i) p *= r[static_cast<std::size_t>(j)].v;
        b.grad[i] = p;
    }
    return b;
}

}  // namespace

std::vector<Mat> LusinFunction::path_coefficients(const CubeAddress& address) const {
    const int L = address.level();
    if (L > depth_) throw InvalidArgument("cube address deeper than the construction");
    std::vector<Mat> a;
    a.reserve(static_cast<std::size_t>(L));
    if (table_) {
        CubeAddress prefix;
        prefix.root = address.root;
        for (int l = 1; l <= L; ++l) {
            prefix.digits.push_back(address.digits[static_cast<std::size_t>(l - 1)]);
            const auto it = table_->find(scaffold_->serialize(prefix));
            if (it == table_->end()) throw NumericFailure("imported function lacks a coefficient");
            a.push_back(it->second);
        }
        return a;
    }
    const CantorScaffold& sc = *scaffold_;
    // offsets[l-1][axis] is the level-l child offset.
    std::vector<Vec> offsets;
    Vec c(k_);
    for (int ax = 0; ax < k_; ++ax) c[ax] = sc.axis(ax).root_center(address.root[static_cast<std::size_t>(ax)]);
    for (int l = 1; l <= L; ++l) {
        Vec off(k_);
        for (int ax = 0; ax < k_; ++ax)
            off[ax] = sc.axis(ax).child_offset(l, address.digits[static_cast<std::size_t>(l - 1)]
                                                               [static_cast<std::size_t>(ax)]);
        offsets.push_back(off);
        for (int ax = 0; ax < k_; ++ax) c[ax] += off[ax];
        Vec u = Vec::Zero(m_);
        if (!datum_.u_independent) {
            // u_{l-1}(c_l) = sum_{j<l} (a_j - a_{j-1})(c_l - c_j).
            for (int j = 1; j < l; ++j) {
                Vec diff = Vec::Zero(k_);
                for (int q = j + 1; q <= l; ++q) diff += offsets[static_cast<std::size_t>(q - 1)];
                const Mat delta = j == 1 ? a[0] : Mat(a[static_cast<std::size_t>(j - 1)] - a[static_cast<std::size_t>(j - 2)]);
                u += delta * diff;
            }
        }
        a.push_back(datum_.eval(c, u));
    }
    return a;
}

Mat LusinFunction::coefficient(const CubeAddress& address) const {
    if (address.level() < 1) throw InvalidArgument("coefficients start at level 1");
    return path_coefficients(address).back();
}

LusinFunction::Jet LusinFunction::evaluate(const Vec& x, int upto) const {
    Jet out{Vec::Zero(m_), Mat::Zero(m_, k_)};
    upto = std::min(upto, depth_);
    if (upto <= 0 || x.size() != k_) return out;
    const PathTrace t = trace_all(*scaffold_, x, upto);
    if (t.min_depth < 0) return out;
    const int L = std::min(upto, t.min_depth + 1);
    const std::vector<Mat> a = path_coefficients(address_of(t, L));
    auto delta = [&](int j) -> Mat {
        return j == 1 ? a[0] : Mat(a[static_cast<std::size_t>(j - 1)] - a[static_cast<std::size_t>(j - 2)]);
    };
    for (int j = 1; j < L; ++j) out.value += delta(j) * local_at(t, j);
    const Vec local = local_at(t, L);
    const Mat dL = delta(L);
    if (L <= t.min_depth) {
        out.value += dL * local;
        out.grad = a.back();
        return out;
    }
    const Bump b = layer_bump(*scaffold_, local, L);
    const Vec lin = dL * local;
    out.value += b.sigma * lin;
    out.grad = (L >= 2 ? a[static_cast<std::size_t>(L - 2)] : Mat(Mat::Zero(m_, k_))) +
               lin * b.grad.transpose() + b.sigma * dL;
    return out;
}

LusinFunction::Jet LusinFunction::increment(const Vec& x, int level) const {
    Jet out{Vec::Zero(m_), Mat::Zero(m_, k_)};
    if (level < 1 || level > depth_ || x.size() != k_) return out;
    const PathTrace t = trace_all(*scaffold_, x, level);
    if (t.min_depth < level - 1) return out;
    const std::vector<Mat> a = path_coefficients(address_of(t, level));
    const Mat dL = level == 1 ? a[0] : Mat(a[static_cast<std::size_t>(level - 1)] - a[static_cast<std::size_t>(level - 2)]);
    const Vec local = local_at(t, level);
    const Bump b = layer_bump(*scaffold_, local, level);
    const Vec lin = dL * local;
    out.value = b.sigma * lin;
    out.grad = lin * b.grad.transpose() + b.sigma * dL;
    return out;
}

Real LusinFunction::sup_bound() const {
    Real acc = 0;
    for (int j = 1; j <= depth_; ++j) acc += scaffold_->side(j);
    return 4 * M1_ * bmp::sqrt(Real(k_)) * acc;
}

Real LusinFunction::smallness_limit() const {
    if (M2_ == 0) return std::numeric_limits<Real>::infinity();
    const Real k32 = bmp::pow(Real(k_), Real(1.5));
    const Real pi = real_pi();
    return eta_ / (10 * M2_ * k32 * (2 + 12 * M1_ * pi * pi * k32 + 2 * M1_));
}

bool LusinFunction::smallness_ok() const { return scaffold_->schedule().delta() <= smallness_limit(); }

Real LusinFunction::residual_constant() const {
    return 2 * M2_ * bmp::sqrt(Real(k_)) * (M2_ + M1_ + 2);
}

Real LusinFunction::increment_constant() const {
    const double cmax = std::max({1.0, kCutoffC1, kCutoffC2});
    return 16 * Real(k_ * k_) * (M1_ + 1) * M2_ * Real(cmax);
}

LusinFunction build_lusin(const GradientDatum& F, std::shared_ptr<const CantorScaffold> scaffold,
                          int N, Real eta, LusinOptions options) {
    if (!scaffold) throw InvalidArgument("missing scaffold");
    if (!F.eval) throw InvalidArgument("gradient datum has no evaluator");
    if (F.k != scaffold->k()) throw InvalidArgument("datum dimension does not match scaffold");
    if (F.m < 1 || F.m > kMaxDim) throw InvalidArgument("codomain dimension must lie in [1, 6]");
    if (N < 0 || N > scaffold->depth()) throw InvalidArgument("depth exceeds scaffold");
    if (!(eta > 0)) throw InvalidArgument("eta must be positive");
    LusinFunction u;
    u.scaffold_ = std::move(scaffold);
    u.datum_ = F;
    u.k_ = F.k;
    u.m_ = F.m;
    u.depth_ = N;
    u.eta_ = eta;
    u.M1_ = F.M1;
    u.M2_ = F.M2;
    if (options.enforce_smallness && !u.smallness_ok())
        throw InvalidArgument("delta too large for (eta, M1, M2)");
    return u;
}

Vec eval(const LusinFunction& u, const Vec& x) { return u.evaluate(x).value; }
Mat eval_grad(const LusinFunction& u, const Vec& x) { return u.evaluate(x).grad; }

Real residual(const LusinFunction& u, const GradientDatum& F, const Vec& x) {
    const auto jet = u.evaluate(x);
    return (jet.grad - F.eval(x, jet.value)).norm();
}

CubeAddress sample_address(const CantorScaffold& sc, int level, Rng& rng) {
    CubeAddress addr;
    for (int a = 0; a < sc.k(); ++a) {
        std::uniform_int_distribution<std::int64_t> pick(0, sc.axis(a).root_count() - 1);
        addr.root.push_back(pick(rng));
    }
    std::uniform_int_distribution<std::uint32_t> digit(0, sc.children_per_axis() - 1);
    for (int l = 1; l <= level; ++l) {
        std::vector<std::uint32_t> row;
        for (int a = 0; a < sc.k(); ++a) row.push_back(digit(rng));
        addr.digits.push_back(std::move(row));
    }
    return addr;
}

Vec sample_support_point(const CantorScaffold& sc, int level, Rng& rng) {
    const Vec c = sc.center(sample_address(sc, level, rng));
    const Real h = sc.side(level) / 2;
    const Real w = level >= 1 ? sc.rho(level) / 4 : Real(0);
    Vec x = c;
    for (int a = 0; a < sc.k(); ++a) x[a] += Real(2 * uniform01(rng) - 1) * (h + w);
    if (level >= 1 && uniform01(rng) < 0.5) {
        std::uniform_int_distribution<int> axis(0, sc.k() - 1);
        const int a = axis(rng);
        const Real sign = uniform01(rng) < 0.5 ? Real(-1) : Real(1);
        x[a] = c[a] + sign * (h + Real(uniform01(rng)) * w);
    }
    return x;
}

std::vector<IncrementRow> level_increment_norms(const LusinFunction& u, int samples_per_level,
                                                std::uint64_t seed) {
    if (u.depth() < 2) throw InvalidArgument("level increments need depth >= 2");
    if (samples_per_level < 1) throw InvalidArgument("samples must be positive");
    const auto& sc = u.scaffold();
    std::vector<IncrementRow> rows;
    const Real sqrtk = bmp::sqrt(Real(u.k()));
    const Real M1 = u.has_datum() ? u.datum().M1 : Real(0);
    for (int level = 2; level <= u.depth(); ++level) {
        Rng rng = make_stream(seed, static_cast<std::uint64_t>(level), 0x1ac);
        IncrementRow row;
        row.level = level;
        row.samples = samples_per_level;
        for (int n = 0; n < samples_per_level; ++n) {
            const auto jet = u.increment(sample_support_point(sc, level, rng), level);
            row.sup_u = std::max(row.sup_u, Real(jet.value.norm()));
            row.sup_du = std::max(row.sup_du, Real(jet.grad.norm()));
        }
        const Real r_prev = sc.side(level - 1);
        row.bound_u = 4 * M1 * sqrtk * sc.side(level);
        row.bound_du = u.increment_constant() * (r_prev * r_prev / sc.rho(level) + r_prev);
        rows.push_back(row);
    }
    return rows;
}

Json LusinFunction::to_json(std::uint64_t max_cubes) const {
    Real total = 0;
    for (int l = 1; l <= depth_; ++l) total += scaffold_->cube_count(l);
    if (total > Real(max_cubes))
        throw InvalidArgument("coefficient table exceeds the export cap of " + std::to_string(max_cubes) +
                              " cubes");
    Json j;
    j["scaffold_ref"] = scaffold_->to_json();
    j["depth"] = depth_;
    j["k"] = k_;
    j["m"] = m_;
    j["datum"] = datum_.name;
    j["eta"] = to_double(eta_);
    j["M1"] = to_double(M1_);
    j["M2"] = to_double(M2_);
    Json levels = Json::array();
    const CantorScaffold& sc = *scaffold_;
    const std::uint64_t per_level = static_cast<std::uint64_t>(1) << (sc.B() * sc.k());
    for (std::int64_t r = 0; r < sc.card_roots(); ++r) {
        for (int l = 1; l <= depth_; ++l) {
            const auto count = static_cast<std::uint64_t>(bmp::pow(Real(per_level), l));
            for (std::uint64_t idx = 0; idx < count; ++idx) {
                std::vector<std::uint64_t> path{static_cast<std::uint64_t>(r)};
                std::vector<std::uint64_t> digits(static_cast<std::size_t>(l));
                std::uint64_t rem = idx;
                for (int q = l - 1; q >= 0; --q) {
                    digits[static_cast<std::size_t>(q)] = rem % per_level;
                    rem /= per_level;
                }
                path.insert(path.end(), digits.begin(), digits.end());
                const Mat a = coefficient(sc.deserialize(path));
                Json entry;
                entry["cube_path"] = path;
                Json flat = Json::array();
                for (int row = 0; row < a.rows(); ++row)
                    for (int col = 0; col < a.cols(); ++col) flat.push_back(to_double(a(row, col)));
                entry["a"] = flat;
                levels.push_back(entry);
            }
        }
    }
    j["levels"] = levels;
    j["cutoff_constants"] = {{"c1", kCutoffC1}, {"c2", kCutoffC2}};
    return j;
}

LusinFunction LusinFunction::from_json(const Json& doc) {
    try {
        auto sc = std::make_shared<const CantorScaffold>(CantorScaffold::from_json(doc.at("scaffold_ref")));
        LusinFunction u;
        u.scaffold_ = sc;
        u.k_ = doc.at("k").get<int>();
        u.m_ = doc.at("m").get<int>();
        u.depth_ = doc.at("depth").get<int>();
        u.eta_ = doc.at("eta").get<double>();
        u.M1_ = doc.at("M1").get<double>();
        u.M2_ = doc.at("M2").get<double>();
        u.datum_.k = u.k_;
        u.datum_.m = u.m_;
        u.datum_.M1 = u.M1_;
        u.datum_.M2 = u.M2_;
        u.datum_.name = doc.at("datum").get<std::string>();
        if (u.k_ != sc->k() || u.depth_ > sc->depth() || u.depth_ < 0)
            throw InvalidArgument("function does not fit its scaffold");
        auto table = std::make_shared<std::map<std::vector<std::uint64_t>, Mat>>();
        for (const auto& entry : doc.at("levels")) {
            const auto path = entry.at("cube_path").get<std::vector<std::uint64_t>>();
            const auto flat = entry.at("a").get<std::vector<double>>();
            if (static_cast<int>(flat.size()) != u.k_ * u.m_)
                throw InvalidArgument("coefficient has the wrong size");
            Mat a(u.m_, u.k_);
            for (int r = 0; r < u.m_; ++r)
                for (int c = 0; c < u.k_; ++c) a(r, c) = flat[static_cast<std::size_t>(r * u.k_ + c)];
            (*table)[path] = a;
        }
        u.table_ = table;
        return u;
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(std::string("malformed Lusin document: ") + e.what());
    }
}

}  // namespace cantorlab
