#include "cantorlab/distribution.hpp"

#include "cantorlab/error.hpp"
#include "cantorlab/rng.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace cantorlab {

namespace bmp = boost::multiprecision;

namespace {

Real fd_step(const Vec& x) { return Real(1e-5) * (1 + x.norm()); }

Real monomial_value(const Monomial& m, const Vec& x) {
    Real v = m.coeff;
    for (std::size_t i = 0; i < m.exponents.size(); ++i)
        for (int e = 0; e < m.exponents[i]; ++e) v *= x[static_cast<Eigen::Index>(i)];
    return v;
}

// d/dx_i of the monomial.
Real monomial_partial(const Monomial& m, const Vec& x, std::size_t i) {
    const int ei = m.exponents[i];
    if (ei == 0) return 0;
    Real v = m.coeff * ei;
    for (std::size_t j = 0; j < m.exponents.size(); ++j) {
        const int e = j == i ? ei - 1 : m.exponents[j];
        for (int r = 0; r < e; ++r) v *= x[static_cast<Eigen::Index>(j)];
    }
    return v;
}

void check_keys(const Json& doc, std::initializer_list<const char*> allowed, const std::string& where) {
    if (!doc.is_object()) throw InvalidArgument(where + " must be a JSON object");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& item : doc.items())
        if (!ok.count(item.key())) throw InvalidArgument("unknown key '" + item.key() + "' in " + where);
}

int get_int(const Json& doc, const char* key, const std::string& where) {
    if (!doc.contains(key) || !doc.at(key).is_number_integer())
        throw InvalidArgument(where + " needs integer '" + key + "'");
    return doc.at(key).get<int>();
}

}  // namespace

Mat PolynomialField::eval(const Vec& x) const {
    Mat M = Mat::Zero(n - k, k);
    for (const auto& e : entries)
        for (const auto& m : e.monomials) M(e.p - 1, e.a - 1) += monomial_value(m, x);
    return M;
}

std::vector<Mat> PolynomialField::jacobian(const Vec& x) const {
    std::vector<Mat> out(static_cast<std::size_t>(n), Mat::Zero(n - k, k));
    for (const auto& e : entries)
        for (const auto& m : e.monomials)
            for (std::size_t i = 0; i < static_cast<std::size_t>(n); ++i)
                out[i](e.p - 1, e.a - 1) += monomial_partial(m, x, i);
    return out;
}

PolynomialField PolynomialField::from_json(const Json& doc) {
    check_keys(doc, {"n", "k", "entries"}, "polynomial field");
    PolynomialField f;
    f.n = get_int(doc, "n", "polynomial field");
    f.k = get_int(doc, "k", "polynomial field");
    if (f.n < 2 || f.n > kMaxDim || f.k < 1 || f.k >= f.n)
        throw InvalidArgument("polynomial field needs 1 <= k < n <= 6");
    if (!doc.contains("entries") || !doc.at("entries").is_array())
        throw InvalidArgument("polynomial field needs an 'entries' array");
    for (const auto& je : doc.at("entries")) {
        check_keys(je, {"p", "a", "monomials"}, "entry");
        Entry e;
        e.p = get_int(je, "p", "entry");
        e.a = get_int(je, "a", "entry");
        if (e.p < 1 || e.p > f.n - f.k || e.a < 1 || e.a > f.k) throw InvalidArgument("entry index out of range");
        if (!je.contains("monomials") || !je.at("monomials").is_array())
            throw InvalidArgument("entry needs a 'monomials' array");
        for (const auto& jm : je.at("monomials")) {
            check_keys(jm, {"coeff", "exponents"}, "monomial");
            if (!jm.contains("coeff") || !jm.at("coeff").is_number())
                throw InvalidArgument("monomial needs numeric 'coeff'");
            if (!jm.contains("exponents") || !jm.at("exponents").is_array() ||
                static_cast<int>(jm.at("exponents").size()) != f.n)
                throw InvalidArgument("monomial needs n exponents");
            Monomial m;
            m.coeff = Real(jm.at("coeff").get<double>());
            for (const auto& x : jm.at("exponents")) {
                if (!x.is_number_integer() || x.get<int>() < 0)
                    throw InvalidArgument("exponents must be non-negative integers");
                m.exponents.push_back(x.get<int>());
            }
            e.monomials.push_back(std::move(m));
        }
        f.entries.push_back(std::move(e));
    }
    return f;
}

Json PolynomialField::to_json() const {
    Json doc;
    doc["n"] = n;
    doc["k"] = k;
    Json es = Json::array();
    for (const auto& e : entries) {
        Json je;
        je["p"] = e.p;
        je["a"] = e.a;
        Json ms = Json::array();
        for (const auto& m : e.monomials) {
            Json jm;
            jm["coeff"] = to_double(m.coeff);
            jm["exponents"] = m.exponents;
            ms.push_back(jm);
        }
        je["monomials"] = ms;
        es.push_back(je);
    }
    doc["entries"] = es;
    return doc;
}

Vec DistributionField::spanning_field(const Vec& z, int i) const {
    if (i < 1 || i > k) throw InvalidArgument("spanning field index out of range");
    Vec X = Vec::Zero(n);
    X[i - 1] = 1;
    const Mat m = M(z);
    for (int p = 0; p < codim(); ++p) X[k + p] = m(p, i - 1);
    return X;
}

std::vector<Mat> DistributionField::derivatives(const Vec& x) const {
    return jacobian ? jacobian(x) : fd_derivatives(M, n, x);
}

DistributionField polynomial_distribution(PolynomialField field) {
    auto poly = std::make_shared<const PolynomialField>(std::move(field));
    DistributionField V;
    V.n = poly->n;
    V.k = poly->k;
    V.M = [poly](const Vec& x) { return poly->eval(x); };
    V.jacobian = [poly](const Vec& x) { return poly->jacobian(x); };
    V.polynomial = poly;
    return V;
}

DistributionField heisenberg() {
    PolynomialField f;
    f.n = 3;
    f.k = 2;
    f.entries.push_back({1, 1, {Monomial{Real(-2), {0, 1, 0}}}});
    f.entries.push_back({1, 2, {Monomial{Real(2), {1, 0, 0}}}});
    DistributionField V = polynomial_distribution(std::move(f));
    V.provenance = "heisenberg";
    return V;
}

DistributionField constant_distribution(int n, const Mat& M) {
    const int k = static_cast<int>(M.cols());
    if (k < 1 || n - k != M.rows()) throw InvalidArgument("constant distribution needs an (n-k) x k matrix");
    PolynomialField f;
    f.n = n;
    f.k = k;
    for (int p = 0; p < n - k; ++p)
        for (int a = 0; a < k; ++a)
            if (M(p, a) != 0) f.entries.push_back({p + 1, a + 1, {Monomial{M(p, a), std::vector<int>(n, 0)}}});
    DistributionField V = polynomial_distribution(std::move(f));
    V.provenance = "constant";
    return V;
}

DistributionField builtin_distribution(const std::string& name) {
    if (name == "heisenberg") return heisenberg();
    throw InvalidArgument("unknown builtin distribution '" + name + "'");
}

DistributionField distribution_from_json(const Json& doc) {
    if (doc.is_string()) return builtin_distribution(doc.get<std::string>());
    return polynomial_distribution(PolynomialField::from_json(doc));
}

std::vector<Mat> fd_derivatives(const std::function<Mat(const Vec&)>& M, int n, const Vec& x) {
    const Real h = fd_step(x);
    std::vector<Mat> out;
    for (int i = 0; i < n; ++i) {
        Vec xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        if (xp[i] == x[i]) throw NumericFailure("finite-difference step underflows");
        out.push_back((M(xp) - M(xm)) / (xp[i] - xm[i]));
    }
    return out;
}

Mat fd_jacobian(const std::function<Vec(const Vec&)>& X, int n, const Vec& x, const std::optional<BoxDomain>& domain) {
    const Real h = fd_step(x);
    Mat J(n, n);
    for (int i = 0; i < n; ++i) {
        Vec xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        if (xp[i] == x[i]) throw NumericFailure("finite-difference step underflows");
        if (domain && (!domain->contains(xp) || !domain->contains(xm)))
            throw NumericFailure("finite-difference stencil leaves the domain");
        J.col(i) = (X(xp) - X(xm)) / (xp[i] - xm[i]);
    }
    return J;
}

Vec lie_bracket(const VectorFieldPair& pair, const Vec& x) {
    if (!pair.X || !pair.Y) throw InvalidArgument("vector field pair is incomplete");
    const Mat DX = pair.JX ? pair.JX(x) : fd_jacobian(pair.X, pair.n, x, pair.domain);
    const Mat DY = pair.JY ? pair.JY(x) : fd_jacobian(pair.Y, pair.n, x, pair.domain);
    return DX * pair.Y(x) - DY * pair.X(x);
}

VectorFieldPair spanning_pair(const DistributionField& V, int a, int b) {
    if (a < 1 || a > V.k || b < 1 || b > V.k) throw InvalidArgument("spanning field index out of range");
    VectorFieldPair pair;
    pair.n = V.n;
    pair.X = [V, a](const Vec& z) { return V.spanning_field(z, a); };
    pair.Y = [V, b](const Vec& z) { return V.spanning_field(z, b); };
    if (V.jacobian) {
        auto jac = [V](const Vec& z, int i) {
            const auto d = V.jacobian(z);
            Mat J = Mat::Zero(V.n, V.n);
            for (int j = 0; j < V.n; ++j)
                for (int p = 0; p < V.codim(); ++p) J(V.k + p, j) = d[static_cast<std::size_t>(j)](p, i - 1);
            return J;
        };
        pair.JX = [jac, a](const Vec& z) { return jac(z, a); };
        pair.JY = [jac, b](const Vec& z) { return jac(z, b); };
    }
    return pair;
}

std::optional<Real> jacobian_agreement(const VectorFieldPair& pair, const Vec& x) {
    if (!pair.JX || !pair.JY) return std::nullopt;
    Real worst = 0;
    const std::pair<const std::function<Vec(const Vec&)>*, const std::function<Mat(const Vec&)>*> fields[] = {
        {&pair.X, &pair.JX}, {&pair.Y, &pair.JY}};
    for (const auto& [F, J] : fields) {
        const Mat a = (*J)(x);
        const Mat f = fd_jacobian(*F, pair.n, x, pair.domain);
        worst = std::max(worst, Real((a - f).norm() / std::max(Real(1), Real(a.norm()))));
    }
    return worst;
}

std::optional<Real> jacobian_agreement(const DistributionField& V, const Vec& x) {
    if (!V.jacobian) return std::nullopt;
    const auto a = V.jacobian(x);
    const auto f = fd_derivatives(V.M, V.n, x);
    Real num = 0, den = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += (a[i] - f[i]).squaredNorm();
        den += a[i].squaredNorm();
    }
    return bmp::sqrt(num) / std::max(Real(1), Real(bmp::sqrt(den)));
}

Real involutivity_defect(const DistributionField& V, const Vec& x, int a, int b, int p) {
    if (a < 1 || a > V.k || b < 1 || b > V.k) throw InvalidArgument("plane indices must lie in [1, k]");
    if (p < 1 || p > V.codim()) throw InvalidArgument("normal index must lie in [1, n-k]");
    if (x.size() != V.n) throw InvalidArgument("point dimension differs from n");
    const auto d = V.derivatives(x);
    return d[static_cast<std::size_t>(a - 1)](p - 1, b - 1) - d[static_cast<std::size_t>(b - 1)](p - 1, a - 1);
}

std::optional<Certificate> noninvolutivity_certificate(const DistributionField& V, const Vec& x, Real tol) {
    if (x.size() != V.n) throw InvalidArgument("point dimension differs from n");
    const auto d = V.derivatives(x);
    std::optional<Certificate> best;
    for (int a = 1; a <= V.k; ++a)
        for (int b = a + 1; b <= V.k; ++b)
            for (int p = 1; p <= V.codim(); ++p) {
                const Real v =
                    d[static_cast<std::size_t>(a - 1)](p - 1, b - 1) - d[static_cast<std::size_t>(b - 1)](p - 1, a - 1);
                if (bmp::abs(v) > tol && (!best || bmp::abs(v) > bmp::abs(best->value))) best = Certificate{a, b, p, v};
            }
    return best;
}

Real modulus_of_continuity(const DistributionField& V, const BoxDomain& box, Real h, int samples, std::uint64_t seed) {
    if (box.dim() != V.n) throw InvalidArgument("box dimension differs from n");
    if (!(h > 0) || samples < 1) throw InvalidArgument("need h > 0 and a positive sample count");
    Rng rng = make_stream(seed, 0xc0, 0);
    Real worst = 0;
    for (int i = 0; i < samples; ++i) {
        Vec x(V.n), y(V.n);
        for (int d = 0; d < V.n; ++d) {
            const auto& [lo, hi] = box.intervals[static_cast<std::size_t>(d)];
            x[d] = lo + (hi - lo) * Real(uniform01(rng));
            y[d] = x[d] + h * Real(2 * uniform01(rng) - 1) / bmp::sqrt(Real(V.n));
        }
        worst = std::max(worst, Real((V.M(x) - V.M(y)).norm()));
    }
    return worst;
}

TangencyResult tangency_check(const LusinFunction& u, const DistributionField& V, const Vec& x, Real tol) {
    if (u.k() != V.k || u.m() != V.codim()) throw InvalidArgument("graph and distribution dimensions differ");
    const auto jet = u.evaluate(x);
    TangencyResult r;
    r.graph_point = Vec(V.n);
    r.graph_point << x, jet.value;
    r.deviation = (jet.grad - V.M(r.graph_point)).norm();
    r.pass = r.deviation <= tol;
    return r;
}

TangencyReport tangency_rate(const LusinFunction& u, const DistributionField& V, std::optional<Real> tol,
                             std::uint64_t samples, std::uint64_t seed, std::uint64_t exhaustive_limit) {
    const CantorScaffold& sc = u.scaffold();
    const int N = u.depth();
    TangencyReport rep;
    rep.tolerance = tol ? *tol : 2 * u.residual_constant() * sc.side(N);
    auto visit = [&](const CubeAddress& addr) {
        const auto r = tangency_check(u, V, sc.center(addr), rep.tolerance);
        ++rep.centers;
        if (r.pass) ++rep.passed;
        rep.max_deviation = std::max(rep.max_deviation, r.deviation);
    };
    const Real total = sc.cube_count(N);
    if (total <= Real(exhaustive_limit)) {
        rep.exhaustive = true;
        const std::uint64_t per = std::uint64_t(1) << (sc.B() * sc.k());
        const auto count = static_cast<std::uint64_t>(total);
        for (std::uint64_t idx = 0; idx < count; ++idx) {
            std::vector<std::uint64_t> path(static_cast<std::size_t>(N) + 1);
            std::uint64_t rem = idx;
            for (int l = N; l >= 1; --l) {
                path[static_cast<std::size_t>(l)] = rem % per;
                rem /= per;
            }
            path[0] = rem;
            visit(sc.deserialize(path));
        }
    } else {
        if (samples == 0) throw InvalidArgument("sample count must be positive");
        Rng rng = make_stream(seed, 0x7a, 0);
        for (std::uint64_t i = 0; i < samples; ++i) visit(sample_address(sc, N, rng));
    }
    return rep;
}

GradientDatum graph_datum(const DistributionField& V, const BoxDomain& base) {
    if (base.dim() != V.k) throw InvalidArgument("base box dimension differs from k");
    if (V.provenance == "heisenberg") return heisenberg_datum(base);
    if (!V.polynomial) throw InvalidArgument("bounds M1, M2 are only available for polynomial fields");
    const PolynomialField& poly = *V.polynomial;
    std::vector<Real> reach(static_cast<std::size_t>(V.n), Real(1));
    for (int i = 0; i < V.k; ++i) {
        const auto& [lo, hi] = base.intervals[static_cast<std::size_t>(i)];
        reach[static_cast<std::size_t>(i)] = std::max(bmp::abs(lo), bmp::abs(hi));
    }
    auto majorant = [&](const Monomial& m, int skip) {
        Real v = bmp::abs(m.coeff);
        for (std::size_t j = 0; j < m.exponents.size(); ++j) {
            int e = m.exponents[j];
            if (static_cast<int>(j) == skip) {
                if (e == 0) return Real(0);
                v *= e;
                --e;
            }
            for (int r = 0; r < e; ++r) v *= reach[j];
        }
        return v;
    };
    Mat bound = Mat::Zero(V.codim(), V.k);
    std::vector<Mat> dbound(static_cast<std::size_t>(V.n), Mat::Zero(V.codim(), V.k));
    bool u_free = true;
    for (const auto& e : poly.entries)
        for (const auto& m : e.monomials) {
            bound(e.p - 1, e.a - 1) += majorant(m, -1);
            for (int i = 0; i < V.n; ++i) dbound[static_cast<std::size_t>(i)](e.p - 1, e.a - 1) += majorant(m, i);
            for (int i = V.k; i < V.n; ++i)
                if (m.exponents[static_cast<std::size_t>(i)] > 0) u_free = false;
        }
    GradientDatum F;
    F.k = V.k;
    F.m = V.codim();
    F.name = V.provenance;
    F.M1 = bound.norm();
    Real m2 = 0;
    for (const auto& d : dbound) m2 += d.squaredNorm();
    F.M2 = bmp::sqrt(m2);
    F.u_independent = u_free;
    const auto Mfun = V.M;
    const int n = V.n, k = V.k;
    F.eval = [Mfun, n, k](const Vec& x, const Vec& u) {
        Vec z(n);
        z.head(k) = x;
        z.tail(n - k) = u;
        return Mfun(z);
    };
    return F;
}

}  // namespace cantorlab
