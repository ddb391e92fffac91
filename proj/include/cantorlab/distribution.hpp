#pragma once

#include "cantorlab/lusin.hpp"
#include "cantorlab/real.hpp"
#include "cantorlab/scaffold.hpp"

#include <nlohmann/json.hpp>

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace cantorlab {

// One monomial coeff * prod_i x_i^{exponents[i]} over R^n.
struct Monomial {
    Real coeff = 0;
    std::vector<int> exponents;
};

// Polynomial entries M_{p,a}, 1-based as in the JSON spec.
struct PolynomialField {
    int n = 0;
    int k = 0;
    struct Entry {
        int p = 1;
        int a = 1;
        std::vector<Monomial> monomials;
    };
    std::vector<Entry> entries;

    Mat eval(const Vec& x) const;
    // dM/dx_i for i = 0..n-1.
    std::vector<Mat> jacobian(const Vec& x) const;

    static PolynomialField from_json(const Json& doc);
    Json to_json() const;
};

// k-plane field in graph form over span(e_1..e_k): V(x) is the graph of
// M(x): R^k -> R^{n-k}, stored as an (n-k) x k matrix.
struct DistributionField {
    int n = 0;
    int k = 0;
    std::function<Mat(const Vec&)> M;
    // dM/dx_i for i = 0..n-1; empty means central differences.
    std::function<std::vector<Mat>(const Vec&)> jacobian;
    std::string provenance = "user";
    std::shared_ptr<const PolynomialField> polynomial;

    int codim() const { return n - k; }
    // X_i(z) = e_i + M(z) e_i, 1-based.
    Vec spanning_field(const Vec& z, int i) const;
    std::vector<Mat> derivatives(const Vec& x) const;
};

// M(x) e_1 = -2 x_2 e_3, M(x) e_2 = 2 x_1 e_3.
DistributionField heisenberg();
DistributionField constant_distribution(int n, const Mat& M);
DistributionField polynomial_distribution(PolynomialField field);
// Builtin name ("heisenberg") or a polynomial JSON spec.
DistributionField distribution_from_json(const Json& doc);
DistributionField builtin_distribution(const std::string& name);

// Central differences with step 1e-5 (1 + |x|).
std::vector<Mat> fd_derivatives(const std::function<Mat(const Vec&)>& M, int n, const Vec& x);

struct VectorFieldPair {
    int n = 0;
    std::function<Vec(const Vec&)> X;
    std::function<Vec(const Vec&)> Y;
    // n x n Jacobians; empty means central differences.
    std::function<Mat(const Vec&)> JX;
    std::function<Mat(const Vec&)> JY;
    // Differences must stay inside this box when set.
    std::optional<BoxDomain> domain;
};

Mat fd_jacobian(const std::function<Vec(const Vec&)>& X, int n, const Vec& x,
                const std::optional<BoxDomain>& domain = std::nullopt);

// [X, Y](x) = DX(x) Y(x) - DY(x) X(x).
Vec lie_bracket(const VectorFieldPair& pair, const Vec& x);
// The pair (X_a, X_b) of spanning fields, 1-based, with analytic Jacobians
// whenever V has them.
VectorFieldPair spanning_pair(const DistributionField& V, int a, int b);

// Max relative difference between analytic and central-difference
// Jacobians of X and Y at x; absent without analytic Jacobians.
std::optional<Real> jacobian_agreement(const VectorFieldPair& pair, const Vec& x);
std::optional<Real> jacobian_agreement(const DistributionField& V, const Vec& x);

// d_a M_{p,b}(x) - d_b M_{p,a}(x), indices 1-based.
Real involutivity_defect(const DistributionField& V, const Vec& x, int a, int b, int p);

struct Certificate {
    int a = 0;
    int b = 0;
    int p = 0;
    Real value = 0;
};

std::optional<Certificate> noninvolutivity_certificate(const DistributionField& V, const Vec& x,
                                                       Real tol = Real(1e-8));

// Max of ||M(x) - M(y)||_F over sampled pairs with |x - y| <= h in the box.
Real modulus_of_continuity(const DistributionField& V, const BoxDomain& box, Real h, int samples,
                           std::uint64_t seed);

struct TangencyResult {
    bool pass = false;
    Vec graph_point;  // (x, u(x))
    Real deviation = 0;
};

// ||Du(x) - M((x, u(x)))||_F <= tol.
TangencyResult tangency_check(const LusinFunction& u, const DistributionField& V, const Vec& x, Real tol);

struct TangencyReport {
    std::uint64_t centers = 0;
    std::uint64_t passed = 0;
    Real tolerance = 0;
    Real max_deviation = 0;
    bool exhaustive = false;
    double rate() const { return centers ? static_cast<double>(passed) / static_cast<double>(centers) : 0.0; }
};

// Level-N centers: all of them when there are at most `exhaustive_limit`,
// otherwise `samples` uniformly drawn ones. tol defaults to 2 C r_N.
TangencyReport tangency_rate(const LusinFunction& u, const DistributionField& V, std::optional<Real> tol,
                             std::uint64_t samples = 10000, std::uint64_t seed = 1,
                             std::uint64_t exhaustive_limit = 100000);

// F(x, u) = M((x, u)) with bounds M1, M2 on base x [-1, 1]^m: the builtin
// constants for heisenberg, monomial majorants for polynomial fields.
GradientDatum graph_datum(const DistributionField& V, const BoxDomain& base);

}  // namespace cantorlab
