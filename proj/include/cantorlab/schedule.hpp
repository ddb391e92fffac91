#pragma once

#include "cantorlab/real.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace cantorlab {

// `tabulated` holds an explicit finite prefix rho_0..rho_L (zero beyond); it
// covers gap-free and hand-built schedules that the closed forms cannot express.
enum class Regime { sobolev, dimension, extremal, tabulated };

std::string to_string(Regime regime);
Regime parse_regime(std::string_view name);

class RhoSchedule {
public:
    static RhoSchedule tabulated(int k, int B, Real delta, std::vector<Real> rho);

    Regime regime() const { return regime_; }
    int k() const { return k_; }
    int B() const { return B_; }
    const Real& delta() const { return delta_; }
    // s for sobolev, d for dimension, 0 otherwise.
    double param() const { return param_; }
    // Only meaningful in the dimension regime.
    const Real& lambda() const { return lambda_; }
    const std::vector<Real>& table() const { return table_; }

    // rho_j for j >= 0; rho_0 = 0 in the sobolev and extremal regimes.
    Real rho(int j) const;
    // log rho_j; finite far below the float128 underflow threshold of rho_j.
    Real log_rho(int j) const;
    // 2^{Bj} rho_j.
    Real weighted_rho(int j) const;
    // sum_{j=0}^{N} 2^{Bj} rho_j.
    Real weighted_sum(int N) const;
    // Closed form r_i = (delta - sum_{j<=i} 2^{Bj} rho_j) / 2^{Bi}.
    Real closed_form_side(int i) const;

    // The Cantor-set exponent s (sobolev/extremal) used by the seminorm bound.
    double sobolev_exponent() const;

private:
    RhoSchedule() = default;
    friend RhoSchedule make_schedule(Regime, int, int, Real, double);

    Regime regime_ = Regime::sobolev;
    int k_ = 1;
    int B_ = 1;
    Real delta_ = 1;
    double param_ = 0.0;
    Real lambda_ = 0;
    Real sob_base_ = 0;  // 3 delta / pi^2
    std::vector<Real> table_;
};

RhoSchedule make_schedule(Regime regime, int k, int B, Real delta, double param);

// r_0..r_N by the recursion r_i = 2^{-B} r_{i-1} - rho_i; throws
// ScheduleExhausted when some r_i <= 0.
std::vector<Real> side_lengths(const RhoSchedule& schedule, int N);

struct SeriesResult {
    Real value = 0;
    int terms = 0;
    bool converged = false;
    bool divergent = false;
};

inline constexpr double kSeriesTolerance = 1e-12;

// sum_{j>=0} 2^{Bj} rho_j, summed until increments drop below kSeriesTolerance
// (closed form where one exists).
SeriesResult weighted_series(const RhoSchedule& schedule);

double theoretical_dimension(const RhoSchedule& schedule);

struct IndicatorBound {
    double value = 0.0;   // domain_volume + series
    double series = 0.0;  // sum_{j<=N} 2^{Bj} rho_j^{1-s}
    int terms = 0;
    bool converged = false;
    bool divergent = false;
    double tolerance = kSeriesTolerance;
};

IndicatorBound indicator_seminorm_bound(const RhoSchedule& schedule, double domain_volume,
                                        double s, int N);

}  // namespace cantorlab
