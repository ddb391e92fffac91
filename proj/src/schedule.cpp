#include "cantorlab/schedule.hpp"

#include "cantorlab/error.hpp"

#include <cmath>
#include <limits>

namespace cantorlab {

namespace bmp = boost::multiprecision;

std::string to_string(Regime regime) {
    switch (regime) {
        case Regime::sobolev: return "sobolev";
        case Regime::dimension: return "dimension";
        case Regime::extremal: return "extremal";
        case Regime::tabulated: return "tabulated";
    }
    return "unknown";
}

Regime parse_regime(std::string_view name) {
    if (name == "sobolev") return Regime::sobolev;
    if (name == "dimension") return Regime::dimension;
    if (name == "extremal") return Regime::extremal;
    if (name == "tabulated") return Regime::tabulated;
    throw InvalidArgument("unknown regime '" + std::string(name) + "'");
}

RhoSchedule make_schedule(Regime regime, int k, int B, Real delta, double param) {
    if (!(delta > 0)) throw InvalidArgument("delta must be positive");
    if (k < 1 || k > kMaxDim) throw InvalidArgument("k must lie in [1, 6]");
    if (B < 1 || B > 62) throw InvalidArgument("B must lie in [1, 62]");
    if (!std::isfinite(param)) throw InvalidArgument("schedule parameter must be finite");

    RhoSchedule out;
    out.regime_ = regime;
    out.k_ = k;
    out.B_ = B;
    out.delta_ = delta;
    out.param_ = param;
    switch (regime) {
        case Regime::extremal:
            if (param != 0.0) throw InvalidArgument("extremal regime takes no parameter");
            [[fallthrough]];
        case Regime::sobolev:
            if (param < 0.0 || param >= 0.5)
                throw InvalidArgument("sobolev regime requires 0 <= s < 1/2");
            if (B < 10) throw InvalidArgument("sobolev regime requires B >= 10");
            out.sob_base_ = 3 * delta / (real_pi() * real_pi());
            break;
        case Regime::dimension:
            if (!(param > 0.0) || !(param < k))
                throw InvalidArgument("dimension regime requires 0 < d < k");
            out.lambda_ = bmp::pow(Real(2), -Real(B) * (Real(k) - Real(param)) / Real(param));
            break;
        case Regime::tabulated:
            throw InvalidArgument("use RhoSchedule::tabulated for explicit schedules");
    }
    return out;
}

RhoSchedule RhoSchedule::tabulated(int k, int B, Real delta, std::vector<Real> rho) {
    if (!(delta > 0)) throw InvalidArgument("delta must be positive");
    if (k < 1 || k > kMaxDim) throw InvalidArgument("k must lie in [1, 6]");
    if (B < 1 || B > 62) throw InvalidArgument("B must lie in [1, 62]");
    for (const Real& r : rho)
        if (r < 0) throw InvalidArgument("tabulated rho must be non-negative");
    RhoSchedule out;
    out.regime_ = Regime::tabulated;
    out.k_ = k;
    out.B_ = B;
    out.delta_ = delta;
    out.table_ = std::move(rho);
    return out;
}

Real RhoSchedule::rho(int j) const {
    if (j < 0) throw InvalidArgument("rho index must be non-negative");
    switch (regime_) {
        case Regime::sobolev:
        case Regime::extremal: {
            if (j == 0) return 0;
            Real base = sob_base_ / (Real(j) * Real(j)) * pow2(-B_ * j);
            if (param_ == 0.0) return base;
            return bmp::pow(base, 1 / (1 - Real(param_)));
        }
        case Regime::dimension:
            return delta_ * (1 - lambda_) * bmp::pow(lambda_, j) * pow2(-B_ * j);
        case Regime::tabulated:
            return j < static_cast<int>(table_.size()) ? table_[j] : Real(0);
    }
    return 0;
}

Real RhoSchedule::log_rho(int j) const {
    static const Real ln2 = bmp::log(Real(2));
    switch (regime_) {
        case Regime::sobolev:
        case Regime::extremal:
            if (j == 0) return -std::numeric_limits<Real>::infinity();
            return (bmp::log(sob_base_) - 2 * bmp::log(Real(j)) - Real(B_) * j * ln2) /
                   (1 - Real(param_));
        case Regime::dimension:
            return bmp::log(delta_ * (1 - lambda_)) + j * (bmp::log(lambda_) - B_ * ln2);
        case Regime::tabulated:
            return bmp::log(rho(j));
    }
    return 0;
}

Real RhoSchedule::weighted_rho(int j) const {
    static const Real ln2 = bmp::log(Real(2));
    if (regime_ == Regime::tabulated || j == 0) return pow2(B_ * j) * rho(j);
    return bmp::exp(log_rho(j) + Real(B_) * j * ln2);
}

Real RhoSchedule::weighted_sum(int N) const {
    Real acc = 0;
    for (int j = 0; j <= N; ++j) acc += weighted_rho(j);
    return acc;
}

Real RhoSchedule::closed_form_side(int i) const {
    return (delta_ - weighted_sum(i)) * pow2(-B_ * i);
}

double RhoSchedule::sobolev_exponent() const {
    if (regime_ == Regime::sobolev || regime_ == Regime::extremal) return param_;
    throw InvalidArgument("schedule has no Sobolev exponent");
}

std::vector<Real> side_lengths(const RhoSchedule& schedule, int N) {
    if (N < 0) throw InvalidArgument("depth must be non-negative");
    std::vector<Real> r(static_cast<std::size_t>(N) + 1);
    r[0] = schedule.delta() - schedule.rho(0);
    if (!(r[0] > 0)) throw ScheduleExhausted("schedule exhausted at level 0");
    const Real shrink = pow2(-schedule.B());
    for (int i = 1; i <= N; ++i) {
        r[i] = shrink * r[i - 1] - schedule.rho(i);
        if (!(r[i] > 0))
            throw ScheduleExhausted("schedule exhausted at level " + std::to_string(i));
    }
    return r;
}

SeriesResult weighted_series(const RhoSchedule& schedule) {
    SeriesResult out;
    switch (schedule.regime()) {
        case Regime::dimension:
            out.value = schedule.delta();
            out.converged = true;
            return out;
        case Regime::extremal:
            out.value = schedule.delta() / 2;
            out.converged = true;
            return out;
        case Regime::sobolev:
            if (schedule.param() == 0.0) {
                out.value = schedule.delta() / 2;
                out.converged = true;
                return out;
            }
            break;
        case Regime::tabulated:
            out.value = schedule.weighted_sum(static_cast<int>(schedule.table().size()));
            out.terms = static_cast<int>(schedule.table().size());
            out.converged = true;
            return out;
    }
    constexpr int kMaxTerms = 100000;
    for (int j = 0; j < kMaxTerms; ++j) {
        const Real term = schedule.weighted_rho(j);
        out.value += term;
        out.terms = j + 1;
        if (j > 0 && term < kSeriesTolerance * out.value) {
            out.converged = true;
            break;
        }
    }
    return out;
}

double theoretical_dimension(const RhoSchedule& schedule) {
    if (schedule.regime() != Regime::dimension)
        throw InvalidArgument("theoretical_dimension requires the dimension regime");
    const Real B = schedule.B();
    const Real num = B * schedule.k();
    const Real den = B - bmp::log2(schedule.lambda());
    return to_double(num / den);
}

IndicatorBound indicator_seminorm_bound(const RhoSchedule& schedule, double domain_volume,
                                        double s, int N) {
    if (!(s > 0.0) || !(s < 1.0)) throw InvalidArgument("s must lie in (0, 1)");
    if (!(domain_volume > 0.0)) throw InvalidArgument("domain volume must be positive");
    if (N < 0) throw InvalidArgument("N must be non-negative");
    IndicatorBound out;
    static const Real ln2 = bmp::log(Real(2));
    const Real expo = 1 - Real(s);
    Real series = 0;
    Real last = 0;
    for (int j = 0; j <= N; ++j) {
        const bool zero = schedule.regime() == Regime::tabulated
                              ? schedule.rho(j) == 0
                              : (j == 0 && schedule.regime() != Regime::dimension);
        if (zero) {
            last = 0;
            continue;
        }
        last = bmp::exp(expo * schedule.log_rho(j) + Real(schedule.B()) * j * ln2);
        series += last;
    }
    out.series = to_double(series);
    out.terms = N + 1;
    out.value = domain_volume + out.series;
    switch (schedule.regime()) {
        case Regime::dimension: {
            const Real ratio =
                bmp::pow(Real(2), schedule.B() * Real(s)) * bmp::pow(schedule.lambda(), expo);
            out.divergent = ratio >= 1;
            break;
        }
        case Regime::sobolev:
        case Regime::extremal:
            out.divergent = s > schedule.param();
            break;
        case Regime::tabulated:
            break;
    }
    out.converged = !out.divergent && last < kSeriesTolerance;
    return out;
}

}  // namespace cantorlab
