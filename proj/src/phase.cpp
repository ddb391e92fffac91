#include "cantorlab/phase.hpp"

#include "cantorlab/error.hpp"

#include <cmath>
#include <limits>

namespace cantorlab {

std::string to_string(Phase p) {
    switch (p) {
        case Phase::frobenius: return "frobenius";
        case Phase::counterexample: return "counterexample";
        case Phase::boundary_open: return "boundary-open";
    }
    return "boundary-open";
}

double phase_threshold(double s, double q) {
    const double inv_q = std::isinf(q) ? 0.0 : 1.0 / q;
    return 1.0 - (2.0 - inv_q) * s;
}

PhasePoint classify(double s, double alpha, double q) {
    if (!(s >= 0.0 && s < 1.0)) throw InvalidArgument("s must lie in [0, 1)");
    if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("alpha must lie in (0, 1)");
    if (std::isnan(q) || q < 1.0) throw InvalidArgument("q must lie in [1, inf]");
    PhasePoint p{s, alpha, q, phase_threshold(s, q), Phase::boundary_open};
    const bool tie = std::abs(alpha - p.tau) <= kPhaseTieTolerance;
    if (s > 0.5)
        p.phase = Phase::frobenius;
    else if (s == 0.0)
        p.phase = Phase::counterexample;
    else if (tie)
        p.phase = Phase::boundary_open;
    else if (alpha > p.tau)
        p.phase = Phase::frobenius;
    else if (s < 0.5)
        p.phase = Phase::counterexample;
    return p;
}

PhaseGrid figure_grid(double q, int resolution) {
    if (resolution < 16) throw InvalidArgument("resolution must be at least 16");
    PhaseGrid g;
    g.q = q;
    g.resolution = resolution;
    bool found = false;
    for (int i = 0; i < resolution; ++i) {
        const double s = (i + 0.5) / resolution;
        if (!found && phase_threshold(s, q) <= 0.0) {
            g.zero_crossing = static_cast<double>(i) / resolution;
            found = true;
        }
        for (int j = 0; j < resolution; ++j) g.cells.push_back(classify(s, (j + 0.5) / resolution, q));
    }
    return g;
}

double parse_q(const std::string& text) {
    if (text == "inf") return std::numeric_limits<double>::infinity();
    std::size_t used = 0;
    double q = 0.0;
    try {
        q = std::stod(text, &used);
    } catch (const std::exception&) {
        throw InvalidArgument("q must be a number or \"inf\"");
    }
    if (used != text.size() || !std::isfinite(q) || q < 1.0) throw InvalidArgument("q must be \"inf\" or a real >= 1");
    return q;
}

std::string format_q(double q) {
    if (std::isinf(q)) return "inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", q);
    return buf;
}

}  // namespace cantorlab
