#pragma once

#include <string>
#include <vector>

namespace cantorlab {

enum class Phase { frobenius, counterexample, boundary_open };

std::string to_string(Phase p);

// q may be +infinity; 1/q is then 0.
double phase_threshold(double s, double q);

struct PhasePoint {
    double s = 0.0;
    double alpha = 0.0;
    double q = 0.0;
    double tau = 0.0;
    Phase phase = Phase::boundary_open;
};

// Ties |alpha - tau| <= kPhaseTieTolerance count as alpha = tau.
inline constexpr double kPhaseTieTolerance = 1e-12;

PhasePoint classify(double s, double alpha, double q);

struct PhaseGrid {
    double q = 0.0;
    int resolution = 0;
    std::vector<PhasePoint> cells;  // s-major, cell centres
    // Left edge of the first s-cell with tau <= 0, or 1 when tau stays positive.
    double zero_crossing = 1.0;
};

PhaseGrid figure_grid(double q, int resolution);

// "inf" or a real >= 1.
double parse_q(const std::string& text);
std::string format_q(double q);

}  // namespace cantorlab
