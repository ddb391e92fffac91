#pragma once

#include "cantorlab/real.hpp"
#include "cantorlab/scaffold.hpp"

#include <array>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace cantorlab {

struct GaussRule {
    std::vector<Real> nodes;  // on [-1, 1]
    std::vector<Real> weights;
};

// Gauss-Legendre rule of the given order (Newton on P_n in quad precision).
const GaussRule& gauss_legendre(int order);

struct Segment {
    Vec2 start;
    Vec2 end;
};

// Rectangle centred at `center` with sides 2 half1 along v and 2 half2
// along v_perp = (-v2, v1).
class RectangleProbe {
public:
    RectangleProbe(Vec2 center, Vec2 v, Real half1, Real half2, int order = 8, int panels = 1);

    const Vec2& center() const { return center_; }
    const Vec2& direction() const { return v_; }
    Vec2 normal_direction() const { return Vec2(-v_[1], v_[0]); }
    const Real& half1() const { return half1_; }
    const Real& half2() const { return half2_; }
    int order() const { return order_; }
    int panels() const { return panels_; }
    Real area() const { return 4 * half1_ * half2_; }
    // Counter-clockwise sides L1..L4 starting from center - h1 v - h2 v_perp.
    std::array<Segment, 4> sides() const;

private:
    Vec2 center_;
    Vec2 v_;
    Real half1_;
    Real half2_;
    int order_;
    int panels_;
};

struct OneForm {
    std::function<Vec2(const Vec2&)> g;
    // d_1 g_2 - d_2 g_1; empty when unavailable.
    std::function<Real(const Vec2&)> curl;
    std::string smoothness = "smooth";
};

enum class Orientation { positive, negative };

Real circulation(const OneForm& g, const RectangleProbe& P, Orientation orientation = Orientation::positive);
Real line_integral(const OneForm& g, const Segment& s, int order, int panels = 1);
Real curl_flux(const OneForm& g, const RectangleProbe& P);
Real stokes_residual(const OneForm& g, const RectangleProbe& P);

// Set whose boundary-escape measure is probed: a level of a product
// scaffold (exact interval arithmetic) or a generic membership oracle.
struct EscapeSet {
    std::function<bool(const Vec2&)> inside;
    std::shared_ptr<const CantorScaffold> scaffold;
    int level = 0;

    static EscapeSet oracle(std::function<bool(const Vec2&)> inside);
    static EscapeSet cantor(std::shared_ptr<const CantorScaffold> scaffold, int level);
    bool exact() const { return static_cast<bool>(scaffold); }
    bool contains(const Vec2& x) const;
};

struct EscapeOptions {
    int offsets = 32;
    int samples_per_side = 10000;
    // Sample even when the set supports exact mode.
    bool force_sampling = false;
};

// H^1(side \ E) for one segment.
Real escape_length(const EscapeSet& E, const Segment& s, const EscapeOptions& options, bool* exact_used = nullptr);

struct EscapeRow {
    double radius = 0.0;
    Real measure = 0;
    Vec2 offset = Vec2::Zero();
    int offsets_tried = 0;
    std::optional<double> exponent_so_far;
};

struct EscapeScan {
    std::vector<EscapeRow> rows;
    std::optional<double> exponent;  // slope of log measure against log r
    std::string mode;                // "exact" or "sampled"
};

// Offset j shifts the centre by r ((j % 4 - 2)/8, (j / 4 % 8 - 4)/16) in
// (v, v_perp) coordinates; j = 18 is the unshifted square.
Vec2 escape_offset(int j, const Real& r, const Vec2& v);

// Squares of side 2r around x, keeping the offset with the least escape.
EscapeScan boundary_escape_scan(const EscapeSet& E, const Vec2& x, const Vec2& v, const std::vector<Real>& radii,
                                const EscapeOptions& options = {});

struct WitnessRow {
    double radius = 0.0;
    Vec2 offset = Vec2::Zero();
    Real circulation_h = 0;
    Real flux_m = 0;
    Real ratio = 0;  // circulation_h / area
    Real escape_measure = 0;
};

struct WitnessRecord {
    std::vector<WitnessRow> rows;
    std::optional<double> escape_exponent;
    std::string mode;
};

// h = m - du: circulation(h) = circulation(m) - sum over sides of u(end) - u(start).
WitnessRecord locality_witness(const OneForm& m, const std::function<Real(const Vec2&)>& potential,
                               const EscapeSet& E, const Vec2& x, const Vec2& v, const std::vector<Real>& radii,
                               int order = 8, const EscapeOptions& options = {});
// Same record with an explicit defect form h integrated by quadrature.
WitnessRecord locality_witness(const OneForm& m, const OneForm& h, const EscapeSet& E, const Vec2& x,
                               const Vec2& v, const std::vector<Real>& radii, int order = 8,
                               const EscapeOptions& options = {});

}  // namespace cantorlab
