#include "cantorlab/scaffold.hpp"

#include "cantorlab/error.hpp"

#include <algorithm>

namespace cantorlab {

namespace bmp = boost::multiprecision;

namespace {

std::int64_t floor_to_int(const Real& x) { return static_cast<std::int64_t>(bmp::floor(x)); }
std::int64_t ceil_to_int(const Real& x) { return static_cast<std::int64_t>(bmp::ceil(x)); }

// Closed-cube lattice (delta Z) restricted to centers whose delta-cube sits
// strictly inside the open interval (lo, hi).
std::pair<std::int64_t, std::int64_t> axis_roots(const Real& lo, const Real& hi,
                                                 const Real& delta) {
    const Real half = delta / 2;
    std::int64_t first = floor_to_int(lo / delta + Real(0.5));
    while (Real(first) * delta - half <= lo) ++first;
    while (Real(first - 1) * delta - half > lo) --first;
    std::int64_t last = ceil_to_int(hi / delta - Real(0.5));
    while (Real(last) * delta + half >= hi) --last;
    while (Real(last + 1) * delta + half < hi) ++last;
    return {first, last - first + 1};
}

}  // namespace

BoxDomain::BoxDomain(std::vector<std::pair<Real, Real>> iv) : intervals(std::move(iv)) {
    if (intervals.empty()) throw InvalidArgument("domain needs at least one axis");
    if (static_cast<int>(intervals.size()) > kMaxDim)
        throw InvalidArgument("domain dimension exceeds 6");
    for (const auto& [lo, hi] : intervals)
        if (!(hi > lo)) throw InvalidArgument("domain intervals need positive length");
}

BoxDomain BoxDomain::cube(int k, Real lo, Real hi) {
    return BoxDomain(std::vector<std::pair<Real, Real>>(static_cast<std::size_t>(k), {lo, hi}));
}

Real BoxDomain::volume() const {
    Real v = 1;
    for (const auto& [lo, hi] : intervals) v *= hi - lo;
    return v;
}

Real BoxDomain::diameter() const {
    Real acc = 0;
    for (const auto& [lo, hi] : intervals) acc += (hi - lo) * (hi - lo);
    return bmp::sqrt(acc);
}

bool BoxDomain::contains(const Vec& x) const {
    for (int i = 0; i < dim(); ++i)
        if (!(x[i] > intervals[i].first && x[i] < intervals[i].second)) return false;
    return true;
}

AxisCantor::AxisCantor(Real delta, int B, std::vector<Real> sides, std::vector<Real> rho,
                       std::int64_t first_root, std::int64_t root_count)
    : delta_(delta),
      B_(B),
      per_axis_(std::uint32_t(1) << B),
      sides_(std::move(sides)),
      rho_(std::move(rho)),
      first_root_(first_root),
      root_count_(root_count) {}

Real AxisCantor::child_offset(int level, std::uint32_t digit) const {
    const Real twice = Real(2 * static_cast<std::int64_t>(digit)) - Real(per_axis_ - 1);
    return twice * pow2(-B_ - 1) * sides_[static_cast<std::size_t>(level - 1)];
}

AxisCantor::Trace AxisCantor::trace(const Real& x, int max_level) const {
    Trace t;
    std::int64_t m = floor_to_int(x / delta_ + Real(0.5));
    m = std::clamp(m, first_root_, first_root_ + root_count_ - 1);
    t.root = m - first_root_;
    Real local = x - Real(m) * delta_;
    t.local.push_back(local);
    if (bmp::abs(local) > sides_[0] / 2) return t;
    t.depth = 0;
    const Real centre_index = Real(per_axis_ - 1) / 2;
    for (int j = 1; j <= max_level; ++j) {
        const Real spacing = pow2(-B_) * sides_[static_cast<std::size_t>(j - 1)];
        std::int64_t d = floor_to_int(local / spacing + centre_index + Real(0.5));
        d = std::clamp<std::int64_t>(d, 0, per_axis_ - 1);
        const auto digit = static_cast<std::uint32_t>(d);
        local -= child_offset(j, digit);
        t.digits.push_back(digit);
        t.local.push_back(local);
        if (bmp::abs(local) > sides_[static_cast<std::size_t>(j)] / 2) break;
        t.depth = j;
    }
    return t;
}

Real AxisCantor::interval_gap(int j, int level) const {
    Real acc = 0;
    for (int m = j + 1; m <= level; ++m)
        acc += pow2(B_ * (m - j)) * rho_[static_cast<std::size_t>(m)];
    return acc;
}

// [a, b] is in coordinates local to the center of a level-(child_level - 1)
// interval, and the family is its 2^B children.
Real AxisCantor::uncovered_in_family(const Real& a, const Real& b, const Real& first_center,
                                     const Real& spacing, std::int64_t count, int child_level,
                                     int level) const {
    const Real w = sides_[static_cast<std::size_t>(child_level)] / 2;
    const std::int64_t lo = std::max<std::int64_t>(0, floor_to_int((a - first_center) / spacing) - 1);
    const std::int64_t hi =
        std::min<std::int64_t>(count, ceil_to_int((b - first_center) / spacing) + 2);
    Real acc = 0;
    for (std::int64_t m = lo; m <= hi; ++m) {
        const Real c = first_center + Real(m) * spacing;
        if (m < count) {
            const Real ca = std::max(a, c - w);
            const Real cb = std::min(b, c + w);
            if (cb > ca && child_level < level) {
                if (a <= c - w && b >= c + w)
                    acc += interval_gap(child_level, level);
                else
                    acc += uncovered_local(a - c, b - c, child_level, level);
            }
        }
        // Gap to the left of child m.
        const bool open_left = m == 0;
        const bool open_right = m == count;
        const Real glo = open_left ? a : first_center + Real(m - 1) * spacing + w;
        const Real ghi = open_right ? b : c - w;
        const Real ga = std::max(a, glo);
        const Real gb = std::min(b, ghi);
        if (gb > ga) {
            if (!open_left && !open_right && a <= glo && b >= ghi && child_level > 0)
                acc += rho_[static_cast<std::size_t>(child_level)];
            else
                acc += gb - ga;
        }
    }
    return acc;
}

Real AxisCantor::uncovered_local(const Real& a_in, const Real& b_in, int j, int level) const {
    const Real half = sides_[static_cast<std::size_t>(j)] / 2;
    const Real a = std::max(a_in, -half);
    const Real b = std::min(b_in, half);
    if (!(b > a) || level <= j) return 0;
    if (a == -half && b == half) return interval_gap(j, level);
    const Real spacing = pow2(-B_) * sides_[static_cast<std::size_t>(j)];
    const Real first = -Real(per_axis_ - 1) / 2 * spacing;
    return uncovered_in_family(a, b, first, spacing, per_axis_, j + 1, level);
}

Real AxisCantor::uncovered_length(const Real& a, const Real& b, int level) const {
    if (!(b > a)) return 0;
    const Real w = sides_[0] / 2;
    const std::int64_t lo = std::max(first_root_, floor_to_int(a / delta_) - 1);
    const std::int64_t hi = std::min(first_root_ + root_count_ - 1, ceil_to_int(b / delta_) + 1);
    Real covered = 0;
    Real inner = 0;
    for (std::int64_t m = lo; m <= hi; ++m) {
        const Real p = Real(m) * delta_;
        const Real ca = std::max(a, p - w);
        const Real cb = std::min(b, p + w);
        if (!(cb > ca)) continue;
        covered += cb - ca;
        inner += uncovered_local(a - p, b - p, 0, level);
    }
    return ((b - a) - covered) + inner;
}

CantorScaffold::CantorScaffold(BoxDomain domain, RhoSchedule schedule, int depth)
    : domain_(std::move(domain)), schedule_(std::move(schedule)), depth_(depth) {
    if (domain_.dim() != schedule_.k())
        throw InvalidArgument("domain dimension does not match schedule k");
    if (depth_ < 0) throw InvalidArgument("depth must be non-negative");
    sides_ = side_lengths(schedule_, depth_);
    std::vector<Real> rho(static_cast<std::size_t>(depth_) + 1);
    for (int j = 0; j <= depth_; ++j) rho[static_cast<std::size_t>(j)] = schedule_.rho(j);
    for (const auto& [lo, hi] : domain_.intervals) {
        if (!(schedule_.delta() < hi - lo))
            throw InvalidArgument("delta must be below the smallest domain side");
        const auto [first, count] = axis_roots(lo, hi, schedule_.delta());
        if (count < 1) throw InvalidArgument("empty root lattice: delta too large for domain");
        axes_.emplace_back(schedule_.delta(), schedule_.B(), sides_, rho, first, count);
    }
}

std::int64_t CantorScaffold::card_roots() const {
    std::int64_t n = 1;
    for (const auto& ax : axes_) n *= ax.root_count();
    return n;
}

Real CantorScaffold::cube_count(int level) const {
    return Real(card_roots()) * pow2(B() * k() * level);
}

bool CantorScaffold::contains(const Vec& x, int level) const {
    if (level < 0 || level > depth_) throw InvalidArgument("level out of range");
    for (int a = 0; a < k(); ++a)
        if (axes_[static_cast<std::size_t>(a)].trace(x[a], level).depth < level) return false;
    return true;
}

Real CantorScaffold::measure(int level) const {
    if (level < 0 || level > depth_) throw InvalidArgument("level out of range");
    return cube_count(level) * bmp::pow(side(level), k());
}

Real CantorScaffold::limit_measure() const {
    const SeriesResult series = weighted_series(schedule_);
    return Real(card_roots()) * bmp::pow(schedule_.delta() - series.value, k());
}

Vec CantorScaffold::center(const CubeAddress& address) const {
    Vec c(k());
    for (int a = 0; a < k(); ++a) {
        const auto& ax = axes_[static_cast<std::size_t>(a)];
        Real x = ax.root_center(address.root[static_cast<std::size_t>(a)]);
        for (int l = 1; l <= address.level(); ++l)
            x += ax.child_offset(l, address.digits[static_cast<std::size_t>(l - 1)]
                                                  [static_cast<std::size_t>(a)]);
        c[a] = x;
    }
    return c;
}

CubeAddress CantorScaffold::locate(const Vec& x, int max_level) const {
    std::vector<AxisCantor::Trace> traces;
    int depth = max_level;
    for (int a = 0; a < k(); ++a) {
        traces.push_back(axes_[static_cast<std::size_t>(a)].trace(x[a], max_level));
        depth = std::min(depth, traces.back().depth);
    }
    CubeAddress out;
    if (depth < 0) return out;
    for (const auto& t : traces) out.root.push_back(t.root);
    for (int l = 1; l <= depth; ++l) {
        std::vector<std::uint32_t> row;
        for (const auto& t : traces) row.push_back(t.digits[static_cast<std::size_t>(l - 1)]);
        out.digits.push_back(std::move(row));
    }
    return out;
}

std::vector<std::uint64_t> CantorScaffold::serialize(const CubeAddress& address) const {
    std::vector<std::uint64_t> path;
    std::uint64_t root = 0;
    for (int a = 0; a < k(); ++a)
        root = root * static_cast<std::uint64_t>(axes_[static_cast<std::size_t>(a)].root_count()) +
               static_cast<std::uint64_t>(address.root[static_cast<std::size_t>(a)]);
    path.push_back(root);
    for (const auto& row : address.digits) {
        std::uint64_t idx = 0;
        for (std::uint32_t d : row) idx = idx * children_per_axis() + d;
        path.push_back(idx);
    }
    return path;
}

CubeAddress CantorScaffold::deserialize(const std::vector<std::uint64_t>& path) const {
    if (path.empty()) throw InvalidArgument("empty cube path");
    if (static_cast<int>(path.size()) - 1 > depth_)
        throw InvalidArgument("cube path deeper than scaffold");
    CubeAddress out;
    out.root.assign(static_cast<std::size_t>(k()), 0);
    std::uint64_t root = path[0];
    for (int a = k() - 1; a >= 0; --a) {
        const auto n = static_cast<std::uint64_t>(axes_[static_cast<std::size_t>(a)].root_count());
        out.root[static_cast<std::size_t>(a)] = static_cast<std::int64_t>(root % n);
        root /= n;
    }
    if (root != 0) throw InvalidArgument("root index out of range");
    for (std::size_t l = 1; l < path.size(); ++l) {
        std::vector<std::uint32_t> row(static_cast<std::size_t>(k()));
        std::uint64_t idx = path[l];
        for (int a = k() - 1; a >= 0; --a) {
            row[static_cast<std::size_t>(a)] = static_cast<std::uint32_t>(idx % children_per_axis());
            idx /= children_per_axis();
        }
        if (idx != 0) throw InvalidArgument("child index out of range");
        out.digits.push_back(std::move(row));
    }
    return out;
}

Json schedule_to_json(const RhoSchedule& schedule) {
    Json j;
    j["regime"] = to_string(schedule.regime());
    j["k"] = schedule.k();
    j["B"] = schedule.B();
    j["delta"] = to_double(schedule.delta());
    j["param"] = schedule.param();
    if (schedule.regime() == Regime::tabulated) {
        Json rho = Json::array();
        for (const Real& r : schedule.table()) rho.push_back(to_double(r));
        j["rho"] = rho;
    }
    return j;
}

RhoSchedule schedule_from_json(const Json& doc) {
    const Regime regime = parse_regime(doc.at("regime").get<std::string>());
    const int k = doc.at("k").get<int>();
    const int B = doc.at("B").get<int>();
    const Real delta = doc.at("delta").get<double>();
    if (regime == Regime::tabulated) {
        std::vector<Real> rho;
        for (const auto& v : doc.at("rho")) rho.emplace_back(v.get<double>());
        return RhoSchedule::tabulated(k, B, delta, std::move(rho));
    }
    return make_schedule(regime, k, B, delta, doc.at("param").get<double>());
}

Json CantorScaffold::to_json() const {
    Json j;
    j["schedule"] = schedule_to_json(schedule_);
    Json dom = Json::array();
    for (const auto& [lo, hi] : domain_.intervals) dom.push_back({to_double(lo), to_double(hi)});
    j["domain"] = dom;
    j["depth"] = depth_;
    j["card_L1"] = card_roots();
    Json r = Json::array();
    Json m = Json::array();
    for (int i = 0; i <= depth_; ++i) {
        r.push_back(to_double(side(i)));
        m.push_back(to_double(measure(i)));
    }
    j["r"] = r;
    j["measure"] = m;
    return j;
}

CantorScaffold CantorScaffold::from_json(const Json& doc) {
    try {
        std::vector<std::pair<Real, Real>> iv;
        for (const auto& pair : doc.at("domain"))
            iv.emplace_back(Real(pair.at(0).get<double>()), Real(pair.at(1).get<double>()));
        return CantorScaffold(BoxDomain(std::move(iv)), schedule_from_json(doc.at("schedule")),
                              doc.at("depth").get<int>());
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(std::string("malformed scaffold document: ") + e.what());
    }
}

CantorScaffold build_scaffold(const BoxDomain& domain, const RhoSchedule& schedule, int N) {
    return CantorScaffold(domain, schedule, N);
}

bool membership(const CantorScaffold& scaffold, const Vec& x, int level) {
    if (x.size() != scaffold.k()) return false;
    return scaffold.contains(x, level);
}

Real measure(const CantorScaffold& scaffold, int level) { return scaffold.measure(level); }

}  // namespace cantorlab
