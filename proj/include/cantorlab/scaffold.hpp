#pragma once

#include "cantorlab/real.hpp"
#include "cantorlab/schedule.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <utility>
#include <vector>

namespace cantorlab {

using Json = nlohmann::ordered_json;

struct BoxDomain {
    std::vector<std::pair<Real, Real>> intervals;

    BoxDomain() = default;
    explicit BoxDomain(std::vector<std::pair<Real, Real>> iv);
    static BoxDomain cube(int k, Real lo, Real hi);

    int dim() const { return static_cast<int>(intervals.size()); }
    Real volume() const;
    Real diameter() const;
    // Open box membership.
    bool contains(const Vec& x) const;
};

// One coordinate of the product scaffold: the nested 1-D interval families.
class AxisCantor {
public:
    AxisCantor(Real delta, int B, std::vector<Real> sides, std::vector<Real> rho,
               std::int64_t first_root, std::int64_t root_count);

    int depth() const { return static_cast<int>(sides_.size()) - 1; }
    std::int64_t root_count() const { return root_count_; }
    Real root_center(std::int64_t index) const { return Real(first_root_ + index) * delta_; }
    // Offset of child `digit` from its parent's center at `level` >= 1.
    Real child_offset(int level, std::uint32_t digit) const;

    struct Trace {
        std::int64_t root = -1;
        std::vector<std::uint32_t> digits;  // digits[j-1] is the nearest child at level j
        std::vector<Real> local;            // local[j] = x - center at level j
        int depth = -1;                     // deepest level whose closed interval holds x
    };
    // Walks nearest cubes down to max_level, recording one level past the last
    // containing one.
    Trace trace(const Real& x, int max_level) const;

    // Length of [a, b] not covered by the level-`level` intervals.
    Real uncovered_length(const Real& a, const Real& b, int level) const;
    // Uncovered length inside one full level-j interval down to `level`.
    Real interval_gap(int j, int level) const;

private:
    Real uncovered_local(const Real& a, const Real& b, int j, int level) const;
    Real uncovered_in_family(const Real& a, const Real& b, const Real& first_center,
                             const Real& spacing, std::int64_t count, int child_level,
                             int level) const;

    Real delta_;
    int B_;
    std::uint32_t per_axis_;
    std::vector<Real> sides_;
    std::vector<Real> rho_;
    std::int64_t first_root_;
    std::int64_t root_count_;
};

// Root index per axis plus, for each level, the child digit per axis.
struct CubeAddress {
    std::vector<std::int64_t> root;
    std::vector<std::vector<std::uint32_t>> digits;

    int level() const { return static_cast<int>(digits.size()); }
    bool operator==(const CubeAddress&) const = default;
};

class CantorScaffold {
public:
    CantorScaffold(BoxDomain domain, RhoSchedule schedule, int depth);

    const BoxDomain& domain() const { return domain_; }
    const RhoSchedule& schedule() const { return schedule_; }
    int depth() const { return depth_; }
    int k() const { return schedule_.k(); }
    int B() const { return schedule_.B(); }
    std::uint32_t children_per_axis() const { return std::uint32_t(1) << schedule_.B(); }
    const std::vector<Real>& sides() const { return sides_; }
    const Real& side(int level) const { return sides_.at(static_cast<std::size_t>(level)); }
    Real rho(int level) const { return schedule_.rho(level); }
    const AxisCantor& axis(int a) const { return axes_.at(static_cast<std::size_t>(a)); }
    std::int64_t card_roots() const;
    // Card(L1) 2^{Bk level}, as a real since it overflows 64 bits quickly.
    Real cube_count(int level) const;

    bool contains(const Vec& x, int level) const;
    Real measure(int level) const;
    // Card(L1) (delta - sum_j 2^{Bj} rho_j)^k.
    Real limit_measure() const;

    Vec center(const CubeAddress& address) const;
    // Deepest cube holding x (level -1 when x misses every root cube).
    CubeAddress locate(const Vec& x, int max_level) const;

    std::vector<std::uint64_t> serialize(const CubeAddress& address) const;
    CubeAddress deserialize(const std::vector<std::uint64_t>& path) const;

    Json to_json() const;
    static CantorScaffold from_json(const Json& doc);

private:
    BoxDomain domain_;
    RhoSchedule schedule_;
    int depth_;
    std::vector<Real> sides_;
    std::vector<AxisCantor> axes_;
};

CantorScaffold build_scaffold(const BoxDomain& domain, const RhoSchedule& schedule, int N);
bool membership(const CantorScaffold& scaffold, const Vec& x, int level);
Real measure(const CantorScaffold& scaffold, int level);

Json schedule_to_json(const RhoSchedule& schedule);
RhoSchedule schedule_from_json(const Json& doc);

}  // namespace cantorlab
