#include "doctest.h"

#include "cantorlab/error.hpp"
#include "cantorlab/phase.hpp"
#include "cantorlab/rng.hpp"

#include <cmath>
#include <limits>

using namespace cantorlab;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

TEST_CASE("probe points land in the figure regions") {
    CHECK(classify(0.25, 0.6, kInf).phase == Phase::frobenius);
    CHECK(classify(0.25, 0.6, kInf).tau == doctest::Approx(0.5));
    CHECK(classify(0.25, 0.4, kInf).phase == Phase::counterexample);
    CHECK(classify(0.6, 0.1, 2).phase == Phase::frobenius);
    CHECK(classify(0.1, 0.95, 1).phase == Phase::frobenius);
    CHECK(classify(0.1, 0.85, 1).phase == Phase::counterexample);
    CHECK(classify(0.5, 0.4, kInf).phase == Phase::frobenius);
}

TEST_CASE("boundary cases stay open") {
    CHECK(classify(0.25, 0.5, kInf).phase == Phase::boundary_open);
    CHECK(classify(0.1, 0.9, 1).phase == Phase::boundary_open);
    // s = 1/2 below the threshold 1/(2q).
    CHECK(classify(0.5, 0.2, 2).phase == Phase::boundary_open);
    CHECK(classify(0.5, 0.25, 2).phase == Phase::boundary_open);
    CHECK(classify(0.5, 0.3, 2).phase == Phase::frobenius);
    CHECK(classify(0.0, 0.99, 3).phase == Phase::counterexample);
    CHECK(classify(0.0, 0.01, kInf).phase == Phase::counterexample);
}

TEST_CASE("threshold formula") {
    CHECK(phase_threshold(0.3, 1) == doctest::Approx(0.7));
    CHECK(phase_threshold(0.3, kInf) == doctest::Approx(0.4));
    CHECK(phase_threshold(0.3, 1.5) == doctest::Approx(1 - 0.4));
    for (double s : {0.05, 0.2, 0.45, 0.7})
        CHECK(std::abs(phase_threshold(s, 1e6) - phase_threshold(s, kInf)) < 1e-5);
}

TEST_CASE("classification is monotone in alpha and in s") {
    Rng rng = make_stream(21);
    for (int i = 0; i < 2000; ++i) {
        const double q = i % 4 == 0 ? kInf : 1 + 5 * uniform01(rng);
        const double s = 0.99 * uniform01(rng);
        const double a = 0.01 + 0.98 * uniform01(rng);
        const double a2 = a + (0.99 - a) * uniform01(rng);
        const double s2 = s + (0.99 - s) * uniform01(rng);
        const auto p = classify(s, a, q).phase;
        if (p == Phase::frobenius) {
            CHECK(classify(s, a2, q).phase != Phase::counterexample);
            CHECK(classify(s2, a, q).phase != Phase::counterexample);
        }
    }
}

TEST_CASE("figure grid crossing sits at q / (2q - 1)") {
    for (double q : {1.0, 1.5, 4.0, kInf}) {
        const auto g = figure_grid(q, 128);
        CHECK(g.cells.size() == 128u * 128u);
        const double want = std::isinf(q) ? 0.5 : q / (2 * q - 1);
        CHECK(std::abs(g.zero_crossing - want) <= 1.0 / 128);
        bool has_f = false, has_c = false;
        for (const auto& c : g.cells) {
            has_f |= c.phase == Phase::frobenius;
            has_c |= c.phase == Phase::counterexample;
            if (c.s > 0.5) CHECK(c.phase == Phase::frobenius);
        }
        CHECK(has_f);
        CHECK(has_c);
    }
    CHECK_THROWS_AS(figure_grid(kInf, 8), InvalidArgument);
}

TEST_CASE("range checks and q parsing") {
    CHECK_THROWS_AS(classify(1.0, 0.5, 2), InvalidArgument);
    CHECK_THROWS_AS(classify(-0.1, 0.5, 2), InvalidArgument);
    CHECK_THROWS_AS(classify(0.2, 0.0, 2), InvalidArgument);
    CHECK_THROWS_AS(classify(0.2, 0.5, 0.5), InvalidArgument);
    CHECK(std::isinf(parse_q("inf")));
    CHECK(parse_q("1.5") == 1.5);
    CHECK_THROWS_AS(parse_q("0.5"), InvalidArgument);
    CHECK_THROWS_AS(parse_q("2x"), InvalidArgument);
    CHECK(format_q(kInf) == "inf");
    CHECK(format_q(1.5) == "1.5");
}
