#pragma once

#include <cmath>
#include <optional>
#include <vector>

namespace cantorlab {

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    int points = 0;
};

// Ordinary least squares y = slope x + intercept; absent for fewer than two
// points or a degenerate x spread.
inline std::optional<LineFit> fit_line(const std::vector<double>& xs, const std::vector<double>& ys) {
    const std::size_t n = std::min(xs.size(), ys.size());
    if (n < 2) return std::nullopt;
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    if (!(sxx > 0.0)) return std::nullopt;
    LineFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.points = static_cast<int>(n);
    return fit;
}

}  // namespace cantorlab
