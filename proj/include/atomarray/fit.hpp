#pragma once

#include <optional>
#include <vector>

namespace atomarray {

struct ScalingFit {
    std::vector<double> x, y;  // samples as given
    double slope = 0.0;        // in the fitted log space
    double intercept = 0.0;
    double r2 = 0.0;
    std::optional<double> decay_length;  // exponential fits with negative slope
};

struct LineFit {
    double slope, intercept, r2;
};

// Ordinary least squares; needs at least 2 distinct x.
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

// log|y| against log x. Needs >= 4 points.
ScalingFit fit_power_law(const std::vector<double>& x, const std::vector<double>& y);
// log|y| against x. Needs >= 4 points.
ScalingFit fit_exponential(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace atomarray
