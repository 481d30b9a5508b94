#pragma once

#include <utility>
#include <vector>

namespace boa {

struct FitResult {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    double ci_half_width = 0.0;  // 95% half width on the slope
    std::vector<int> excluded_points;
};

/// Least squares of log(error) against log(epsilon). Points with errors at
/// or below machine zero are excluded and reported; DegenerateFit if fewer
/// than two usable points remain.
FitResult fit_slope(const std::vector<std::pair<double, double>>& curve);

}  // namespace boa
