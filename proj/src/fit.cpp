#include "boa/fit.hpp"

#include <cmath>

#include "boa/errors.hpp"

namespace boa {

FitResult fit_slope(const std::vector<std::pair<double, double>>& curve) {
    FitResult out;
    std::vector<double> xs, ys;
    for (size_t i = 0; i < curve.size(); ++i) {
        const auto& [eps, err] = curve[i];
        if (eps <= 0.0) throw DegenerateFit("epsilon must be positive");
        if (!(err > 1e-300) || !std::isfinite(err)) {
            out.excluded_points.push_back(static_cast<int>(i));
            continue;
        }
        xs.push_back(std::log(eps));
        ys.push_back(std::log(err));
    }
    const size_t n = xs.size();
    if (n < 2) throw DegenerateFit("fewer than two usable points after exclusion");

    double sx = 0, sy = 0;
    for (size_t i = 0; i < n; ++i) {
        sx += xs[i];
        sy += ys[i];
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0, syy = 0;
    for (size_t i = 0; i < n; ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    if (sxx == 0.0) throw DegenerateFit("all epsilons identical");
    out.slope = sxy / sxx;
    out.intercept = my - out.slope * mx;

    double ss_res = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double r = ys[i] - (out.intercept + out.slope * xs[i]);
        ss_res += r * r;
    }
    out.r_squared = (syy == 0.0) ? 1.0 : 1.0 - ss_res / syy;

    if (n > 2) {
        const double se = std::sqrt(ss_res / (n - 2) / sxx);
        // two-sided 97.5% Student t quantiles for small df
        static const double t975[] = {0, 12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306};
        const size_t df = n - 2;
        const double t = df < 9 ? t975[df] : 2.0;
        out.ci_half_width = t * se;
    }
    return out;
}

}  // namespace boa
