#include "atomarray/fit.hpp"

#include <cmath>

#include "atomarray/errors.hpp"

namespace atomarray {

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n != y.size() || n < 2) throw FitError("line fit needs at least 2 paired samples");
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0) throw FitError("line fit needs distinct abscissae");
    const double slope = sxy / sxx;
    const double r2 = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
    return {slope, my - slope * mx, r2};
}

namespace {

ScalingFit fit_log(const std::vector<double>& x, const std::vector<double>& y, bool log_x) {
    if (x.size() != y.size()) throw FitError("sample length mismatch");
    if (x.size() < 4) throw FitError("scaling fit needs at least 4 points");
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(std::abs(y[i]) > 0.0) || !std::isfinite(y[i])) throw FitError("scaling fit needs finite nonzero samples");
        if (log_x && !(x[i] > 0.0)) throw FitError("power-law fit needs positive abscissae");
        lx.push_back(log_x ? std::log(x[i]) : x[i]);
        ly.push_back(std::log(std::abs(y[i])));
    }
    const LineFit l = fit_line(lx, ly);
    ScalingFit f;
    f.x = x;
    f.y = y;
    f.slope = l.slope;
    f.intercept = l.intercept;
    f.r2 = l.r2;
    if (!log_x && l.slope < 0) f.decay_length = -1.0 / l.slope;
    return f;
}

}  // namespace

ScalingFit fit_power_law(const std::vector<double>& x, const std::vector<double>& y) { return fit_log(x, y, true); }
ScalingFit fit_exponential(const std::vector<double>& x, const std::vector<double>& y) { return fit_log(x, y, false); }

}  // namespace atomarray
