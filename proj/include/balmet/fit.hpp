// Least-squares lines and sliding-window log-log slopes for decay probes.

#ifndef BALMET_FIT_HPP
#define BALMET_FIT_HPP

#include <cmath>
#include <stdexcept>
#include <vector>

namespace balmet {

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double maxResidual = 0.0;
};

inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    const size_t n = x.size();
    if (n != y.size() || n < 2) throw std::invalid_argument("fit_line: need >= 2 points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    LineFit f;
    const double det = n * sxx - sx * sx;
    f.slope = (n * sxy - sx * sy) / det;
    f.intercept = (sy - f.slope * sx) / n;
    for (size_t i = 0; i < n; ++i)
        f.maxResidual = std::max(f.maxResidual, std::abs(y[i] - f.slope * x[i] - f.intercept));
    return f;
}

/// Slope of log(y) against log(x) over windows ending at each index
/// (window = min(window, points so far)); NaN until two points exist.
inline std::vector<double> sliding_log_slopes(const std::vector<double>& x,
                                              const std::vector<double>& y, int window = 4) {
    std::vector<double> out(x.size(), std::numeric_limits<double>::quiet_NaN());
    for (size_t i = 1; i < x.size(); ++i) {
        const size_t lo = (i + 1 >= static_cast<size_t>(window)) ? i + 1 - window : 0;
        std::vector<double> lx, ly;
        for (size_t j = lo; j <= i; ++j) {
            if (!(y[j] > 0.0) || !(x[j] > 0.0)) continue;
            lx.push_back(std::log(x[j]));
            ly.push_back(std::log(y[j]));
        }
        if (lx.size() >= 2) out[i] = fit_line(lx, ly).slope;
    }
    return out;
}

}  // namespace balmet

#endif  // BALMET_FIT_HPP
