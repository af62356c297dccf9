#include "collage/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace collage {

std::vector<double> effective_update(const std::vector<double>& theta_prev_wide,
                                     const std::vector<double>& theta_new_wide) {
    if (theta_prev_wide.size() != theta_new_wide.size())
        throw std::invalid_argument("effective_update: length mismatch");
    std::vector<double> out(theta_prev_wide.size());
    for (size_t i = 0; i < out.size(); ++i) out[i] = theta_new_wide[i] - theta_prev_wide[i];
    return out;
}

double edq(const std::vector<double>& intended, const std::vector<double>& effective) {
    if (intended.size() != effective.size())
        throw std::invalid_argument("edq: length mismatch");
    const double n = l2_norm(intended);
    if (n == 0.0) return 0.0;
    double dot = 0.0;
    for (size_t i = 0; i < intended.size(); ++i) dot += (intended[i] / n) * effective[i];
    return dot;
}

double imprecision_pct(const std::vector<double>& intended,
                       const std::vector<double>& effective) {
    if (intended.size() != effective.size())
        throw std::invalid_argument("imprecision_pct: length mismatch");
    if (intended.empty()) return 0.0;
    size_t lost = 0;
    for (size_t i = 0; i < intended.size(); ++i)
        if (effective[i] == 0.0 && intended[i] != 0.0) ++lost;
    return 100.0 * static_cast<double>(lost) / static_cast<double>(intended.size());
}

double l2_norm(const std::vector<double>& x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return std::sqrt(s);
}

}  // namespace collage
