#include "eaas/simplex.h"

#include <algorithm>
#include <functional>
#include <numeric>

#include "eaas/errors.h"

namespace eaas {

std::vector<double> project_onto_simplex(std::span<const double> x, double total) {
    if (x.empty()) {
        throw DomainError("cannot project an empty vector");
    }
    if (!(total >= 0.0)) {
        throw DomainError("simplex total must be >= 0");
    }
    std::vector<double> sorted(x.begin(), x.end());
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    double prefix = 0.0;
    double theta = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        prefix += sorted[i];
        const double candidate = (prefix - total) / static_cast<double>(i + 1);
        if (sorted[i] - candidate > 0.0) {
            theta = candidate;
        }
    }
    std::vector<double> out(x.size());
    std::transform(x.begin(), x.end(), out.begin(), [theta](double v) {
        return std::max(0.0, v - theta);
    });
    return out;
}

std::vector<double> project_onto_capped_simplex(std::span<const double> x, double total) {
    std::vector<double> clipped(x.size());
    std::transform(x.begin(), x.end(), clipped.begin(), [](double v) {
        return std::max(0.0, v);
    });
    if (std::accumulate(clipped.begin(), clipped.end(), 0.0) <= total) {
        return clipped;
    }
    return project_onto_simplex(x, total);
}

}  // namespace eaas
