#ifndef EAAS_SIMPLEX_H
#define EAAS_SIMPLEX_H

#include <span>
#include <vector>

namespace eaas {

/// Euclidean projection onto {x >= 0, sum(x) = total} (sorted-threshold method).
std::vector<double> project_onto_simplex(std::span<const double> x, double total);

/// Euclidean projection onto {x >= 0, sum(x) <= total}.
std::vector<double> project_onto_capped_simplex(std::span<const double> x, double total);

}  // namespace eaas

#endif
