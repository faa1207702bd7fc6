#include "eaas/pattern.h"

#include <string>

#include "eaas/errors.h"

namespace eaas {

TransmissivityPattern::TransmissivityPattern(std::vector<std::vector<double>> kappa, std::vector<std::string> labels)
    : kappa_(std::move(kappa)), labels_(std::move(labels)) {
    if (kappa_.size() < 2) {
        throw DomainError("a pattern needs at least two hypotheses");
    }
    if (labels_.size() != kappa_.size()) {
        throw DomainError("pattern has " + std::to_string(kappa_.size()) + " rows but " +
                          std::to_string(labels_.size()) + " labels");
    }
    const std::size_t m = kappa_.front().size();
    if (m == 0) {
        throw DomainError("a pattern needs at least one slot");
    }
    for (std::size_t h = 0; h < kappa_.size(); ++h) {
        if (kappa_[h].size() != m) {
            throw DomainError("pattern row " + std::to_string(h) + " has " + std::to_string(kappa_[h].size()) +
                              " slots, expected " + std::to_string(m));
        }
        for (std::size_t l = 0; l < m; ++l) {
            const double k = kappa_[h][l];
            if (!(k >= 0.0 && k <= 1.0)) {
                throw DomainError("transmissivity of hypothesis " + std::to_string(h) + " at slot " +
                                  std::to_string(l) + " is outside [0, 1]");
            }
        }
    }
}

}  // namespace eaas
