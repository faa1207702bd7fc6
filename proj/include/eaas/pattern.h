#ifndef EAAS_PATTERN_H
#define EAAS_PATTERN_H

#include <cstddef>
#include <string>
#include <vector>

namespace eaas {

/// H hypotheses over m frequency slots; row h holds the slot transmissivities
/// of hypothesis h.
class TransmissivityPattern {
   public:
    /// Throws DomainError unless H >= 2, every row has m >= 1 entries in [0, 1],
    /// and there is one label per row.
    TransmissivityPattern(std::vector<std::vector<double>> kappa, std::vector<std::string> labels);

    std::size_t hypotheses() const {
        return kappa_.size();
    }
    std::size_t slots() const {
        return kappa_.front().size();
    }
    double kappa(std::size_t h, std::size_t slot) const {
        return kappa_[h][slot];
    }
    const std::vector<double> &row(std::size_t h) const {
        return kappa_[h];
    }
    const std::vector<std::string> &labels() const {
        return labels_;
    }

    bool operator==(const TransmissivityPattern &) const = default;

   private:
    std::vector<std::vector<double>> kappa_;
    std::vector<std::string> labels_;
};

}  // namespace eaas

#endif
