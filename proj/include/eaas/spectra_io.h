#ifndef EAAS_SPECTRA_IO_H
#define EAAS_SPECTRA_IO_H

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "eaas/pattern.h"

namespace eaas {

/// Built-in three-molecule patterns over four infrared slots: "wine"
/// (methanol, ethanol, ethanal) and "drug" (phenyl salicylate, methyl
/// salicylate, benzoic acid). Throws DomainError for other names.
TransmissivityPattern builtin_pattern(std::string_view name);

/// Slot centres (cm^-1) at which the built-in patterns were averaged.
std::vector<double> builtin_slot_centers(std::string_view name);

/// Pattern CSV: header `slot,<label1>,<label2>,...`, then one row per slot
/// `<slot_id>,<kappa for each hypothesis>`. Throws ParseError with the
/// 1-based line and field of the first problem.
TransmissivityPattern parse_pattern_csv(std::istream &in);
TransmissivityPattern load_pattern_csv(const std::filesystem::path &path);

/// Writes the CSV layout read by load_pattern_csv with round-trip precision.
void write_pattern_csv(std::ostream &out, const TransmissivityPattern &pattern);
void save_pattern_csv(const std::filesystem::path &path, const TransmissivityPattern &pattern);

struct SpectrumPoint {
    double wavenumber;      // cm^-1
    double transmissivity;  // fraction in [0, 1]
};

/// Transmission spectrum sampled at strictly increasing wavenumbers.
class SpectrumSeries {
   public:
    /// Throws DomainError unless there are >= 2 points, wavenumbers strictly
    /// increase and transmissivities lie in [0, 1].
    explicit SpectrumSeries(std::vector<SpectrumPoint> points);
    const std::vector<SpectrumPoint> &points() const {
        return points_;
    }

   private:
    std::vector<SpectrumPoint> points_;
};

/// Spectrum CSV with header `wavenumber_cm1,transmissivity`. Files whose
/// largest value exceeds 1.5 are read as percent and scaled by 1/100 (a
/// message is appended to `warnings`); values above 100 are rejected.
SpectrumSeries parse_spectrum_csv(std::istream &in, std::vector<std::string> *warnings = nullptr);
SpectrumSeries load_spectrum_csv(const std::filesystem::path &path, std::vector<std::string> *warnings = nullptr);

struct SlotGrid {
    std::vector<double> centers;
    double half_width = 100.0;
};

/// Mean transmissivity of the piecewise-linear spectrum over each window
/// [centre - half_width, centre + half_width], clipped to the sampled range.
/// Throws DomainError naming the slot when a window misses the data.
std::vector<double> discretize_spectrum(const SpectrumSeries &series, const SlotGrid &grid);

/// All C(m, k) placements of k absorbing slots (kappa_t) among m, in
/// lexicographic order of the slot subsets; other slots carry kappa_b.
TransmissivityPattern kpeak_patterns(std::size_t m, std::size_t k, double kappa_t, double kappa_b,
                                     std::size_t cap = 1000000);

}  // namespace eaas

#endif
