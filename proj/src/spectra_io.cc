#include "eaas/spectra_io.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "eaas/errors.h"

namespace eaas {

namespace {

/// Columns are hypotheses, rows are slots, as tabulated from the FTIR spectra.
const std::vector<std::vector<double>> kWineBySlot = {
    {0.9460, 0.9749, 0.7853},
    {0.5659, 0.6218, 0.6846},
    {0.7503, 0.7622, 0.4683},
    {0.9737, 0.9891, 0.4165},
};
const std::vector<std::vector<double>> kDrugBySlot = {
    {0.9613, 0.9002, 0.8093},
    {0.9215, 0.8749, 0.7427},
    {0.8360, 0.4002, 0.7556},
    {0.9867, 0.8749, 0.8522},
};

std::vector<std::vector<double>> transpose(const std::vector<std::vector<double>> &by_slot) {
    std::vector<std::vector<double>> out(by_slot.front().size(), std::vector<double>(by_slot.size()));
    for (std::size_t l = 0; l < by_slot.size(); ++l) {
        for (std::size_t h = 0; h < by_slot[l].size(); ++h) {
            out[h][l] = by_slot[l][h];
        }
    }
    return out;
}

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
        if (comma == std::string_view::npos) {
            return out;
        }
        start = comma + 1;
    }
}

double parse_number(std::string_view field, std::size_t row, std::size_t col) {
    double value = 0.0;
    const char *end = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(field.data(), end, value);
    if (field.empty() || ec != std::errc() || ptr != end || !std::isfinite(value)) {
        throw ParseError("line " + std::to_string(row) + ", field " + std::to_string(col) + ": '" +
                             std::string(field) + "' is not a number",
                         row, col);
    }
    return value;
}

bool blank(std::string_view line) {
    return trim(line).empty();
}

std::ifstream open_input(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open " + path.string(), 0, 0);
    }
    return in;
}

}  // namespace

TransmissivityPattern builtin_pattern(std::string_view name) {
    if (name == "wine") {
        return {transpose(kWineBySlot), {"methanol", "ethanol", "ethanal"}};
    }
    if (name == "drug") {
        return {transpose(kDrugBySlot), {"phenyl salicylate", "methyl salicylate", "benzoic acid"}};
    }
    throw DomainError("unknown built-in pattern '" + std::string(name) + "' (expected wine or drug)");
}

std::vector<double> builtin_slot_centers(std::string_view name) {
    if (name == "wine") {
        return {500, 1050, 1400, 1800};
    }
    if (name == "drug") {
        return {500, 1000, 1500, 2000};
    }
    throw DomainError("unknown built-in pattern '" + std::string(name) + "' (expected wine or drug)");
}

TransmissivityPattern parse_pattern_csv(std::istream &in) {
    std::string line;
    std::size_t row = 0;
    std::vector<std::string> labels;
    while (std::getline(in, line)) {
        ++row;
        if (!blank(line)) {
            break;
        }
    }
    if (line.empty() || blank(line)) {
        throw ParseError("pattern file is empty", std::max<std::size_t>(row, 1), 0);
    }
    const auto header = split_fields(line);
    if (header.front() != "slot") {
        throw ParseError("line " + std::to_string(row) + ": header must start with 'slot'", row, 1);
    }
    for (std::size_t c = 1; c < header.size(); ++c) {
        if (header[c].empty()) {
            throw ParseError("line " + std::to_string(row) + ", field " + std::to_string(c + 1) + ": empty label",
                             row, c + 1);
        }
        labels.emplace_back(header[c]);
    }
    if (labels.size() < 2) {
        throw ParseError("line " + std::to_string(row) + ": a pattern needs at least two hypotheses", row, 0);
    }

    std::vector<std::vector<double>> by_slot;
    while (std::getline(in, line)) {
        ++row;
        if (blank(line)) {
            continue;
        }
        const auto fields = split_fields(line);
        if (fields.size() != labels.size() + 1) {
            throw ParseError("line " + std::to_string(row) + ": expected " + std::to_string(labels.size() + 1) +
                                 " fields, found " + std::to_string(fields.size()),
                             row, std::min(fields.size(), labels.size() + 1) + 1);
        }
        std::vector<double> values;
        for (std::size_t c = 1; c < fields.size(); ++c) {
            const double k = parse_number(fields[c], row, c + 1);
            if (k < 0.0 || k > 1.0) {
                throw ParseError("line " + std::to_string(row) + ", field " + std::to_string(c + 1) +
                                     ": transmissivity " + std::string(fields[c]) + " is outside [0, 1]",
                                 row, c + 1);
            }
            values.push_back(k);
        }
        by_slot.push_back(std::move(values));
    }
    if (by_slot.empty()) {
        throw ParseError("pattern file has no slot rows", row, 0);
    }
    return {transpose(by_slot), labels};
}

TransmissivityPattern load_pattern_csv(const std::filesystem::path &path) {
    auto in = open_input(path);
    return parse_pattern_csv(in);
}

void write_pattern_csv(std::ostream &out, const TransmissivityPattern &pattern) {
    out << "slot";
    for (const auto &label : pattern.labels()) {
        out << ',' << label;
    }
    out << '\n';
    char buf[32];
    for (std::size_t l = 0; l < pattern.slots(); ++l) {
        out << l;
        for (std::size_t h = 0; h < pattern.hypotheses(); ++h) {
            std::snprintf(buf, sizeof buf, "%.17g", pattern.kappa(h, l));
            out << ',' << buf;
        }
        out << '\n';
    }
}

void save_pattern_csv(const std::filesystem::path &path, const TransmissivityPattern &pattern) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    write_pattern_csv(out, pattern);
}

SpectrumSeries::SpectrumSeries(std::vector<SpectrumPoint> points) : points_(std::move(points)) {
    if (points_.size() < 2) {
        throw DomainError("a spectrum needs at least two points");
    }
    for (std::size_t i = 0; i < points_.size(); ++i) {
        const auto &p = points_[i];
        if (!(p.transmissivity >= 0.0 && p.transmissivity <= 1.0)) {
            throw DomainError("spectrum point " + std::to_string(i) + " has transmissivity outside [0, 1]");
        }
        if (i > 0 && !(p.wavenumber > points_[i - 1].wavenumber)) {
            throw DomainError("spectrum wavenumbers must strictly increase (point " + std::to_string(i) + ")");
        }
    }
}

SpectrumSeries parse_spectrum_csv(std::istream &in, std::vector<std::string> *warnings) {
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (!blank(line)) {
            break;
        }
    }
    const auto header = split_fields(line);
    if (header.size() != 2 || header[0] != "wavenumber_cm1" || header[1] != "transmissivity") {
        throw ParseError("line " + std::to_string(row) + ": expected header 'wavenumber_cm1,transmissivity'", row, 1);
    }
    std::vector<SpectrumPoint> points;
    std::vector<std::size_t> rows;
    while (std::getline(in, line)) {
        ++row;
        if (blank(line)) {
            continue;
        }
        const auto fields = split_fields(line);
        if (fields.size() != 2) {
            throw ParseError("line " + std::to_string(row) + ": expected 2 fields, found " +
                                 std::to_string(fields.size()),
                             row, std::min<std::size_t>(fields.size(), 2) + 1);
        }
        const double w = parse_number(fields[0], row, 1);
        const double t = parse_number(fields[1], row, 2);
        if (t < 0.0 || t > 100.0) {
            throw ParseError("line " + std::to_string(row) + ", field 2: transmissivity " + std::string(fields[1]) +
                                 " is out of range",
                             row, 2);
        }
        if (!points.empty() && !(w > points.back().wavenumber)) {
            throw ParseError("line " + std::to_string(row) + ", field 1: wavenumbers must strictly increase", row, 1);
        }
        points.push_back({w, t});
        rows.push_back(row);
    }
    double largest = 0.0;
    for (const auto &p : points) {
        largest = std::max(largest, p.transmissivity);
    }
    if (largest > 1.5) {
        for (auto &p : points) {
            p.transmissivity /= 100.0;
        }
        if (warnings != nullptr) {
            warnings->push_back("transmissivity read as percent and scaled by 1/100");
        }
    } else {
        for (std::size_t i = 0; i < points.size(); ++i) {
            if (points[i].transmissivity > 1.0) {
                throw ParseError("line " + std::to_string(rows[i]) + ", field 2: transmissivity above 1", rows[i], 2);
            }
        }
    }
    if (points.size() < 2) {
        throw ParseError("spectrum needs at least two data rows", row, 0);
    }
    return SpectrumSeries(std::move(points));
}

SpectrumSeries load_spectrum_csv(const std::filesystem::path &path, std::vector<std::string> *warnings) {
    auto in = open_input(path);
    return parse_spectrum_csv(in, warnings);
}

std::vector<double> discretize_spectrum(const SpectrumSeries &series, const SlotGrid &grid) {
    if (!(grid.half_width > 0.0)) {
        throw DomainError("half_width must be > 0");
    }
    const auto &pts = series.points();
    auto value_at = [&](double x) {
        auto hi = std::upper_bound(pts.begin(), pts.end(), x, [](double v, const SpectrumPoint &p) {
            return v < p.wavenumber;
        });
        if (hi == pts.begin()) {
            return pts.front().transmissivity;
        }
        if (hi == pts.end()) {
            return pts.back().transmissivity;
        }
        const auto lo = hi - 1;
        const double f = (x - lo->wavenumber) / (hi->wavenumber - lo->wavenumber);
        return lo->transmissivity + f * (hi->transmissivity - lo->transmissivity);
    };
    std::vector<double> out;
    for (std::size_t s = 0; s < grid.centers.size(); ++s) {
        const double a = std::max(grid.centers[s] - grid.half_width, pts.front().wavenumber);
        const double b = std::min(grid.centers[s] + grid.half_width, pts.back().wavenumber);
        if (!(b > a)) {
            throw DomainError("slot " + std::to_string(s) + " (centre " + std::to_string(grid.centers[s]) +
                              " cm^-1) has no spectrum data in its window");
        }
        // Exact integral of the piecewise-linear interpolant over [a, b].
        std::vector<double> knots{a};
        for (const auto &p : pts) {
            if (p.wavenumber > a && p.wavenumber < b) {
                knots.push_back(p.wavenumber);
            }
        }
        knots.push_back(b);
        double area = 0.0;
        for (std::size_t i = 1; i < knots.size(); ++i) {
            area += 0.5 * (value_at(knots[i - 1]) + value_at(knots[i])) * (knots[i] - knots[i - 1]);
        }
        out.push_back(area / (b - a));
    }
    return out;
}

TransmissivityPattern kpeak_patterns(std::size_t m, std::size_t k, double kappa_t, double kappa_b, std::size_t cap) {
    if (k < 1 || k >= m) {
        throw DomainError("k-peak patterns need 1 <= k < m");
    }
    if (!(kappa_t >= 0.0 && kappa_t <= 1.0 && kappa_b >= 0.0 && kappa_b <= 1.0)) {
        throw DomainError("transmissivities must lie in [0, 1]");
    }
    // C(m, k) built incrementally; every prefix C(m-k+i, i) is an integer.
    double count = 1.0;
    for (std::size_t i = 1; i <= k; ++i) {
        count = count * static_cast<double>(m - k + i) / static_cast<double>(i);
        if (count > static_cast<double>(cap)) {
            throw ResourceError("k-peak enumeration exceeds " + std::to_string(cap) + " hypotheses");
        }
    }
    std::vector<std::vector<double>> rows;
    std::vector<std::string> labels;
    std::vector<std::size_t> subset(k);
    for (std::size_t i = 0; i < k; ++i) {
        subset[i] = i;
    }
    while (true) {
        std::vector<double> row(m, kappa_b);
        std::string label = "peak";
        for (std::size_t i = 0; i < k; ++i) {
            row[subset[i]] = kappa_t;
            label += (i == 0 ? "@" : "+") + std::to_string(subset[i]);
        }
        rows.push_back(std::move(row));
        labels.push_back(std::move(label));
        std::size_t i = k;
        while (i > 0 && subset[i - 1] == m - k + i - 1) {
            --i;
        }
        if (i == 0) {
            break;
        }
        ++subset[i - 1];
        for (std::size_t j = i; j < k; ++j) {
            subset[j] = subset[j - 1] + 1;
        }
    }
    return {std::move(rows), std::move(labels)};
}

}  // namespace eaas
