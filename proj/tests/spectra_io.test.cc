#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <functional>
#include <fstream>
#include <sstream>

#include "eaas/errors.h"
#include "eaas/rng.h"
#include "eaas/spectra_io.h"

using namespace eaas;

namespace {

TransmissivityPattern pattern_from(const std::string &text) {
    std::istringstream in(text);
    return parse_pattern_csv(in);
}

void expect_parse_error(const std::string &text, std::size_t row, std::size_t col) {
    try {
        pattern_from(text);
        ADD_FAILURE() << "accepted:\n" << text;
    } catch (const ParseError &e) {
        EXPECT_EQ(e.row, row) << e.what();
        EXPECT_EQ(e.col, col) << e.what();
    }
}

SpectrumSeries sampled(double lo, double hi, double step, const std::function<double(double)> &f) {
    std::vector<SpectrumPoint> pts;
    const auto n = static_cast<std::size_t>(std::llround((hi - lo) / step));
    for (std::size_t i = 0; i <= n; ++i) {
        const double w = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n);
        pts.push_back({w, f(w)});
    }
    return SpectrumSeries(pts);
}

}  // namespace

TEST(SpectraIo, BuiltinPatterns) {
    const auto wine = builtin_pattern("wine");
    ASSERT_EQ(wine.hypotheses(), 3u);
    ASSERT_EQ(wine.slots(), 4u);
    EXPECT_EQ(wine.labels()[2], "ethanal");
    EXPECT_DOUBLE_EQ(wine.kappa(0, 0), 0.9460);
    EXPECT_DOUBLE_EQ(wine.kappa(2, 3), 0.4165);
    EXPECT_DOUBLE_EQ(wine.kappa(1, 1), 0.6218);
    const auto drug = builtin_pattern("drug");
    EXPECT_EQ(drug.labels()[0], "phenyl salicylate");
    EXPECT_DOUBLE_EQ(drug.kappa(1, 2), 0.4002);
    EXPECT_DOUBLE_EQ(drug.kappa(2, 3), 0.8522);
    EXPECT_EQ(builtin_slot_centers("drug"), (std::vector<double>{500, 1000, 1500, 2000}));
    EXPECT_THROW(builtin_pattern("beer"), DomainError);
}

TEST(SpectraIo, PatternCsvRoundTrip) {
    Rng rng(3);
    std::vector<std::vector<double>> k(3, std::vector<double>(5));
    for (auto &row : k) {
        for (auto &v : row) {
            v = rng.uniform();
        }
    }
    k[0][0] = 0.0;
    k[1][4] = 1.0;
    const TransmissivityPattern p(k, {"a", "b b", "c"});
    std::stringstream buf;
    write_pattern_csv(buf, p);
    EXPECT_EQ(parse_pattern_csv(buf), p);

    const auto dir = std::filesystem::temp_directory_path() / "eaas_spectra_io_test";
    std::filesystem::create_directories(dir);
    save_pattern_csv(dir / "p.csv", builtin_pattern("wine"));
    EXPECT_EQ(load_pattern_csv(dir / "p.csv"), builtin_pattern("wine"));
    std::filesystem::remove_all(dir);
}

TEST(SpectraIo, PatternCsvErrors) {
    EXPECT_NO_THROW(pattern_from("slot,x,y\n0,0.5,0.7\n1,0.2,1\n"));
    expect_parse_error("slot,x,y\n0,0.5,1.2\n", 2, 3);
    expect_parse_error("slot,x\n0,0.5\n", 1, 0);
    expect_parse_error("slot,x,y\n0,0.5,0.7\n1,0.2\n", 3, 3);
    expect_parse_error("slot,x,y\n0,abc,0.7\n", 2, 2);
    expect_parse_error("", 1, 0);
    EXPECT_THROW(load_pattern_csv("/nonexistent/p.csv"), ParseError);
}

TEST(SpectraIo, SpectrumValidation) {
    EXPECT_THROW(SpectrumSeries({{1.0, 0.5}}), DomainError);
    EXPECT_THROW(SpectrumSeries({{1.0, 0.5}, {1.0, 0.6}}), DomainError);
    EXPECT_THROW(SpectrumSeries({{1.0, 0.5}, {2.0, 1.1}}), DomainError);
}

TEST(SpectraIo, PercentFilesAreScaled) {
    std::istringstream pct("wavenumber_cm1,transmissivity\n400,95\n500,40.5\n600,100\n");
    std::vector<std::string> warnings;
    const auto s = parse_spectrum_csv(pct, &warnings);
    EXPECT_EQ(warnings.size(), 1u);
    EXPECT_DOUBLE_EQ(s.points()[1].transmissivity, 0.405);
    std::istringstream frac("wavenumber_cm1,transmissivity\n400,0.95\n500,0.405\n");
    warnings.clear();
    EXPECT_DOUBLE_EQ(parse_spectrum_csv(frac, &warnings).points()[1].transmissivity, 0.405);
    EXPECT_TRUE(warnings.empty());
    std::istringstream over("wavenumber_cm1,transmissivity\n400,0.95\n500,1.2\n");
    EXPECT_THROW(parse_spectrum_csv(over), ParseError);
    std::istringstream huge("wavenumber_cm1,transmissivity\n400,95\n500,120\n");
    EXPECT_THROW(parse_spectrum_csv(huge), ParseError);
    std::istringstream neg("wavenumber_cm1,transmissivity\n400,0.5\n500,-0.1\n");
    EXPECT_THROW(parse_spectrum_csv(neg), ParseError);
}

TEST(SpectraIo, WindowMeansMatchClosedForms) {
    const SlotGrid grid{{800.0, 1200.0}, 100.0};
    const auto flat = discretize_spectrum(sampled(500, 1500, 7.3, [](double) { return 0.37; }), grid);
    EXPECT_NEAR(flat[0], 0.37, 1e-14);
    const auto ramp = discretize_spectrum(sampled(500, 1500, 13.0, [](double w) { return 0.1 + 5e-4 * w; }), grid);
    EXPECT_NEAR(ramp[0], 0.1 + 5e-4 * 800, 1e-12);
    EXPECT_NEAR(ramp[1], 0.1 + 5e-4 * 1200, 1e-12);

    // Lorentzian dip: mean = 1 - A g (atan((hi - w0)/g) - atan((lo - w0)/g)) / (hi - lo).
    const double a = 0.6, g = 20.0, w0 = 830.0;
    auto dip = [&](double w) { return 1.0 - a * g * g / ((w - w0) * (w - w0) + g * g); };
    const auto lor = discretize_spectrum(sampled(500, 1500, 0.05, dip), grid);
    for (std::size_t l = 0; l < 2; ++l) {
        const double lo = grid.centers[l] - 100, hi = grid.centers[l] + 100;
        const double exact = 1.0 - a * g * (std::atan((hi - w0) / g) - std::atan((lo - w0) / g)) / (hi - lo);
        EXPECT_NEAR(lor[l], exact, 1e-6);
    }
}

TEST(SpectraIo, RefinementOfTheInterpolantIsInvariant) {
    Rng rng(2);
    std::vector<SpectrumPoint> coarse;
    for (int i = 0; i <= 40; ++i) {
        coarse.push_back({400.0 + 50.0 * i + 20.0 * rng.uniform(), rng.uniform()});
    }
    std::vector<SpectrumPoint> fine;
    for (std::size_t i = 0; i + 1 < coarse.size(); ++i) {
        fine.push_back(coarse[i]);
        for (double t : {0.25, 0.5, 0.9}) {
            fine.push_back({coarse[i].wavenumber + t * (coarse[i + 1].wavenumber - coarse[i].wavenumber),
                            coarse[i].transmissivity + t * (coarse[i + 1].transmissivity - coarse[i].transmissivity)});
        }
    }
    fine.push_back(coarse.back());
    const SlotGrid grid{{600.0, 1013.0, 1700.0, 2200.0}, 75.0};
    const auto a = discretize_spectrum(SpectrumSeries(coarse), grid);
    const auto b = discretize_spectrum(SpectrumSeries(fine), grid);
    for (std::size_t l = 0; l < a.size(); ++l) {
        EXPECT_NEAR(a[l], b[l], 1e-12);
    }
}

TEST(SpectraIo, WindowsAreClippedToData) {
    const auto s = sampled(1000, 2000, 10.0, [](double w) { return 1e-3 * (w - 1000); });
    // [850, 1050] keeps [1000, 1050]: mean of the ramp over it.
    EXPECT_NEAR(discretize_spectrum(s, {{950.0}, 100.0})[0], 0.025, 1e-12);
    EXPECT_THROW(discretize_spectrum(s, {{700.0}, 100.0}), DomainError);
}

TEST(SpectraIo, PeakPatterns) {
    const auto p = kpeak_patterns(5, 2, 0.7, 0.95);
    ASSERT_EQ(p.hypotheses(), 10u);
    EXPECT_EQ(p.labels().front(), "peak@0+1");
    EXPECT_EQ(p.labels().back(), "peak@3+4");
    EXPECT_EQ(p.row(1), (std::vector<double>{0.7, 0.95, 0.7, 0.95, 0.95}));
    for (std::size_t h = 0; h < p.hypotheses(); ++h) {
        int absorbing = 0;
        for (double v : p.row(h)) {
            absorbing += v == 0.7 ? 1 : 0;
        }
        EXPECT_EQ(absorbing, 2);
    }
    EXPECT_EQ(kpeak_patterns(70, 2, 0.7, 0.95).hypotheses(), 2415u);
    EXPECT_EQ(kpeak_patterns(4, 1, 0.7, 0.95).labels()[3], "peak@3");
    EXPECT_THROW(kpeak_patterns(4, 0, 0.7, 0.95), DomainError);
    EXPECT_THROW(kpeak_patterns(4, 4, 0.7, 0.95), DomainError);
    EXPECT_THROW(kpeak_patterns(60, 30, 0.7, 0.95), ResourceError);
}
