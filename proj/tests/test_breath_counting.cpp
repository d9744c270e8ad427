#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "resp/breath.hpp"
#include "resp/errors.hpp"
#include "test_util.hpp"

using namespace resp;

namespace {

// 128 samples at 4 Hz quantized to a 2^-20 grid so that offset/scale
// invariance can be checked bit-exactly.
std::vector<double> quantized_sine(double f_hz) {
    auto x = testutil::sine(f_hz, 4.0, 128);
    for (auto& v : x) v = std::round(v * 1048576.0) / 1048576.0;
    return x;
}

}  // namespace

TEST_CASE("0.25 Hz sine over 32 s gives 8 peaks at 15 BrPM") {
    auto x = testutil::sine(0.25, 4.0, 128);
    auto ann = count_breaths(x);
    CHECK(ann.peak_times_s.size() == 8);
    REQUIRE(ann.avg_rr_bpm.has_value());
    CHECK(*ann.avg_rr_bpm == doctest::Approx(15.0).epsilon(0.5 / 15.0));
    // analytic peak times 1, 5, ..., 29 s
    for (std::size_t k = 0; k < ann.peak_times_s.size(); ++k)
        CHECK(ann.peak_times_s[k] == doctest::Approx(1.0 + 4.0 * static_cast<double>(k)).epsilon(0.02));
}

TEST_CASE("constant waveform yields empty annotation") {
    std::vector<double> flat(128, 0.7);
    auto ann = count_breaths(flat);
    CHECK(ann.peak_times_s.empty());
    CHECK(!ann.avg_rr_bpm.has_value());
    CHECK(ann.inst_rr_bpm.empty());
}

TEST_CASE("small ripple cycles are rejected by the quartile threshold") {
    std::vector<double> x(128);
    for (std::size_t i = 0; i < 128; ++i) {
        double t = static_cast<double>(i) / 4.0;
        x[i] = std::sin(2.0 * std::numbers::pi * 0.25 * t) +
               0.02 * std::sin(2.0 * std::numbers::pi * 1.5 * t);
    }
    auto ann = count_breaths(x);
    CHECK(ann.peak_times_s.size() == 8);
}

TEST_CASE("avg_rr formula") {
    BreathAnnotation ann;
    for (int k = 0; k < 8; ++k) ann.peak_times_s.push_back(4.0 * k);
    CHECK(avg_rr(ann) == doctest::Approx(15.0));

    BreathAnnotation two;
    two.peak_times_s = {0.0, 3.0};
    CHECK(avg_rr(two) == doctest::Approx(20.0));

    BreathAnnotation one;
    one.peak_times_s = {1.0};
    CHECK_THROWS_AS(avg_rr(one), DataError);
}

TEST_CASE("inst_rr formula and validity band") {
    BreathAnnotation ann;
    ann.peak_times_s = {0.0, 4.0, 8.0};
    auto rr = inst_rr(ann);
    REQUIRE(rr.size() == 2);
    CHECK(rr[0] == doctest::Approx(15.0));
    CHECK(rr[1] == doctest::Approx(15.0));

    BreathAnnotation mixed;
    mixed.peak_times_s = {0.0, 2.0, 6.0};
    auto rr2 = inst_rr(mixed);
    REQUIRE(rr2.size() == 2);
    CHECK(rr2[0] == doctest::Approx(30.0));
    CHECK(rr2[1] == doctest::Approx(15.0));

    BreathAnnotation one;
    one.peak_times_s = {2.0};
    CHECK(inst_rr(one).empty());

    // a 0.5 s gap means 120 BrPM, outside (2, 90)
    BreathAnnotation fast;
    fast.peak_times_s = {0.0, 0.5, 4.5};
    int rejected = 0;
    auto rr3 = inst_rr(fast, {}, &rejected);
    CHECK(rr3.size() == 1);
    CHECK(rejected == 1);
}

TEST_CASE("amplitude scaling by a power of two is bit-exact") {
    auto x = quantized_sine(0.3);
    auto scaled = x;
    for (auto& v : scaled) v *= 4.0;
    auto a = count_breaths(x);
    auto b = count_breaths(scaled);
    REQUIRE(a.peak_times_s.size() == b.peak_times_s.size());
    for (std::size_t i = 0; i < a.peak_times_s.size(); ++i)
        CHECK(a.peak_times_s[i] == b.peak_times_s[i]);
}

TEST_CASE("constant offset never changes the annotation") {
    auto x = quantized_sine(0.2);
    auto shifted = x;
    for (auto& v : shifted) v += 1.0;
    auto a = count_breaths(x);
    auto b = count_breaths(shifted);
    REQUIRE(a.peak_times_s.size() == b.peak_times_s.size());
    for (std::size_t i = 0; i < a.peak_times_s.size(); ++i)
        CHECK(a.peak_times_s[i] == b.peak_times_s[i]);
}

TEST_CASE("pure sinusoids recover 60f within 0.5 BrPM") {
    for (double f = 0.1; f <= 0.61; f += 0.05) {
        auto x = testutil::sine(f, 4.0, 128);
        auto ann = count_breaths(x);
        if (ann.peak_times_s.size() < 2) continue;
        REQUIRE(ann.avg_rr_bpm.has_value());
        CHECK(std::abs(*ann.avg_rr_bpm - 60.0 * f) < 0.5);
    }
}

TEST_CASE("avg lies between min and max instantaneous RR") {
    std::vector<double> x(128);
    for (std::size_t i = 0; i < 128; ++i) {
        double t = static_cast<double>(i) / 4.0;
        // chirp between ~0.2 and ~0.3 Hz
        x[i] = std::sin(2.0 * std::numbers::pi * (0.2 * t + 0.05 * t * t / 32.0));
    }
    auto ann = count_breaths(x);
    REQUIRE(ann.peak_times_s.size() >= 3);
    REQUIRE(!ann.inst_rr_bpm.empty());
    double lo = *std::min_element(ann.inst_rr_bpm.begin(), ann.inst_rr_bpm.end());
    double hi = *std::max_element(ann.inst_rr_bpm.begin(), ann.inst_rr_bpm.end());
    CHECK(*ann.avg_rr_bpm >= lo - 1e-9);
    CHECK(*ann.avg_rr_bpm <= hi + 1e-9);
}

TEST_CASE("non-finite samples are rejected") {
    std::vector<double> x(128, 0.0);
    x[3] = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(count_breaths(x), DataError);
}

TEST_CASE("summary json carries peaks and rates") {
    auto ann = count_breaths(testutil::sine(0.25, 4.0, 128));
    auto j = breath_summary_json(ann);
    CHECK(j.find("avg_rr_bpm") != std::string::npos);
    CHECK(j.find("inst_rr_bpm") != std::string::npos);
}
