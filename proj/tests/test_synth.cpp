#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "resp/breath.hpp"
#include "resp/errors.hpp"
#include "resp/synth.hpp"
#include "test_util.hpp"

using namespace resp;

TEST_CASE("constant profiles give the expected tone and beat count") {
    SynthConfig cfg;
    cfg.duration_s = 64.0;
    cfg.rr_profile = {{0.0, 15.0}};
    cfg.hr_profile = {{0.0, 60.0}};
    cfg.seed = 1;
    auto gen = generate(cfg);

    CHECK(gen.ecg.fs == 700.0);
    CHECK(gen.accel.data.size() == 3);
    CHECK(gen.resp_ref.length() == static_cast<std::size_t>(64 * 700));

    // respiration tone at 0.25 Hz (use a 4 Hz decimation for the DFT oracle)
    std::vector<double> dec;
    for (std::size_t i = 0; i < gen.resp_ref.length(); i += 175) dec.push_back(gen.resp_ref.data[0][i]);
    double f = testutil::dominant_frequency(dec, 4.0);
    CHECK(std::abs(f - 0.25) <= testutil::freq_bin_width(dec.size(), 4.0) + 1e-12);

    CHECK(std::abs(static_cast<int>(gen.truth.beat_times_s.size()) - 64) <= 1);
    // breath peaks 4 s apart
    const auto& bp = gen.truth.breath_peak_times_s;
    REQUIRE(bp.size() >= 15);
    for (std::size_t i = 1; i < bp.size(); ++i)
        CHECK(bp[i] - bp[i - 1] == doctest::Approx(4.0).epsilon(1e-6));
}

TEST_CASE("same seed gives bit-identical signals") {
    SynthConfig cfg;
    cfg.seed = 42;
    auto a = generate(cfg);
    auto b = generate(cfg);
    for (std::size_t i = 0; i < a.ecg.length(); ++i)
        CHECK(a.ecg.data[0][i] == b.ecg.data[0][i]);
    for (std::size_t c = 0; c < 3; ++c)
        for (std::size_t i = 0; i < a.accel.length(); ++i)
            CHECK(a.accel.data[c][i] == b.accel.data[c][i]);
}

TEST_CASE("profile ranges are enforced") {
    SynthConfig cfg;
    cfg.rr_profile = {{0.0, 3.0}};  // below 6 BrPM
    CHECK_THROWS_AS(generate(cfg), DataError);
    SynthConfig cfg2;
    cfg2.hr_profile = {{0.0, 220.0}};
    CHECK_THROWS_AS(generate(cfg2), DataError);
    SynthConfig cfg3;
    cfg3.duration_s = 30.0;
    CHECK_THROWS_AS(generate(cfg3), DataError);
}

TEST_CASE("make_dataset assembles labelled windows") {
    std::vector<SynthConfig> cfgs;
    for (int s = 0; s < 3; ++s) {
        SynthConfig cfg;
        cfg.id = "s" + std::to_string(s);
        cfg.duration_s = 128.0;
        cfg.rr_profile = {{0.0, 12.0 + 3.0 * s}};
        cfg.hr_profile = {{0.0, 60.0 + 5.0 * s}};
        cfg.seed = 100 + static_cast<std::uint64_t>(s);
        cfgs.push_back(cfg);
    }
    AssemblyReport rep;
    auto batch = make_dataset(cfgs, &rep);

    CHECK(batch.count == 3 * 49);
    CHECK(batch.channels == 3);
    CHECK(batch.input_len == 128);
    CHECK(batch.channel_names == std::vector<std::string>{"edr_rrint", "edr_ramp", "adr"});
    CHECK(batch.has_wave_targets);
    CHECK(batch.has_rr_targets);
    for (double v : batch.inputs) CHECK(std::isfinite(v));
    for (double v : batch.rr_targets) {
        CHECK(v > 0.0);
        CHECK(v < 100.0);
    }
}

TEST_CASE("targets come from truth peaks and counting agrees on most windows") {
    std::vector<SynthConfig> cfgs;
    SynthConfig cfg;
    cfg.id = "s0";
    cfg.duration_s = 160.0;
    cfg.rr_profile = {{0.0, 12.0}, {160.0, 20.0}};
    cfg.seed = 7;
    cfgs.push_back(cfg);
    auto batch = make_dataset(cfgs);
    REQUIRE(batch.count > 0);

    std::size_t ok = 0;
    for (std::size_t i = 0; i < batch.count; ++i) {
        auto wave = batch.wave_row(i);
        CountingParams cp;
        cp.t0 = batch.meta[i].start_s;
        auto ann = count_breaths(wave, cp);
        if (ann.avg_rr_bpm && std::abs(*ann.avg_rr_bpm - batch.rr_targets[i]) <= 0.5) ++ok;
    }
    CHECK(static_cast<double>(ok) >= 0.95 * static_cast<double>(batch.count));
}

TEST_CASE("zero modulation depths degenerate the EDR channels") {
    std::vector<SynthConfig> cfgs;
    SynthConfig cfg;
    cfg.id = "s0";
    cfg.duration_s = 64.0;
    cfg.rsa_depth_ms = 0.0;
    cfg.ramp_mod_pct = 0.0;
    cfg.activity_noise_sigma = 0.0;
    cfg.seed = 3;
    cfgs.push_back(cfg);
    AssemblyReport rep;
    auto batch = make_dataset(cfgs, &rep);
    REQUIRE(batch.count > 0);
    // EDR channels flagged degenerate on every window
    for (std::size_t i = 0; i < batch.count; ++i) {
        CHECK(batch.flags[i * 3 + 0] == 1.0);
        CHECK(batch.flags[i * 3 + 1] == 1.0);
    }
    CHECK(rep.degenerate_flagged == batch.count);
}

TEST_CASE("truth json round trip") {
    SynthTruth t;
    t.beat_times_s = {0.5, 1.4, 2.2};
    t.breath_peak_times_s = {1.0, 5.0};
    std::string path = "test_truth.json";
    write_truth_json(t, path);
    auto back = read_truth_json(path);
    CHECK(back.beat_times_s == t.beat_times_s);
    CHECK(back.breath_peak_times_s == t.breath_peak_times_s);
    std::remove(path.c_str());
}

TEST_CASE("synth config json parsing") {
    auto cfgs = parse_synth_configs(R"({
        "subjects": [
            {"id": "a", "duration_s": 96, "rr_profile": 14, "hr_profile": [[0, 60], [96, 80]], "seed": 9},
            {"id": "b", "activity": "walking"}
        ]
    })");
    REQUIRE(cfgs.size() == 2);
    CHECK(cfgs[0].id == "a");
    CHECK(cfgs[0].duration_s == 96.0);
    CHECK(cfgs[0].rr_profile.size() == 1);
    CHECK(cfgs[0].hr_profile.size() == 2);
    CHECK(cfgs[1].activity == "walking");
    CHECK_THROWS_AS(parse_synth_configs("{nope"), DataError);
}
