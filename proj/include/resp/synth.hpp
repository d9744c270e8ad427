#ifndef RESP_SYNTH_HPP
#define RESP_SYNTH_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "resp/signal.hpp"
#include "resp/windows.hpp"

namespace resp {

struct ProfilePoint {
    double t_s;
    double value;
};

// Generator settings for one synthetic subject. Profiles are piecewise
// linear over time and clamped outside their knot range.
struct SynthConfig {
    std::string id = "synth";
    std::string activity = "sitting";
    double duration_s = 64.0;
    double fs = 700.0;
    std::vector<ProfilePoint> rr_profile = {{0.0, 15.0}};    // breaths/min, 6..40
    std::vector<ProfilePoint> hr_profile = {{0.0, 60.0}};    // beats/min, 40..180
    double rsa_depth_ms = 100.0;      // R-R interval modulation amplitude
    double ramp_mod_pct = 15.0;       // R-amplitude modulation depth
    double tilt_amp = 0.05;           // respiration-coupled tilt, in g
    double activity_noise_sigma = 0.01;
    std::uint64_t seed = 1;
};

struct SynthTruth {
    std::vector<double> beat_times_s;
    std::vector<double> breath_peak_times_s;
};

struct SynthResult {
    SampledSignal ecg;        // 1 channel
    SampledSignal accel;      // 3 channels
    SampledSignal resp_ref;   // 1 channel, unit-amplitude respiration
    SynthTruth truth;
};

// Respiration is a phase-integrated sinusoid following rr_profile; beats are
// spaced 60/hr minus the RSA term; the ECG is a train of Mexican-hat QRS
// pulses with respiration-modulated amplitude plus baseline wander and white
// noise; the accelerometer is gravity plus respiration-coupled tilt along a
// fixed random direction plus activity noise. Truth lists exact beat and
// breath-peak times.
SynthResult generate(const SynthConfig& cfg);

// Runs the full extraction chain on generated subjects and assembles
// [EDR-RRint, EDR-Ramp, ADR] windows with reference-respiration and true
// average-RR targets.
WindowBatch make_dataset(const std::vector<SynthConfig>& cfgs, AssemblyReport* report = nullptr);

void write_truth_json(const SynthTruth& truth, const std::string& path);
SynthTruth read_truth_json(const std::string& path);

// Config JSON: either one subject object or {"subjects": [...]}; profile
// fields accept a constant or [[t, value], ...].
std::vector<SynthConfig> parse_synth_configs(const std::string& json_text);

}  // namespace resp

#endif
