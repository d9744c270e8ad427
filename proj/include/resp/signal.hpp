#ifndef RESP_SIGNAL_HPP
#define RESP_SIGNAL_HPP

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace resp {

// Uniformly sampled multichannel waveform. All channels share length, fs and
// start time; this is the carrier for ECG, accelerometer axes and respiration.
struct SampledSignal {
    std::vector<std::string> channels;        // channel labels, in order
    std::vector<std::vector<double>> data;    // one sample vector per channel
    double fs = 0.0;                          // Hz, > 0
    double t0 = 0.0;                          // start time, seconds

    std::size_t length() const { return data.empty() ? 0 : data[0].size(); }
    double duration() const { return fs > 0 ? static_cast<double>(length()) / fs : 0.0; }
    bool empty() const { return length() == 0; }

    // Throws DataError when channel lengths disagree or fs <= 0.
    void validate() const;
};

// Targets attached to an analysis window: reference respiration at 4 Hz
// (128 samples, z-normalized) and reference average RR in breaths/min.
struct WindowTargets {
    std::vector<double> resp_wave;
    double avg_rr_bpm = 0.0;
};

// One fixed-length analysis segment per input channel.
struct Window {
    std::vector<std::vector<double>> data;    // per-channel segment at `fs`
    double fs = 0.0;
    double start_s = 0.0;
    double length_s = 32.0;
    std::optional<WindowTargets> targets;

    double end_s() const { return start_s + length_s; }
};

// --- Core DSP -------------------------------------------------------------

// Anti-alias low-pass (cutoff 0.45 x new fs, applied only when reducing the
// rate) followed by linear interpolation at the new sample times. Handles
// non-integer ratios such as 22400 -> 2048 uniformly.
SampledSignal resample(const SampledSignal& sig, std::size_t target_len);

// Zero-phase Butterworth band-pass: an `order`-pole recursive filter run
// forward then backward over each channel. `order` must be even (the
// band-pass sections come in pole pairs). Output length equals input length.
SampledSignal bandpass(const SampledSignal& sig, double lo_hz, double hi_hz, int order = 4);

// Single-channel variants used by extraction stages.
std::vector<double> bandpass_channel(std::span<const double> x, double fs,
                                     double lo_hz, double hi_hz, int order = 4);
std::vector<double> lowpass_channel(std::span<const double> x, double fs,
                                    double cutoff_hz, int order = 8);

// Linear interpolation of `x` at fractional index positions, clamped to the
// valid range.
std::vector<double> interp_linear(std::span<const double> x, std::span<const double> pos);

// Windows at starts t0, t0+stride, ...; count = floor((dur-win)/stride)+1
// when dur >= win, else empty.
std::vector<Window> window_stream(const SampledSignal& sig, double win_s = 32.0,
                                  double stride_s = 2.0);

// Mean 0, population variance 1; inputs with variance < 1e-12 map to all
// zeros so dead channels do not abort batch assembly.
std::vector<double> znorm(std::span<const double> x);

double mean(std::span<const double> x);
double population_variance(std::span<const double> x);

// --- Serialization ----------------------------------------------------------

// Columnar CSV: header `time,<ch1>,<ch2>,...`; time strictly increasing with
// uniform step 1/fs.
void write_csv(const SampledSignal& sig, const std::string& path);
SampledSignal read_csv(const std::string& path);

// Raw binary: magic `RSP1`, little-endian u32 channel count, f64 fs,
// u64 length, then channel-major 64-bit floats.
void write_rsp1(const SampledSignal& sig, const std::string& path);
SampledSignal read_rsp1(const std::string& path);

}  // namespace resp

#endif
