#ifndef RESP_WINDOWS_HPP
#define RESP_WINDOWS_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "resp/adr.hpp"
#include "resp/ecg.hpp"
#include "resp/signal.hpp"

namespace resp {

struct WindowMeta {
    std::string subject;
    std::string activity;
    double start_s = 0.0;
};

// Stacked fixed-length analysis windows with per-window targets; the training
// and evaluation currency. Values are held as doubles in memory and stored as
// 32-bit floats on disk.
struct WindowBatch {
    std::vector<std::string> channel_names;
    std::size_t count = 0;
    std::size_t channels = 0;
    std::size_t input_len = 0;
    std::size_t wave_len = 128;

    std::vector<double> inputs;          // count * channels * input_len
    std::vector<double> wave_targets;    // count * wave_len when present
    std::vector<double> rr_targets;      // count when present
    std::vector<double> flags;           // count * channels, 1 = degenerate channel
    std::vector<WindowMeta> meta;        // count entries

    bool has_wave_targets = false;
    bool has_rr_targets = false;

    std::span<const double> input_row(std::size_t i) const;
    std::span<const double> wave_row(std::size_t i) const;
    void validate() const;
};

// windows.bin: magic `RWN1`, u64 header length, JSON header (counts, channel
// names, shapes, per-window metadata), then little-endian 32-bit float blocks:
// inputs, waveform targets, scalar targets, flags.
void save_windows(const WindowBatch& batch, const std::string& path);
WindowBatch load_windows(const std::string& path);

// Row selection (used by train/test splitting).
WindowBatch subset(const WindowBatch& batch, std::span<const std::size_t> idx);

struct ActivitySegment {
    double start_s = 0.0;
    double end_s = 0.0;
    std::string label;
};

struct AssemblyOptions {
    double win_s = 32.0;
    double stride_s = 2.0;
    bool keep_degenerate = true;     // degenerate channels kept as zeros + flag
    bool raw_kind = false;           // raw 2048-sample inputs instead of 4 Hz surrogates
    std::size_t raw_len = 2048;
    EdrParams edr;
    AdrParams adr;
};

struct AssemblyReport {
    std::size_t windows_total = 0;       // candidate windows seen
    std::size_t excluded_beats = 0;      // too few beats for EDR
    std::size_t excluded_target = 0;     // missing or out-of-range RR target
    std::size_t degenerate_flagged = 0;  // windows with at least one flagged channel
};

// Majority activity label over [start, end); empty segments -> "all".
std::string majority_activity(std::span<const ActivitySegment> segments, double start_s,
                              double end_s);

// Raw-input channels for one window: ECG plus the first two accelerometer
// principal components, each resampled to `raw_len` and z-normalized.
std::vector<std::vector<double>> assemble_raw_channels(const SampledSignal& ecg,
                                                       const SampledSignal& accel,
                                                       const Window& win, std::size_t raw_len);

// Extraction chain for one subject. `resp_ref` (when present) provides the
// waveform target; `truth_breaths` (when present) provides the average-RR
// target, otherwise it falls back to counting on the reference waveform.
void append_subject_windows(WindowBatch& batch, const SampledSignal& ecg,
                            const SampledSignal& accel, const SampledSignal* resp_ref,
                            const std::vector<double>* truth_breaths,
                            const std::string& subject,
                            std::span<const ActivitySegment> activities,
                            const AssemblyOptions& opts, AssemblyReport& report);

}  // namespace resp

#endif
