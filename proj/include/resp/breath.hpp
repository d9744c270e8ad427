#ifndef RESP_BREATH_HPP
#define RESP_BREATH_HPP

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace resp {

// Detected breath peaks in one window plus derived rates.
struct BreathAnnotation {
    std::vector<double> peak_times_s;    // strictly increasing
    std::vector<double> inst_rr_bpm;     // validity-filtered, one per kept interval
    std::optional<double> avg_rr_bpm;    // present iff >= 2 peaks
    int n_rejected = 0;                  // intervals dropped by the validity band
};

struct CountingParams {
    double fs = 4.0;                 // waveform sampling rate
    double t0 = 0.0;                 // time of sample 0
    double quartile_factor = 0.3;    // validity threshold = factor * Q3 of extrema distances
    double inst_lo_bpm = 2.0;        // exclusive validity band for instantaneous RR
    double inst_hi_bpm = 90.0;
};

// Advanced counting: local extrema -> strict max/min alternation -> iterative
// rejection of cycles whose vertical extent falls below 0.3 x Q3 of all
// extrema distances -> surviving maxima are breath peaks. Peak times are
// refined by 3-point parabolic interpolation. Flat input yields an empty
// annotation.
BreathAnnotation count_breaths(std::span<const double> resp, const CountingParams& p = {});

// 60 * (n_peaks - 1) / (t_last - t_first). Throws DataError for < 2 peaks.
double avg_rr(const BreathAnnotation& ann);

// 60 / gap for each adjacent pair, values outside the validity band dropped.
// Empty for < 2 peaks. `n_rejected`, when given, receives the drop count.
std::vector<double> inst_rr(const BreathAnnotation& ann, const CountingParams& p = {},
                            int* n_rejected = nullptr);

// CSV `peak_time_s` plus a summary JSON with inst/avg RR.
void write_breath_csv(const BreathAnnotation& ann, const std::string& path);
std::string breath_summary_json(const BreathAnnotation& ann);

}  // namespace resp

#endif
