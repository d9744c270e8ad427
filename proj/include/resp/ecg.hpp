#ifndef RESP_ECG_HPP
#define RESP_ECG_HPP

#include <span>
#include <string>
#include <vector>

#include "resp/signal.hpp"

namespace resp {

// R-peak times and the raw ECG amplitude at each peak.
struct RPeakSeries {
    std::vector<double> times_s;      // strictly increasing
    std::vector<double> amplitudes;
    double source_fs = 0.0;
};

struct DetectorParams {
    double band_lo_hz = 5.0;      // QRS energy band
    double band_hi_hz = 15.0;
    double integrate_s = 0.150;   // moving-window integration width
    double refractory_s = 0.250;
    double refine_s = 0.050;      // raw-ECG argmax radius around the fiducial
    double learn_s = 2.0;         // threshold initialization span
};

// Band-pass -> differentiate -> square -> moving-window integrate -> adaptive
// threshold, then each fiducial is refined to the argmax of the raw ECG
// within +-refine_s. Throws DataError on flat or non-finite input.
RPeakSeries detect_r_peaks(const SampledSignal& ecg, const DetectorParams& params = {});

// A 128-sample 4 Hz respiration surrogate; `degenerate` marks waveforms that
// hit the flat-variance guard and were zeroed.
struct RespWave {
    std::vector<double> samples;
    bool degenerate = false;
};

struct EdrParams {
    double out_fs = 4.0;
    std::size_t out_len = 128;
    double band_lo_hz = 0.1;
    double band_hi_hz = 0.7;
    int band_order = 4;
    std::size_t min_peaks = 4;
};

// R-R interval tachogram (gap plotted at the later peak time), cubic-spline
// interpolated onto the window's uniform 4 Hz grid, band-passed and
// z-normalized. Throws InsufficientBeats when fewer than min_peaks fall
// inside the window.
RespWave edr_rrint(const RPeakSeries& peaks, const Window& win, const EdrParams& params = {});

// Same pipeline over the R-peak amplitude sequence.
RespWave edr_ramp(const RPeakSeries& peaks, const Window& win, const EdrParams& params = {});

// Natural cubic spline through (xs, ys), held constant outside [xs.front(),
// xs.back()]. xs must be strictly increasing with >= 2 knots.
std::vector<double> natural_spline_eval(std::span<const double> xs, std::span<const double> ys,
                                        std::span<const double> query);

// CSV `time_s,amplitude`.
void write_rpeak_csv(const RPeakSeries& peaks, const std::string& path);
RPeakSeries read_rpeak_csv(const std::string& path);

}  // namespace resp

#endif
