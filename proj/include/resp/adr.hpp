#ifndef RESP_ADR_HPP
#define RESP_ADR_HPP

#include <array>

#include "resp/ecg.hpp"
#include "resp/signal.hpp"

namespace resp {

// Eigenvectors of a symmetric 3x3 matrix as rows, sorted by descending
// eigenvalue. Deterministic for identical inputs.
std::array<std::array<double, 3>, 3> pca_axes(const std::array<std::array<double, 3>, 3>& cov);

struct AdrParams {
    double band_lo_hz = 0.1;
    double band_hi_hz = 1.0;
    int band_order = 4;
    double out_fs = 4.0;
    std::size_t out_len = 128;
    bool prefiltered = false;   // set when the caller already band-passed the axes
};

// Accelerometer-derived respiration: per-axis band-pass, resample window to
// 4 Hz, first principal component over the 3 axes (sign fixed so correlation
// with the largest-variance axis is non-negative), z-normalized. Flat windows
// yield zeros with the degenerate flag set.
RespWave adr_extract(const SampledSignal& accel, const Window& win, const AdrParams& params = {});

}  // namespace resp

#endif
