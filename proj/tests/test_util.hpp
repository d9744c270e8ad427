#ifndef RESP_TEST_UTIL_HPP
#define RESP_TEST_UTIL_HPP

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <span>
#include <vector>

// Test-only oracles, independent of the library's processing path.
namespace testutil {

// Single-bin discrete Fourier magnitude: amplitude of the component at f_hz.
inline double dft_amplitude(std::span<const double> x, double fs, double f_hz) {
    std::complex<double> acc(0.0, 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) {
        double ang = -2.0 * std::numbers::pi * f_hz * static_cast<double>(i) / fs;
        acc += x[i] * std::complex<double>(std::cos(ang), std::sin(ang));
    }
    return 2.0 * std::abs(acc) / static_cast<double>(x.size());
}

// Frequency of the largest non-DC bin of a plain O(n^2) DFT.
inline double dominant_frequency(std::span<const double> x, double fs) {
    std::size_t n = x.size();
    double best_mag = -1.0;
    std::size_t best_k = 1;
    for (std::size_t k = 1; k <= n / 2; ++k) {
        std::complex<double> acc(0.0, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            double ang = -2.0 * std::numbers::pi * static_cast<double>(k * i) / static_cast<double>(n);
            acc += x[i] * std::complex<double>(std::cos(ang), std::sin(ang));
        }
        double mag = std::abs(acc);
        if (mag > best_mag) {
            best_mag = mag;
            best_k = k;
        }
    }
    return static_cast<double>(best_k) * fs / static_cast<double>(n);
}

inline double freq_bin_width(std::size_t n, double fs) { return fs / static_cast<double>(n); }

inline std::vector<double> sine(double freq_hz, double fs, std::size_t n, double amp = 1.0,
                                double phase = 0.0) {
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i)
        out[i] = amp * std::sin(2.0 * std::numbers::pi * freq_hz * static_cast<double>(i) / fs + phase);
    return out;
}

inline double correlation(std::span<const double> a, std::span<const double> b) {
    std::size_t n = std::min(a.size(), b.size());
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= static_cast<double>(n);
    mb /= static_cast<double>(n);
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

}  // namespace testutil

#endif
