#include "resp/adr.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "resp/errors.hpp"

namespace resp {

// Cyclic Jacobi sweeps; a handful suffice for 3x3 symmetric input.
std::array<std::array<double, 3>, 3> pca_axes(const std::array<std::array<double, 3>, 3>& cov) {
    std::array<std::array<double, 3>, 3> a = cov;
    std::array<std::array<double, 3>, 3> v = {{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
    for (int sweep = 0; sweep < 32; ++sweep) {
        double off = std::abs(a[0][1]) + std::abs(a[0][2]) + std::abs(a[1][2]);
        if (off < 1e-15) break;
        for (int p = 0; p < 2; ++p) {
            for (int q = p + 1; q < 3; ++q) {
                if (std::abs(a[p][q]) < 1e-300) continue;
                double theta = 0.5 * std::atan2(2.0 * a[p][q], a[q][q] - a[p][p]);
                double c = std::cos(theta), s = std::sin(theta);
                for (int k = 0; k < 3; ++k) {
                    double akp = a[k][p], akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for (int k = 0; k < 3; ++k) {
                    double apk = a[p][k], aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for (int k = 0; k < 3; ++k) {
                    double vkp = v[k][p], vkq = v[k][q];
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }
    std::array<int, 3> order = {0, 1, 2};
    std::sort(order.begin(), order.end(), [&](int i, int j) { return a[i][i] > a[j][j]; });
    std::array<std::array<double, 3>, 3> out{};
    for (int r = 0; r < 3; ++r)
        for (int k = 0; k < 3; ++k) out[r][k] = v[k][order[r]];
    return out;
}

RespWave adr_extract(const SampledSignal& accel, const Window& win, const AdrParams& p) {
    accel.validate();
    if (accel.data.size() != 3) throw DataError("adr_extract: expected 3 accelerometer axes");
    if (accel.fs < 32.0) throw DataError("adr_extract: fs must be >= 32 Hz");

    std::size_t win_len = static_cast<std::size_t>(std::llround(win.length_s * accel.fs));
    auto start = static_cast<std::ptrdiff_t>(std::llround((win.start_s - accel.t0) * accel.fs));
    if (start < 0 || static_cast<std::size_t>(start) + win_len > accel.length())
        throw DataError("adr_extract: window outside signal extent");

    SampledSignal seg;
    seg.fs = accel.fs;
    seg.t0 = win.start_s;
    for (std::size_t c = 0; c < 3; ++c) {
        seg.channels.push_back(accel.channels.size() == 3 ? accel.channels[c]
                                                          : "axis" + std::to_string(c));
        auto filtered = p.prefiltered
                            ? accel.data[c]
                            : bandpass_channel(accel.data[c], accel.fs, p.band_lo_hz,
                                               p.band_hi_hz, p.band_order);
        seg.data.emplace_back(filtered.begin() + start, filtered.begin() + start +
                                                            static_cast<std::ptrdiff_t>(win_len));
    }
    auto rs = resample(seg, p.out_len);

    // Mean-center per axis, then covariance over the window.
    std::array<std::vector<double>, 3> xc;
    for (std::size_t c = 0; c < 3; ++c) {
        double m = mean(rs.data[c]);
        xc[c].resize(p.out_len);
        for (std::size_t t = 0; t < p.out_len; ++t) xc[c][t] = rs.data[c][t] - m;
    }
    std::array<std::array<double, 3>, 3> cov{};
    for (int a = 0; a < 3; ++a)
        for (int b = a; b < 3; ++b) {
            double s = 0.0;
            for (std::size_t t = 0; t < p.out_len; ++t) s += xc[a][t] * xc[b][t];
            cov[a][b] = cov[b][a] = s / static_cast<double>(p.out_len);
        }

    RespWave out;
    if (cov[0][0] + cov[1][1] + cov[2][2] < 1e-12) {
        out.samples.assign(p.out_len, 0.0);
        out.degenerate = true;
        return out;
    }

    auto v = pca_axes(cov)[0];
    std::vector<double> pc(p.out_len, 0.0);
    for (std::size_t t = 0; t < p.out_len; ++t)
        pc[t] = v[0] * xc[0][t] + v[1] * xc[1][t] + v[2] * xc[2][t];

    // Principal components are sign-ambiguous; align with the strongest axis.
    int strongest = 0;
    for (int a = 1; a < 3; ++a)
        if (cov[a][a] > cov[strongest][strongest]) strongest = a;
    double corr = 0.0;
    for (std::size_t t = 0; t < p.out_len; ++t) corr += pc[t] * xc[strongest][t];
    if (corr < 0.0)
        for (double& s : pc) s = -s;

    out.degenerate = population_variance(pc) < 1e-12;
    out.samples = out.degenerate ? std::vector<double>(p.out_len, 0.0) : znorm(pc);
    return out;
}

}  // namespace resp
