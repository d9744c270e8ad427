#include "resp/ecg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "resp/errors.hpp"

namespace resp {

namespace {

// Pan-Tompkins five-point derivative; two samples of group delay.
std::vector<double> pt_derivative(const std::vector<double>& x) {
    std::vector<double> d(x.size(), 0.0);
    for (std::size_t i = 4; i < x.size(); ++i)
        d[i] = (2.0 * x[i] + x[i - 1] - x[i - 3] - 2.0 * x[i - 4]) / 8.0;
    return d;
}

std::vector<double> moving_mean(const std::vector<double>& x, std::size_t w) {
    std::vector<double> out(x.size(), 0.0);
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        acc += x[i];
        if (i >= w) acc -= x[i - w];
        out[i] = acc / static_cast<double>(std::min(i + 1, w));
    }
    return out;
}

struct Candidate {
    std::size_t idx;
    double value;
};

std::vector<Candidate> local_maxima(const std::vector<double>& x) {
    std::vector<Candidate> out;
    for (std::size_t i = 1; i + 1 < x.size(); ++i)
        if (x[i] > x[i - 1] && x[i] >= x[i + 1]) out.push_back({i, x[i]});
    return out;
}

}  // namespace

RPeakSeries detect_r_peaks(const SampledSignal& ecg, const DetectorParams& p) {
    ecg.validate();
    if (ecg.data.size() != 1) throw DataError("detect_r_peaks: expected a single ECG channel");
    if (ecg.fs < 100.0) throw DataError("detect_r_peaks: fs must be >= 100 Hz");
    if (ecg.duration() < 5.0) throw DataError("detect_r_peaks: need >= 5 s of signal");

    const auto& raw = ecg.data[0];
    double lo = raw[0], hi = raw[0];
    for (double v : raw) {
        if (!std::isfinite(v)) throw DataError("detect_r_peaks: non-finite sample");
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (hi - lo < 1e-12) throw DataError("detect_r_peaks: flat signal, no QRS energy");

    double fs = ecg.fs;
    auto filtered = bandpass_channel(raw, fs, p.band_lo_hz, p.band_hi_hz, 4);
    auto deriv = pt_derivative(filtered);
    for (double& v : deriv) v *= v;
    std::size_t mwi_w = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(p.integrate_s * fs)));
    auto mwi = moving_mean(deriv, mwi_w);

    // Detector group delay: derivative (2) plus half the integration window.
    std::ptrdiff_t delay = 2 + static_cast<std::ptrdiff_t>((mwi_w - 1) / 2);

    auto candidates = local_maxima(mwi);
    if (candidates.empty()) throw DataError("detect_r_peaks: no QRS energy");

    // Threshold initialization over the learning span.
    std::size_t learn_n = std::min(mwi.size(), static_cast<std::size_t>(p.learn_s * fs));
    double spki = 0.0, npki = 0.0;
    for (std::size_t i = 0; i < learn_n; ++i) {
        spki = std::max(spki, mwi[i]);
        npki += mwi[i];
    }
    npki = 0.5 * npki / static_cast<double>(learn_n);

    std::size_t refractory = static_cast<std::size_t>(std::llround(p.refractory_s * fs));
    std::vector<std::size_t> fiducials;
    std::vector<double> gaps;                 // accepted inter-peak gaps, samples
    std::size_t last_unaccepted_scan = 0;     // searchback window start in `candidates`

    auto accept = [&](std::size_t ci, bool searchback) {
        const auto& c = candidates[ci];
        if (!fiducials.empty()) {
            gaps.push_back(static_cast<double>(c.idx - fiducials.back()));
            if (gaps.size() > 8) gaps.erase(gaps.begin());
        }
        fiducials.push_back(c.idx);
        double w = searchback ? 0.25 : 0.125;
        spki = w * c.value + (1.0 - w) * spki;
        last_unaccepted_scan = ci + 1;
    };

    for (std::size_t ci = 0; ci < candidates.size(); ++ci) {
        const auto& c = candidates[ci];
        double threshold = npki + 0.25 * (spki - npki);
        if (!fiducials.empty() && c.idx - fiducials.back() < refractory) continue;

        if (c.value >= threshold) {
            accept(ci, false);
            continue;
        }
        npki = 0.125 * c.value + 0.875 * npki;

        // Searchback: when no beat appeared for 1.66x the recent average gap,
        // take the strongest skipped candidate above half threshold.
        if (!gaps.empty() && !fiducials.empty()) {
            double avg_gap = 0.0;
            for (double g : gaps) avg_gap += g;
            avg_gap /= static_cast<double>(gaps.size());
            if (static_cast<double>(c.idx - fiducials.back()) > 1.66 * avg_gap) {
                std::size_t best = ci + 1;
                for (std::size_t k = std::max(last_unaccepted_scan, std::size_t{0}); k <= ci; ++k) {
                    if (candidates[k].idx <= fiducials.back() + refractory) continue;
                    if (candidates[k].value >= 0.5 * threshold &&
                        (best > ci || candidates[k].value > candidates[best].value))
                        best = k;
                }
                if (best <= ci) accept(best, true);
            }
        }
    }
    if (fiducials.empty()) throw DataError("detect_r_peaks: no beats above threshold");

    // Refine each fiducial to the raw-ECG argmax within +-refine_s.
    std::ptrdiff_t radius = static_cast<std::ptrdiff_t>(std::llround(p.refine_s * fs));
    std::vector<std::size_t> peak_idx;
    for (std::size_t f : fiducials) {
        std::ptrdiff_t center = static_cast<std::ptrdiff_t>(f) - delay;
        std::ptrdiff_t a = std::max<std::ptrdiff_t>(0, center - radius);
        std::ptrdiff_t b = std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(raw.size()) - 1,
                                                    center + radius);
        if (a > b) continue;
        std::ptrdiff_t best = a;
        for (std::ptrdiff_t i = a + 1; i <= b; ++i)
            if (raw[i] > raw[best]) best = i;
        peak_idx.push_back(static_cast<std::size_t>(best));
    }
    std::sort(peak_idx.begin(), peak_idx.end());
    peak_idx.erase(std::unique(peak_idx.begin(), peak_idx.end()), peak_idx.end());

    // Cleaning: closer than the refractory gap, keep the taller peak.
    bool changed = true;
    while (changed && peak_idx.size() > 1) {
        changed = false;
        for (std::size_t i = 0; i + 1 < peak_idx.size(); ++i) {
            if (peak_idx[i + 1] - peak_idx[i] < refractory) {
                std::size_t drop = raw[peak_idx[i]] < raw[peak_idx[i + 1]] ? i : i + 1;
                peak_idx.erase(peak_idx.begin() + static_cast<std::ptrdiff_t>(drop));
                changed = true;
                break;
            }
        }
    }

    RPeakSeries out;
    out.source_fs = fs;
    for (std::size_t i : peak_idx) {
        out.times_s.push_back(ecg.t0 + static_cast<double>(i) / fs);
        out.amplitudes.push_back(raw[i]);
    }
    return out;
}

// --- EDR --------------------------------------------------------------------

std::vector<double> natural_spline_eval(std::span<const double> xs, std::span<const double> ys,
                                        std::span<const double> query) {
    std::size_t n = xs.size();
    if (n < 2 || ys.size() != n) throw UsageError("natural_spline_eval: need >= 2 knots");
    for (std::size_t i = 1; i < n; ++i)
        if (!(xs[i] > xs[i - 1])) throw DataError("natural_spline_eval: knots must increase");

    // Second derivatives from the natural-spline tridiagonal system.
    std::vector<double> m(n, 0.0);
    if (n > 2) {
        std::vector<double> a(n, 0.0), b(n, 0.0), c(n, 0.0), r(n, 0.0);
        for (std::size_t i = 1; i + 1 < n; ++i) {
            double h0 = xs[i] - xs[i - 1];
            double h1 = xs[i + 1] - xs[i];
            a[i] = h0;
            b[i] = 2.0 * (h0 + h1);
            c[i] = h1;
            r[i] = 6.0 * ((ys[i + 1] - ys[i]) / h1 - (ys[i] - ys[i - 1]) / h0);
        }
        // Thomas algorithm on rows 1..n-2.
        for (std::size_t i = 2; i + 1 < n; ++i) {
            double f = a[i] / b[i - 1];
            b[i] -= f * c[i - 1];
            r[i] -= f * r[i - 1];
        }
        for (std::size_t i = n - 2; i >= 1; --i) {
            m[i] = (r[i] - c[i] * (i + 2 < n ? m[i + 1] : 0.0)) / b[i];
            if (i == 1) break;
        }
    }

    std::vector<double> out(query.size());
    for (std::size_t q = 0; q < query.size(); ++q) {
        double x = query[q];
        if (x <= xs[0]) {
            out[q] = ys[0];    // clamped at window edges
            continue;
        }
        if (x >= xs[n - 1]) {
            out[q] = ys[n - 1];
            continue;
        }
        std::size_t hi = static_cast<std::size_t>(
            std::upper_bound(xs.begin(), xs.end(), x) - xs.begin());
        std::size_t lo = hi - 1;
        double h = xs[hi] - xs[lo];
        double t = (xs[hi] - x) / h;
        double u = (x - xs[lo]) / h;
        out[q] = t * ys[lo] + u * ys[hi] +
                 ((t * t * t - t) * m[lo] + (u * u * u - u) * m[hi]) * h * h / 6.0;
    }
    return out;
}

namespace {

RespWave edr_common(const RPeakSeries& peaks, const Window& win, const EdrParams& p,
                    bool use_amplitudes) {
    // Peaks inside [start, end).
    std::vector<double> t_in, a_in;
    for (std::size_t i = 0; i < peaks.times_s.size(); ++i) {
        double t = peaks.times_s[i];
        if (t >= win.start_s && t < win.end_s()) {
            t_in.push_back(t);
            a_in.push_back(peaks.amplitudes[i]);
        }
    }
    if (t_in.size() < p.min_peaks)
        throw InsufficientBeats("edr: fewer than " + std::to_string(p.min_peaks) +
                                " beats in window at " + std::to_string(win.start_s) + " s");

    std::vector<double> xs, ys;
    if (use_amplitudes) {
        xs = t_in;
        ys = a_in;
    } else {
        // Tachogram: gap duration plotted at each later peak time.
        for (std::size_t i = 1; i < t_in.size(); ++i) {
            xs.push_back(t_in[i]);
            ys.push_back(t_in[i] - t_in[i - 1]);
        }
    }

    std::vector<double> grid(p.out_len);
    for (std::size_t k = 0; k < p.out_len; ++k)
        grid[k] = win.start_s + static_cast<double>(k) / p.out_fs;

    auto interp = natural_spline_eval(xs, ys, grid);
    auto filtered = bandpass_channel(interp, p.out_fs, p.band_lo_hz, p.band_hi_hz, p.band_order);

    RespWave out;
    out.degenerate = population_variance(filtered) < 1e-12;
    out.samples = out.degenerate ? std::vector<double>(p.out_len, 0.0) : znorm(filtered);
    return out;
}

}  // namespace

RespWave edr_rrint(const RPeakSeries& peaks, const Window& win, const EdrParams& p) {
    return edr_common(peaks, win, p, false);
}

RespWave edr_ramp(const RPeakSeries& peaks, const Window& win, const EdrParams& p) {
    return edr_common(peaks, win, p, true);
}

void write_rpeak_csv(const RPeakSeries& peaks, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw DataError("write_rpeak_csv: cannot open " + path);
    f << "time_s,amplitude\n";
    f.precision(17);
    for (std::size_t i = 0; i < peaks.times_s.size(); ++i)
        f << peaks.times_s[i] << ',' << peaks.amplitudes[i] << '\n';
}

RPeakSeries read_rpeak_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw DataError("read_rpeak_csv: cannot open " + path);
    std::string line;
    if (!std::getline(f, line) || line != "time_s,amplitude")
        throw DataError("read_rpeak_csv: bad header in " + path);
    RPeakSeries out;
    std::size_t lineno = 1;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string t, a;
        if (!std::getline(ss, t, ',') || !std::getline(ss, a, ','))
            throw DataError("read_rpeak_csv: bad row at " + path + ":" + std::to_string(lineno));
        try {
            out.times_s.push_back(std::stod(t));
            out.amplitudes.push_back(std::stod(a));
        } catch (const std::exception&) {
            throw DataError("read_rpeak_csv: bad number at " + path + ":" + std::to_string(lineno));
        }
    }
    return out;
}

}  // namespace resp
