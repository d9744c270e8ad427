#include "resp/signal.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numbers>
#include <sstream>

#include "resp/errors.hpp"

namespace resp {

namespace {

using cplx = std::complex<double>;

// One second-order section, a0 normalized to 1.
struct Biquad {
    double b0, b1, b2, a1, a2;
};

// Analog Butterworth prototype poles (left half-plane, unit cutoff).
std::vector<cplx> butter_prototype(int order) {
    std::vector<cplx> poles;
    poles.reserve(order);
    for (int k = 0; k < order; ++k) {
        double theta = std::numbers::pi * (2.0 * k + order + 1.0) / (2.0 * order);
        poles.emplace_back(std::cos(theta), std::sin(theta));
    }
    return poles;
}

cplx bilinear(cplx s, double fs2) { return (fs2 + s) / (fs2 - s); }

// Cascade response at digital angular frequency w.
double cascade_gain(const std::vector<Biquad>& sos, double w) {
    cplx z = std::polar(1.0, w);
    cplx zi = 1.0 / z;
    cplx h = 1.0;
    for (const auto& s : sos) {
        h *= (s.b0 + s.b1 * zi + s.b2 * zi * zi) / (1.0 + s.a1 * zi + s.a2 * zi * zi);
    }
    return std::abs(h);
}

// Low-pass of `order` poles, numerator sections [1,2,1] normalized to unit DC
// gain per section.
std::vector<Biquad> butter_lowpass(int order, double cutoff_hz, double fs) {
    if (order < 1) throw UsageError("butter_lowpass: order must be >= 1");
    if (!(cutoff_hz > 0.0 && cutoff_hz < fs / 2.0))
        throw DataError("butter_lowpass: cutoff outside (0, fs/2)");
    double fs2 = 2.0 * fs;
    double wc = fs2 * std::tan(std::numbers::pi * cutoff_hz / fs);

    auto proto = butter_prototype(order);
    std::vector<Biquad> sos;
    // Complex-conjugate pairs first (Im > 0 representative), then the real
    // pole for odd orders.
    for (const auto& p : proto) {
        if (p.imag() > 1e-12) {
            cplx zp = bilinear(p * wc, fs2);
            double a1 = -2.0 * zp.real();
            double a2 = std::norm(zp);
            double k = (1.0 + a1 + a2) / 4.0;
            sos.push_back({k, 2.0 * k, k, a1, a2});
        }
    }
    for (const auto& p : proto) {
        if (std::abs(p.imag()) <= 1e-12) {
            cplx zp = bilinear(p * wc, fs2);
            double a1 = -zp.real();
            double k = (1.0 + a1) / 2.0;
            sos.push_back({k, k, 0.0, a1, 0.0});
        }
    }
    return sos;
}

// Band-pass with `order` poles total (order/2 analog prototype order). Each
// section carries one zero at z=+1 and one at z=-1; the cascade is normalized
// to unit gain at the geometric center frequency.
std::vector<Biquad> butter_bandpass(int order, double lo_hz, double hi_hz, double fs) {
    if (order < 2 || order % 2 != 0)
        throw UsageError("butter_bandpass: order must be even and >= 2");
    if (!(lo_hz > 0.0 && lo_hz < hi_hz && hi_hz < fs / 2.0))
        throw DataError("butter_bandpass: band outside (0, fs/2)");
    int m = order / 2;
    double fs2 = 2.0 * fs;
    double wl = fs2 * std::tan(std::numbers::pi * lo_hz / fs);
    double wh = fs2 * std::tan(std::numbers::pi * hi_hz / fs);
    double w0 = std::sqrt(wl * wh);
    double bw = wh - wl;

    // Low-pass -> band-pass transform: each prototype pole p yields the two
    // roots of s^2 - bw*p*s + w0^2 = 0.
    std::vector<cplx> zpoles;
    for (const auto& p : butter_prototype(m)) {
        cplx bp = bw * p * 0.5;
        cplx d = std::sqrt(bp * bp - w0 * w0);
        zpoles.push_back(bilinear(bp + d, fs2));
        zpoles.push_back(bilinear(bp - d, fs2));
    }

    // Pair complex poles with their conjugates, real poles among themselves.
    std::vector<cplx> upper;
    std::vector<double> reals;
    for (const auto& zp : zpoles) {
        if (zp.imag() > 1e-12) upper.push_back(zp);
        else if (zp.imag() >= -1e-12) reals.push_back(zp.real());
    }
    std::sort(upper.begin(), upper.end(),
              [](const cplx& a, const cplx& b) { return a.real() < b.real(); });
    std::sort(reals.begin(), reals.end());

    std::vector<Biquad> sos;
    for (const auto& zp : upper)
        sos.push_back({1.0, 0.0, -1.0, -2.0 * zp.real(), std::norm(zp)});
    for (std::size_t i = 0; i + 1 < reals.size(); i += 2)
        sos.push_back({1.0, 0.0, -1.0, -(reals[i] + reals[i + 1]), reals[i] * reals[i + 1]});
    if (reals.size() % 2 != 0)
        throw NumericError("butter_bandpass: unpaired real pole");

    double wc = 2.0 * std::atan(w0 / fs2);
    double g = cascade_gain(sos, wc);
    if (!(g > 0.0) || !std::isfinite(g))
        throw NumericError("butter_bandpass: degenerate gain at center frequency");
    sos[0].b0 /= g;
    sos[0].b1 /= g;
    sos[0].b2 /= g;
    return sos;
}

// Steady-state (unit-step) initial state for one section, direct form II
// transposed. Scaled by the first sample before filtering.
void section_zi(const Biquad& s, double& zi1, double& zi2) {
    double den = 1.0 + s.a1 + s.a2;
    double g = (s.b0 + s.b1 + s.b2) / den;
    zi1 = (s.b1 + s.b2) - (s.a1 + s.a2) * g;
    zi2 = s.b2 - s.a2 * g;
}

void sosfilt_inplace(const std::vector<Biquad>& sos, std::vector<double>& x) {
    for (const auto& s : sos) {
        double zi1, zi2;
        section_zi(s, zi1, zi2);
        double s1 = zi1 * x[0];
        double s2 = zi2 * x[0];
        for (double& v : x) {
            double y = s.b0 * v + s1;
            s1 = s.b1 * v - s.a1 * y + s2;
            s2 = s.b2 * v - s.a2 * y;
            v = y;
        }
    }
}

// Zero-phase cascade application: odd-symmetric edge extension, forward pass,
// backward pass, trim.
std::vector<double> filtfilt(const std::vector<Biquad>& sos,
                             std::span<const double> x, std::size_t padlen) {
    std::size_t n = x.size();
    if (n == 0) return {};
    padlen = std::min(padlen, n - 1);

    std::vector<double> ext;
    ext.reserve(n + 2 * padlen);
    for (std::size_t i = 0; i < padlen; ++i)
        ext.push_back(2.0 * x[0] - x[padlen - i]);
    ext.insert(ext.end(), x.begin(), x.end());
    for (std::size_t i = 0; i < padlen; ++i)
        ext.push_back(2.0 * x[n - 1] - x[n - 2 - i]);

    sosfilt_inplace(sos, ext);
    std::reverse(ext.begin(), ext.end());
    sosfilt_inplace(sos, ext);
    std::reverse(ext.begin(), ext.end());

    return std::vector<double>(ext.begin() + padlen, ext.begin() + padlen + n);
}

std::size_t pad_for(double fs, double f_char) {
    double samples = 3.0 * fs / f_char;
    return static_cast<std::size_t>(std::min(samples, 1e7));
}

void check_finite(std::span<const double> x, const char* what) {
    for (double v : x)
        if (!std::isfinite(v)) throw DataError(std::string(what) + ": non-finite sample");
}

}  // namespace

void SampledSignal::validate() const {
    if (!(fs > 0.0)) throw DataError("SampledSignal: fs must be positive");
    if (data.size() != channels.size())
        throw DataError("SampledSignal: channel label/data count mismatch");
    for (const auto& ch : data)
        if (ch.size() != length())
            throw DataError("SampledSignal: channels have unequal length");
}

double mean(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
}

double population_variance(std::span<const double> x) {
    double m = mean(x);
    double s = 0.0;
    for (double v : x) s += (v - m) * (v - m);
    return s / static_cast<double>(x.size());
}

std::vector<double> znorm(std::span<const double> x) {
    if (x.empty()) throw DataError("znorm: empty input");
    double m = mean(x);
    double var = population_variance(x);
    std::vector<double> out(x.size());
    if (var < 1e-12) return out;  // degenerate guard: all zeros
    double inv = 1.0 / std::sqrt(var);
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = (x[i] - m) * inv;
    return out;
}

std::vector<double> interp_linear(std::span<const double> x, std::span<const double> pos) {
    std::vector<double> out(pos.size());
    double last = static_cast<double>(x.size()) - 1.0;
    for (std::size_t j = 0; j < pos.size(); ++j) {
        double p = std::clamp(pos[j], 0.0, last);
        std::size_t i0 = static_cast<std::size_t>(p);
        if (i0 >= x.size() - 1) {
            out[j] = x[x.size() - 1];
        } else {
            double frac = p - static_cast<double>(i0);
            out[j] = x[i0] + frac * (x[i0 + 1] - x[i0]);
        }
    }
    return out;
}

std::vector<double> lowpass_channel(std::span<const double> x, double fs,
                                    double cutoff_hz, int order) {
    check_finite(x, "lowpass");
    auto sos = butter_lowpass(order, cutoff_hz, fs);
    return filtfilt(sos, x, pad_for(fs, cutoff_hz));
}

std::vector<double> bandpass_channel(std::span<const double> x, double fs,
                                     double lo_hz, double hi_hz, int order) {
    check_finite(x, "bandpass");
    auto sos = butter_bandpass(order, lo_hz, hi_hz, fs);
    return filtfilt(sos, x, pad_for(fs, lo_hz));
}

SampledSignal bandpass(const SampledSignal& sig, double lo_hz, double hi_hz, int order) {
    sig.validate();
    SampledSignal out = sig;
    for (std::size_t c = 0; c < sig.data.size(); ++c)
        out.data[c] = bandpass_channel(sig.data[c], sig.fs, lo_hz, hi_hz, order);
    return out;
}

SampledSignal resample(const SampledSignal& sig, std::size_t target_len) {
    sig.validate();
    std::size_t n = sig.length();
    if (n == 0) throw DataError("resample: empty signal");
    if (target_len < 2) throw UsageError("resample: target_len must be >= 2");

    double new_fs = sig.fs * static_cast<double>(target_len) / static_cast<double>(n);
    std::vector<double> pos(target_len);
    for (std::size_t j = 0; j < target_len; ++j)
        pos[j] = static_cast<double>(j) * static_cast<double>(n) / static_cast<double>(target_len);

    SampledSignal out;
    out.channels = sig.channels;
    out.fs = new_fs;
    out.t0 = sig.t0;
    out.data.reserve(sig.data.size());
    for (const auto& ch : sig.data) {
        if (target_len < n) {
            auto filtered = lowpass_channel(ch, sig.fs, 0.45 * new_fs, 8);
            out.data.push_back(interp_linear(filtered, pos));
        } else {
            out.data.push_back(interp_linear(ch, pos));
        }
    }
    return out;
}

std::vector<Window> window_stream(const SampledSignal& sig, double win_s, double stride_s) {
    sig.validate();
    if (!(win_s > 0.0) || !(stride_s > 0.0))
        throw UsageError("window_stream: win_s and stride_s must be positive");

    std::size_t win_len = static_cast<std::size_t>(std::llround(win_s * sig.fs));
    std::size_t stride = static_cast<std::size_t>(std::llround(stride_s * sig.fs));
    if (win_len == 0 || stride == 0)
        throw UsageError("window_stream: window or stride shorter than one sample");

    std::vector<Window> out;
    std::size_t n = sig.length();
    if (n < win_len) return out;

    std::size_t count = (n - win_len) / stride + 1;
    out.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        Window w;
        w.fs = sig.fs;
        w.start_s = sig.t0 + static_cast<double>(k) * stride_s;
        w.length_s = win_s;
        w.data.reserve(sig.data.size());
        std::size_t off = k * stride;
        for (const auto& ch : sig.data)
            w.data.emplace_back(ch.begin() + off, ch.begin() + off + win_len);
        out.push_back(std::move(w));
    }
    return out;
}

// --- Serialization ----------------------------------------------------------

void write_csv(const SampledSignal& sig, const std::string& path) {
    sig.validate();
    std::ofstream f(path);
    if (!f) throw DataError("write_csv: cannot open " + path);
    f << "time";
    for (const auto& ch : sig.channels) f << ',' << ch;
    f << '\n';
    f.precision(17);
    std::size_t n = sig.length();
    for (std::size_t i = 0; i < n; ++i) {
        f << sig.t0 + static_cast<double>(i) / sig.fs;
        for (const auto& ch : sig.data) f << ',' << ch[i];
        f << '\n';
    }
    if (!f) throw DataError("write_csv: write failed for " + path);
}

SampledSignal read_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw DataError("read_csv: cannot open " + path);
    std::string line;
    if (!std::getline(f, line)) throw DataError("read_csv: empty file " + path);

    SampledSignal sig;
    {
        std::stringstream ss(line);
        std::string tok;
        if (!std::getline(ss, tok, ',') || tok != "time")
            throw DataError("read_csv: first column must be `time` in " + path);
        while (std::getline(ss, tok, ',')) sig.channels.push_back(tok);
    }
    if (sig.channels.empty()) throw DataError("read_csv: no channels in " + path);
    sig.data.resize(sig.channels.size());

    std::vector<double> times;
    std::size_t lineno = 1;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string tok;
        std::size_t col = 0;
        while (std::getline(ss, tok, ',')) {
            double v;
            try {
                v = std::stod(tok);
            } catch (const std::exception&) {
                throw DataError("read_csv: bad number at " + path + ":" + std::to_string(lineno));
            }
            if (col == 0) times.push_back(v);
            else if (col - 1 < sig.data.size()) sig.data[col - 1].push_back(v);
            else throw DataError("read_csv: too many columns at " + path + ":" + std::to_string(lineno));
            ++col;
        }
        if (col != sig.channels.size() + 1)
            throw DataError("read_csv: wrong column count at " + path + ":" + std::to_string(lineno));
    }
    if (times.size() < 2) throw DataError("read_csv: need at least 2 samples in " + path);

    double span = times.back() - times.front();
    if (!(span > 0.0)) throw DataError("read_csv: time not increasing in " + path);
    sig.fs = static_cast<double>(times.size() - 1) / span;
    sig.t0 = times.front();
    double step = 1.0 / sig.fs;
    for (std::size_t i = 1; i < times.size(); ++i) {
        double d = times[i] - times[i - 1];
        if (!(d > 0.0) || std::abs(d - step) > 1e-6 * std::max(1.0, step))
            throw DataError("read_csv: non-uniform time step at " + path + ":" +
                            std::to_string(i + 2));
    }
    sig.validate();
    return sig;
}

void write_rsp1(const SampledSignal& sig, const std::string& path) {
    sig.validate();
    std::ofstream f(path, std::ios::binary);
    if (!f) throw DataError("write_rsp1: cannot open " + path);
    f.write("RSP1", 4);
    std::uint32_t nch = static_cast<std::uint32_t>(sig.data.size());
    std::uint64_t len = sig.length();
    f.write(reinterpret_cast<const char*>(&nch), sizeof(nch));
    f.write(reinterpret_cast<const char*>(&sig.fs), sizeof(double));
    f.write(reinterpret_cast<const char*>(&len), sizeof(len));
    for (const auto& ch : sig.data)
        f.write(reinterpret_cast<const char*>(ch.data()),
                static_cast<std::streamsize>(ch.size() * sizeof(double)));
    if (!f) throw DataError("write_rsp1: write failed for " + path);
}

SampledSignal read_rsp1(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw DataError("read_rsp1: cannot open " + path);
    char magic[4];
    f.read(magic, 4);
    if (!f || std::memcmp(magic, "RSP1", 4) != 0)
        throw DataError("read_rsp1: bad magic in " + path);
    std::uint32_t nch = 0;
    std::uint64_t len = 0;
    SampledSignal sig;
    f.read(reinterpret_cast<char*>(&nch), sizeof(nch));
    f.read(reinterpret_cast<char*>(&sig.fs), sizeof(double));
    f.read(reinterpret_cast<char*>(&len), sizeof(len));
    if (!f) throw DataError("read_rsp1: truncated header in " + path);
    sig.data.resize(nch);
    for (std::uint32_t c = 0; c < nch; ++c) {
        sig.channels.push_back("ch" + std::to_string(c));
        sig.data[c].resize(len);
        f.read(reinterpret_cast<char*>(sig.data[c].data()),
               static_cast<std::streamsize>(len * sizeof(double)));
    }
    if (!f) throw DataError("read_rsp1: truncated data in " + path);
    sig.validate();
    return sig;
}

}  // namespace resp
