#include "resp/windows.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>

#include <json.hpp>

#include "resp/breath.hpp"
#include "resp/errors.hpp"

namespace resp {

std::span<const double> WindowBatch::input_row(std::size_t i) const {
    return {inputs.data() + i * channels * input_len, channels * input_len};
}

std::span<const double> WindowBatch::wave_row(std::size_t i) const {
    return {wave_targets.data() + i * wave_len, wave_len};
}

void WindowBatch::validate() const {
    if (channel_names.size() != channels)
        throw DataError("WindowBatch: channel name count mismatch");
    if (inputs.size() != count * channels * input_len)
        throw DataError("WindowBatch: input block size mismatch");
    if (has_wave_targets && wave_targets.size() != count * wave_len)
        throw DataError("WindowBatch: wave target block size mismatch");
    if (has_rr_targets && rr_targets.size() != count)
        throw DataError("WindowBatch: rr target block size mismatch");
    if (flags.size() != count * channels)
        throw DataError("WindowBatch: flag block size mismatch");
    if (meta.size() != count) throw DataError("WindowBatch: metadata count mismatch");
}

namespace {

void write_f32_block(std::ofstream& f, std::span<const double> values) {
    std::vector<float> tmp(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) tmp[i] = static_cast<float>(values[i]);
    f.write(reinterpret_cast<const char*>(tmp.data()),
            static_cast<std::streamsize>(tmp.size() * sizeof(float)));
}

std::vector<double> read_f32_block(std::ifstream& f, std::size_t n, const std::string& path) {
    std::vector<float> tmp(n);
    f.read(reinterpret_cast<char*>(tmp.data()), static_cast<std::streamsize>(n * sizeof(float)));
    if (!f) throw DataError("load_windows: truncated block in " + path);
    return std::vector<double>(tmp.begin(), tmp.end());
}

}  // namespace

void save_windows(const WindowBatch& batch, const std::string& path) {
    batch.validate();
    nlohmann::json h;
    h["format"] = 1;
    h["count"] = batch.count;
    h["channels"] = batch.channel_names;
    h["input_len"] = batch.input_len;
    h["wave_len"] = batch.wave_len;
    h["has_wave_targets"] = batch.has_wave_targets;
    h["has_rr_targets"] = batch.has_rr_targets;
    nlohmann::json subjects = nlohmann::json::array();
    nlohmann::json activities = nlohmann::json::array();
    nlohmann::json starts = nlohmann::json::array();
    for (const auto& m : batch.meta) {
        subjects.push_back(m.subject);
        activities.push_back(m.activity);
        starts.push_back(m.start_s);
    }
    h["subjects"] = std::move(subjects);
    h["activities"] = std::move(activities);
    h["starts"] = std::move(starts);

    std::string header = h.dump();
    std::ofstream f(path, std::ios::binary);
    if (!f) throw DataError("save_windows: cannot open " + path);
    f.write("RWN1", 4);
    std::uint64_t hlen = header.size();
    f.write(reinterpret_cast<const char*>(&hlen), sizeof(hlen));
    f.write(header.data(), static_cast<std::streamsize>(header.size()));
    write_f32_block(f, batch.inputs);
    if (batch.has_wave_targets) write_f32_block(f, batch.wave_targets);
    if (batch.has_rr_targets) write_f32_block(f, batch.rr_targets);
    write_f32_block(f, batch.flags);
    if (!f) throw DataError("save_windows: write failed for " + path);
}

WindowBatch load_windows(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw DataError("load_windows: cannot open " + path);
    char magic[4];
    f.read(magic, 4);
    if (!f || std::memcmp(magic, "RWN1", 4) != 0)
        throw DataError("load_windows: bad magic in " + path);
    std::uint64_t hlen = 0;
    f.read(reinterpret_cast<char*>(&hlen), sizeof(hlen));
    if (!f || hlen > (1ull << 32)) throw DataError("load_windows: bad header length in " + path);
    std::string header(hlen, '\0');
    f.read(header.data(), static_cast<std::streamsize>(hlen));
    if (!f) throw DataError("load_windows: truncated header in " + path);

    nlohmann::json h;
    try {
        h = nlohmann::json::parse(header);
    } catch (const nlohmann::json::exception& e) {
        throw DataError("load_windows: bad JSON header in " + path + ": " + e.what());
    }

    WindowBatch b;
    try {
        b.count = h.at("count").get<std::size_t>();
        b.channel_names = h.at("channels").get<std::vector<std::string>>();
        b.channels = b.channel_names.size();
        b.input_len = h.at("input_len").get<std::size_t>();
        b.wave_len = h.at("wave_len").get<std::size_t>();
        b.has_wave_targets = h.at("has_wave_targets").get<bool>();
        b.has_rr_targets = h.at("has_rr_targets").get<bool>();
        auto subjects = h.at("subjects").get<std::vector<std::string>>();
        auto activities = h.at("activities").get<std::vector<std::string>>();
        auto starts = h.at("starts").get<std::vector<double>>();
        if (subjects.size() != b.count || activities.size() != b.count || starts.size() != b.count)
            throw DataError("load_windows: metadata length mismatch in " + path);
        for (std::size_t i = 0; i < b.count; ++i)
            b.meta.push_back({subjects[i], activities[i], starts[i]});
    } catch (const nlohmann::json::exception& e) {
        throw DataError("load_windows: header field error in " + path + ": " + e.what());
    }

    b.inputs = read_f32_block(f, b.count * b.channels * b.input_len, path);
    if (b.has_wave_targets) b.wave_targets = read_f32_block(f, b.count * b.wave_len, path);
    if (b.has_rr_targets) b.rr_targets = read_f32_block(f, b.count, path);
    b.flags = read_f32_block(f, b.count * b.channels, path);
    b.validate();
    return b;
}

WindowBatch subset(const WindowBatch& batch, std::span<const std::size_t> idx) {
    batch.validate();
    WindowBatch out;
    out.channel_names = batch.channel_names;
    out.channels = batch.channels;
    out.input_len = batch.input_len;
    out.wave_len = batch.wave_len;
    out.has_wave_targets = batch.has_wave_targets;
    out.has_rr_targets = batch.has_rr_targets;
    out.count = idx.size();
    for (std::size_t i : idx) {
        if (i >= batch.count) throw UsageError("subset: index out of range");
        auto in = batch.input_row(i);
        out.inputs.insert(out.inputs.end(), in.begin(), in.end());
        if (batch.has_wave_targets) {
            auto w = batch.wave_row(i);
            out.wave_targets.insert(out.wave_targets.end(), w.begin(), w.end());
        }
        if (batch.has_rr_targets) out.rr_targets.push_back(batch.rr_targets[i]);
        out.flags.insert(out.flags.end(), batch.flags.begin() + static_cast<std::ptrdiff_t>(i * batch.channels),
                         batch.flags.begin() + static_cast<std::ptrdiff_t>((i + 1) * batch.channels));
        out.meta.push_back(batch.meta[i]);
    }
    return out;
}

std::string majority_activity(std::span<const ActivitySegment> segments, double start_s,
                              double end_s) {
    if (segments.empty()) return "all";
    std::map<std::string, double> overlap;
    for (const auto& seg : segments) {
        double o = std::min(end_s, seg.end_s) - std::max(start_s, seg.start_s);
        if (o > 0.0) overlap[seg.label] += o;
    }
    if (overlap.empty()) return "all";
    auto best = overlap.begin();
    for (auto it = overlap.begin(); it != overlap.end(); ++it)
        if (it->second > best->second) best = it;
    return best->first;
}

namespace {

// True average RR over [start, end) from reference breath-peak times.
std::optional<double> rr_from_truth(const std::vector<double>& breaths, double start_s,
                                    double end_s) {
    std::vector<double> in;
    for (double t : breaths)
        if (t >= start_s && t < end_s) in.push_back(t);
    if (in.size() < 2) return std::nullopt;
    return 60.0 * static_cast<double>(in.size() - 1) / (in.back() - in.front());
}

std::vector<double> znorm_resampled(const SampledSignal& sig, std::size_t ch, double start_s,
                                    double win_s, std::size_t out_len) {
    std::size_t win_len = static_cast<std::size_t>(std::llround(win_s * sig.fs));
    auto i0 = static_cast<std::ptrdiff_t>(std::llround((start_s - sig.t0) * sig.fs));
    if (i0 < 0 || static_cast<std::size_t>(i0) + win_len > sig.length())
        throw DataError("window outside signal extent");
    SampledSignal seg;
    seg.fs = sig.fs;
    seg.t0 = start_s;
    seg.channels = {"seg"};
    seg.data.emplace_back(sig.data[ch].begin() + i0,
                          sig.data[ch].begin() + i0 + static_cast<std::ptrdiff_t>(win_len));
    auto rs = resample(seg, out_len);
    return znorm(rs.data[0]);
}

}  // namespace

std::vector<std::vector<double>> assemble_raw_channels(const SampledSignal& ecg,
                                                       const SampledSignal& accel,
                                                       const Window& win, std::size_t raw_len) {
    std::vector<std::vector<double>> out;
    out.push_back(znorm_resampled(ecg, 0, win.start_s, win.length_s, raw_len));

    std::size_t win_len = static_cast<std::size_t>(std::llround(win.length_s * accel.fs));
    auto i0 = static_cast<std::ptrdiff_t>(std::llround((win.start_s - accel.t0) * accel.fs));
    if (i0 < 0 || static_cast<std::size_t>(i0) + win_len > accel.length())
        throw DataError("assemble_raw_channels: window outside accelerometer extent");

    std::array<std::vector<double>, 3> xc;
    for (std::size_t c = 0; c < 3; ++c) {
        xc[c].assign(accel.data[c].begin() + i0,
                     accel.data[c].begin() + i0 + static_cast<std::ptrdiff_t>(win_len));
        double m = mean(xc[c]);
        for (double& v : xc[c]) v -= m;
    }
    std::array<std::array<double, 3>, 3> cov{};
    for (int a = 0; a < 3; ++a)
        for (int b = a; b < 3; ++b) {
            double s = 0.0;
            for (std::size_t t = 0; t < win_len; ++t) s += xc[a][t] * xc[b][t];
            cov[a][b] = cov[b][a] = s / static_cast<double>(win_len);
        }
    auto axes = pca_axes(cov);
    for (int pc = 0; pc < 2; ++pc) {
        SampledSignal proj;
        proj.fs = accel.fs;
        proj.t0 = win.start_s;
        proj.channels = {"pc"};
        proj.data.emplace_back(win_len, 0.0);
        for (std::size_t t = 0; t < win_len; ++t)
            proj.data[0][t] = axes[pc][0] * xc[0][t] + axes[pc][1] * xc[1][t] +
                              axes[pc][2] * xc[2][t];
        auto rs = resample(proj, raw_len);
        out.push_back(znorm(rs.data[0]));
    }
    return out;
}

void append_subject_windows(WindowBatch& batch, const SampledSignal& ecg,
                            const SampledSignal& accel, const SampledSignal* resp_ref,
                            const std::vector<double>* truth_breaths,
                            const std::string& subject,
                            std::span<const ActivitySegment> activities,
                            const AssemblyOptions& opts, AssemblyReport& report) {
    ecg.validate();
    accel.validate();

    if (batch.count == 0 && batch.channel_names.empty()) {
        batch.channel_names = opts.raw_kind
                                  ? std::vector<std::string>{"ecg", "acc_pc1", "acc_pc2"}
                                  : std::vector<std::string>{"edr_rrint", "edr_ramp", "adr"};
        batch.channels = 3;
        batch.input_len = opts.raw_kind ? opts.raw_len : opts.edr.out_len;
        batch.has_wave_targets = resp_ref != nullptr;
        batch.has_rr_targets = resp_ref != nullptr || truth_breaths != nullptr;
    }
    if (batch.has_wave_targets && resp_ref == nullptr)
        throw DataError("append_subject_windows: subject " + subject + " lacks reference respiration");

    double duration = std::min(ecg.duration(), accel.duration());
    if (resp_ref) duration = std::min(duration, resp_ref->duration());

    RPeakSeries peaks;
    SampledSignal accel_filt;
    if (!opts.raw_kind) {
        peaks = detect_r_peaks(ecg);
        accel_filt = bandpass(accel, opts.adr.band_lo_hz, opts.adr.band_hi_hz, opts.adr.band_order);
    }

    std::size_t n_windows = 0;
    if (duration >= opts.win_s)
        n_windows = static_cast<std::size_t>((duration - opts.win_s) / opts.stride_s) + 1;

    AdrParams adr_p = opts.adr;
    adr_p.prefiltered = true;

    for (std::size_t k = 0; k < n_windows; ++k) {
        ++report.windows_total;
        Window win;
        win.fs = opts.raw_kind ? ecg.fs : opts.edr.out_fs;
        win.start_s = ecg.t0 + static_cast<double>(k) * opts.stride_s;
        win.length_s = opts.win_s;

        std::vector<std::vector<double>> chans;
        std::vector<double> chan_flags(3, 0.0);
        try {
            if (opts.raw_kind) {
                chans = assemble_raw_channels(ecg, accel, win, opts.raw_len);
            } else {
                auto e1 = edr_rrint(peaks, win, opts.edr);
                auto e2 = edr_ramp(peaks, win, opts.edr);
                auto a3 = adr_extract(accel_filt, win, adr_p);
                chan_flags = {e1.degenerate ? 1.0 : 0.0, e2.degenerate ? 1.0 : 0.0,
                              a3.degenerate ? 1.0 : 0.0};
                chans = {std::move(e1.samples), std::move(e2.samples), std::move(a3.samples)};
            }
        } catch (const InsufficientBeats&) {
            ++report.excluded_beats;
            continue;
        }

        bool any_degenerate = chan_flags[0] + chan_flags[1] + chan_flags[2] > 0.0;
        if (any_degenerate) {
            ++report.degenerate_flagged;
            if (!opts.keep_degenerate) continue;
        }

        std::vector<double> wave_target;
        std::optional<double> rr_target;
        if (resp_ref) {
            wave_target = znorm_resampled(*resp_ref, 0, win.start_s, opts.win_s, batch.wave_len);
            if (!truth_breaths) {
                CountingParams cp;
                cp.t0 = win.start_s;
                auto ann = count_breaths(wave_target, cp);
                if (ann.avg_rr_bpm) rr_target = *ann.avg_rr_bpm;
            }
        }
        if (truth_breaths) rr_target = rr_from_truth(*truth_breaths, win.start_s, win.end_s());

        if (batch.has_rr_targets) {
            if (!rr_target || !(*rr_target > 0.0 && *rr_target < 100.0)) {
                ++report.excluded_target;
                continue;
            }
        }

        for (const auto& ch : chans) batch.inputs.insert(batch.inputs.end(), ch.begin(), ch.end());
        if (batch.has_wave_targets)
            batch.wave_targets.insert(batch.wave_targets.end(), wave_target.begin(), wave_target.end());
        if (batch.has_rr_targets) batch.rr_targets.push_back(*rr_target);
        batch.flags.insert(batch.flags.end(), chan_flags.begin(), chan_flags.end());
        batch.meta.push_back({subject, majority_activity(activities, win.start_s, win.end_s()),
                              win.start_s});
        ++batch.count;
    }
}

}  // namespace resp
