#include "resp/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include <json.hpp>

#include "resp/errors.hpp"

namespace resp {

namespace {

double profile_at(const std::vector<ProfilePoint>& pts, double t) {
    if (pts.empty()) throw UsageError("synth: empty profile");
    if (t <= pts.front().t_s) return pts.front().value;
    if (t >= pts.back().t_s) return pts.back().value;
    for (std::size_t i = 1; i < pts.size(); ++i) {
        if (t <= pts[i].t_s) {
            double f = (t - pts[i - 1].t_s) / (pts[i].t_s - pts[i - 1].t_s);
            return pts[i - 1].value + f * (pts[i].value - pts[i - 1].value);
        }
    }
    return pts.back().value;
}

void check_profile(const std::vector<ProfilePoint>& pts, double lo, double hi, const char* name) {
    for (const auto& p : pts)
        if (!(p.value >= lo && p.value <= hi))
            throw DataError(std::string("synth: ") + name + " profile outside [" +
                            std::to_string(lo) + ", " + std::to_string(hi) + "]");
    for (std::size_t i = 1; i < pts.size(); ++i)
        if (!(pts[i].t_s > pts[i - 1].t_s))
            throw DataError(std::string("synth: ") + name + " profile knots must increase");
}

// Mexican-hat QRS template, ~80 ms wide; adequate for peak timing, no
// morphological fidelity claimed.
double ricker(double u, double sigma) {
    double r = u / sigma;
    return (1.0 - r * r) * std::exp(-0.5 * r * r);
}

}  // namespace

SynthResult generate(const SynthConfig& cfg) {
    if (cfg.duration_s < 64.0) throw DataError("synth: duration must be >= 64 s");
    if (!(cfg.fs > 0.0)) throw DataError("synth: fs must be positive");
    check_profile(cfg.rr_profile, 6.0, 40.0, "rr");
    check_profile(cfg.hr_profile, 40.0, 180.0, "hr");

    std::size_t n = static_cast<std::size_t>(std::llround(cfg.duration_s * cfg.fs));
    double dt = 1.0 / cfg.fs;
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> uni(0.0, 1.0);

    // Respiration: phase-integrated sinusoid so RR varies smoothly in-window.
    std::vector<double> phase(n), respv(n);
    double ph = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        phase[i] = ph;
        respv[i] = std::sin(2.0 * std::numbers::pi * ph);
        ph += profile_at(cfg.rr_profile, static_cast<double>(i) * dt) / 60.0 * dt;
    }

    SynthTruth truth;
    // sin peaks where the phase crosses k + 1/4.
    double next_peak = 0.25;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        while (phase[i] < next_peak && phase[i + 1] >= next_peak) {
            double f = (next_peak - phase[i]) / (phase[i + 1] - phase[i]);
            truth.breath_peak_times_s.push_back((static_cast<double>(i) + f) * dt);
            next_peak += 1.0;
        }
    }

    auto resp_at = [&](double t) {
        double idx = std::clamp(t / dt, 0.0, static_cast<double>(n - 1));
        std::size_t i0 = static_cast<std::size_t>(idx);
        if (i0 + 1 >= n) return respv[n - 1];
        double f = idx - static_cast<double>(i0);
        return respv[i0] + f * (respv[i0 + 1] - respv[i0]);
    };

    // Beats: interval = 60/hr - rsa * resp(t), never below 250 ms.
    double rsa_s = cfg.rsa_depth_ms / 1000.0;
    double t = 0.3;
    while (t < cfg.duration_s) {
        truth.beat_times_s.push_back(t);
        double interval = 60.0 / profile_at(cfg.hr_profile, t) - rsa_s * resp_at(t);
        t += std::max(interval, 0.25);
    }

    // ECG: QRS pulses with respiration-modulated amplitude, baseline wander,
    // white noise.
    std::vector<double> ecg(n, 0.0);
    double qrs_sigma = 0.02;
    double wander_phase = uni(rng) * 2.0 * std::numbers::pi;
    for (double tb : truth.beat_times_s) {
        double amp = 1.0 + cfg.ramp_mod_pct / 100.0 * resp_at(tb);
        auto lo = static_cast<std::ptrdiff_t>(std::floor((tb - 4.0 * qrs_sigma) / dt));
        auto hi = static_cast<std::ptrdiff_t>(std::ceil((tb + 4.0 * qrs_sigma) / dt));
        for (std::ptrdiff_t i = std::max<std::ptrdiff_t>(0, lo);
             i <= std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(n) - 1, hi); ++i)
            ecg[static_cast<std::size_t>(i)] += amp * ricker(static_cast<double>(i) * dt - tb, qrs_sigma);
    }
    for (std::size_t i = 0; i < n; ++i) {
        double ti = static_cast<double>(i) * dt;
        ecg[i] += 0.05 * std::sin(2.0 * std::numbers::pi * 0.05 * ti + wander_phase);
        ecg[i] += cfg.activity_noise_sigma * gauss(rng);
    }

    // Accelerometer: gravity + respiration-coupled tilt along a fixed random
    // unit vector + activity noise.
    std::array<double, 3> tilt_dir{};
    {
        double norm = 0.0;
        do {
            for (auto& d : tilt_dir) d = gauss(rng);
            norm = std::sqrt(tilt_dir[0] * tilt_dir[0] + tilt_dir[1] * tilt_dir[1] +
                             tilt_dir[2] * tilt_dir[2]);
        } while (norm < 1e-6);
        for (auto& d : tilt_dir) d /= norm;
    }
    const std::array<double, 3> gravity = {0.05, -0.10, 0.99};
    SampledSignal accel;
    accel.fs = cfg.fs;
    accel.channels = {"acc_x", "acc_y", "acc_z"};
    accel.data.assign(3, std::vector<double>(n, 0.0));
    for (std::size_t c = 0; c < 3; ++c)
        for (std::size_t i = 0; i < n; ++i)
            accel.data[c][i] = gravity[c] + cfg.tilt_amp * respv[i] * tilt_dir[c] +
                               cfg.activity_noise_sigma * gauss(rng);

    SynthResult out;
    out.ecg.fs = cfg.fs;
    out.ecg.channels = {"ecg"};
    out.ecg.data.push_back(std::move(ecg));
    out.accel = std::move(accel);
    out.resp_ref.fs = cfg.fs;
    out.resp_ref.channels = {"resp"};
    out.resp_ref.data.push_back(std::move(respv));
    out.truth = std::move(truth);
    return out;
}

WindowBatch make_dataset(const std::vector<SynthConfig>& cfgs, AssemblyReport* report) {
    WindowBatch batch;
    AssemblyReport rep;
    AssemblyOptions opts;
    for (const auto& cfg : cfgs) {
        auto gen = generate(cfg);
        std::vector<ActivitySegment> segs = {{0.0, cfg.duration_s, cfg.activity}};
        append_subject_windows(batch, gen.ecg, gen.accel, &gen.resp_ref,
                               &gen.truth.breath_peak_times_s, cfg.id, segs, opts, rep);
    }
    if (report) *report = rep;
    batch.validate();
    return batch;
}

void write_truth_json(const SynthTruth& truth, const std::string& path) {
    nlohmann::json j;
    j["beat_times_s"] = truth.beat_times_s;
    j["breath_peak_times_s"] = truth.breath_peak_times_s;
    std::ofstream f(path);
    if (!f) throw DataError("write_truth_json: cannot open " + path);
    f << j.dump(2) << '\n';
}

SynthTruth read_truth_json(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw DataError("read_truth_json: cannot open " + path);
    nlohmann::json j;
    try {
        f >> j;
        SynthTruth t;
        t.beat_times_s = j.at("beat_times_s").get<std::vector<double>>();
        t.breath_peak_times_s = j.at("breath_peak_times_s").get<std::vector<double>>();
        return t;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("read_truth_json: bad JSON in " + path + ": " + e.what());
    }
}

namespace {

std::vector<ProfilePoint> parse_profile(const nlohmann::json& j) {
    std::vector<ProfilePoint> out;
    if (j.is_number()) {
        out.push_back({0.0, j.get<double>()});
    } else if (j.is_array()) {
        for (const auto& p : j) {
            if (!p.is_array() || p.size() != 2)
                throw DataError("synth config: profile entries must be [t, value]");
            out.push_back({p[0].get<double>(), p[1].get<double>()});
        }
    } else {
        throw DataError("synth config: profile must be a number or [[t, value], ...]");
    }
    return out;
}

SynthConfig parse_one(const nlohmann::json& j) {
    SynthConfig cfg;
    if (j.contains("id")) cfg.id = j.at("id").get<std::string>();
    if (j.contains("activity")) cfg.activity = j.at("activity").get<std::string>();
    if (j.contains("duration_s")) cfg.duration_s = j.at("duration_s").get<double>();
    if (j.contains("fs")) cfg.fs = j.at("fs").get<double>();
    if (j.contains("rr_profile")) cfg.rr_profile = parse_profile(j.at("rr_profile"));
    if (j.contains("hr_profile")) cfg.hr_profile = parse_profile(j.at("hr_profile"));
    if (j.contains("rsa_depth_ms")) cfg.rsa_depth_ms = j.at("rsa_depth_ms").get<double>();
    if (j.contains("ramp_mod_pct")) cfg.ramp_mod_pct = j.at("ramp_mod_pct").get<double>();
    if (j.contains("tilt_amp")) cfg.tilt_amp = j.at("tilt_amp").get<double>();
    if (j.contains("activity_noise_sigma"))
        cfg.activity_noise_sigma = j.at("activity_noise_sigma").get<double>();
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    return cfg;
}

}  // namespace

std::vector<SynthConfig> parse_synth_configs(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("synth config: bad JSON: ") + e.what());
    }
    try {
        std::vector<SynthConfig> out;
        if (j.contains("subjects")) {
            for (const auto& s : j.at("subjects")) out.push_back(parse_one(s));
        } else {
            out.push_back(parse_one(j));
        }
        return out;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("synth config: ") + e.what());
    }
}

}  // namespace resp
