#include "resp/breath.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "resp/errors.hpp"

namespace resp {

namespace {

struct Extremum {
    std::size_t idx;    // sample index (plateau center)
    double value;
    bool is_max;
};

// Strict local extrema of the run-compressed series; plateaus contribute one
// extremum at their center sample.
std::vector<Extremum> find_extrema(std::span<const double> x) {
    std::vector<std::size_t> run_start;
    for (std::size_t i = 0; i < x.size(); ++i)
        if (i == 0 || x[i] != x[i - 1]) run_start.push_back(i);

    std::vector<Extremum> out;
    for (std::size_t j = 1; j + 1 < run_start.size(); ++j) {
        double v = x[run_start[j]];
        double prev = x[run_start[j - 1]];
        double next = x[run_start[j + 1]];
        bool is_max = v > prev && v > next;
        bool is_min = v < prev && v < next;
        if (!is_max && !is_min) continue;
        std::size_t run_end = run_start[j + 1] - 1;
        out.push_back({run_start[j] + (run_end - run_start[j]) / 2, v, is_max});
    }
    return out;
}

// Keep the more extreme of adjacent same-type extrema.
void enforce_alternation(std::vector<Extremum>& e) {
    std::vector<Extremum> out;
    for (const auto& cur : e) {
        if (!out.empty() && out.back().is_max == cur.is_max) {
            bool keep_cur = cur.is_max ? cur.value > out.back().value
                                       : cur.value < out.back().value;
            if (keep_cur) out.back() = cur;
        } else {
            out.push_back(cur);
        }
    }
    e = std::move(out);
}

// Linear-interpolated third quartile of the (unsorted) distances.
double third_quartile(std::vector<double> d) {
    std::sort(d.begin(), d.end());
    double pos = 0.75 * static_cast<double>(d.size() - 1);
    std::size_t i0 = static_cast<std::size_t>(pos);
    if (i0 + 1 >= d.size()) return d.back();
    double frac = pos - static_cast<double>(i0);
    return d[i0] + frac * (d[i0 + 1] - d[i0]);
}

// Sub-sample peak time via a parabola through the three samples around idx.
// At 4 Hz the raw 0.25 s spacing would quantize instantaneous RR noticeably.
double refine_peak_time(std::span<const double> x, std::size_t idx, const CountingParams& p) {
    double t = p.t0 + static_cast<double>(idx) / p.fs;
    if (idx == 0 || idx + 1 >= x.size()) return t;
    double u = x[idx - 1] - x[idx];
    double w = x[idx + 1] - x[idx];
    double den = u + w;
    if (den == 0.0) return t;
    double delta = std::clamp((u - w) / (2.0 * den), -0.5, 0.5);
    return t + delta / p.fs;
}

}  // namespace

BreathAnnotation count_breaths(std::span<const double> resp, const CountingParams& p) {
    for (double v : resp)
        if (!std::isfinite(v)) throw DataError("count_breaths: non-finite sample");

    BreathAnnotation ann;
    auto extrema = find_extrema(resp);
    enforce_alternation(extrema);
    if (extrema.empty()) return ann;

    if (extrema.size() >= 2) {
        std::vector<double> dist;
        dist.reserve(extrema.size() - 1);
        for (std::size_t k = 0; k + 1 < extrema.size(); ++k)
            dist.push_back(std::abs(extrema[k + 1].value - extrema[k].value));
        double threshold = p.quartile_factor * third_quartile(dist);

        // Reject cycles smaller than the threshold, smallest first; removing a
        // pair can shrink a neighbouring distance, so rescan until stable.
        while (extrema.size() >= 2) {
            std::size_t worst = 0;
            double worst_d = std::abs(extrema[1].value - extrema[0].value);
            for (std::size_t k = 1; k + 1 < extrema.size(); ++k) {
                double d = std::abs(extrema[k + 1].value - extrema[k].value);
                if (d < worst_d) {
                    worst_d = d;
                    worst = k;
                }
            }
            if (worst_d >= threshold) break;
            extrema.erase(extrema.begin() + static_cast<std::ptrdiff_t>(worst),
                          extrema.begin() + static_cast<std::ptrdiff_t>(worst) + 2);
            enforce_alternation(extrema);
        }
    }

    for (const auto& e : extrema)
        if (e.is_max) ann.peak_times_s.push_back(refine_peak_time(resp, e.idx, p));

    ann.inst_rr_bpm = inst_rr(ann, p, &ann.n_rejected);
    if (ann.peak_times_s.size() >= 2) ann.avg_rr_bpm = avg_rr(ann);
    return ann;
}

double avg_rr(const BreathAnnotation& ann) {
    if (ann.peak_times_s.size() < 2)
        throw DataError("avg_rr: undefined for fewer than 2 peaks");
    double span = ann.peak_times_s.back() - ann.peak_times_s.front();
    return 60.0 * static_cast<double>(ann.peak_times_s.size() - 1) / span;
}

std::vector<double> inst_rr(const BreathAnnotation& ann, const CountingParams& p,
                            int* n_rejected) {
    std::vector<double> out;
    int rejected = 0;
    for (std::size_t k = 0; k + 1 < ann.peak_times_s.size(); ++k) {
        double rr = 60.0 / (ann.peak_times_s[k + 1] - ann.peak_times_s[k]);
        if (rr > p.inst_lo_bpm && rr < p.inst_hi_bpm) out.push_back(rr);
        else ++rejected;
    }
    if (n_rejected) *n_rejected = rejected;
    return out;
}

void write_breath_csv(const BreathAnnotation& ann, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw DataError("write_breath_csv: cannot open " + path);
    f << "peak_time_s\n";
    f.precision(17);
    for (double t : ann.peak_times_s) f << t << '\n';
}

std::string breath_summary_json(const BreathAnnotation& ann) {
    nlohmann::json j;
    j["n_peaks"] = ann.peak_times_s.size();
    j["inst_rr_bpm"] = ann.inst_rr_bpm;
    j["n_rejected"] = ann.n_rejected;
    if (ann.avg_rr_bpm) j["avg_rr_bpm"] = *ann.avg_rr_bpm;
    else j["avg_rr_bpm"] = nullptr;
    return j.dump(2);
}

}  // namespace resp
