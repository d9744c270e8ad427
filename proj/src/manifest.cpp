#include "resp/manifest.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "resp/errors.hpp"
#include "resp/synth.hpp"

namespace fs = std::filesystem;

namespace resp {

namespace {

std::string resolve(const std::string& base_dir, const std::string& file) {
    if (file.empty()) return file;
    fs::path p(file);
    if (p.is_absolute()) return file;
    return (fs::path(base_dir) / p).string();
}

void require_exists(const std::string& path, const std::string& what) {
    if (!fs::exists(path))
        throw DataError("manifest: missing " + what + " file " + path);
}

}  // namespace

SampledSignal load_signal(const std::string& path) {
    if (path.ends_with(".csv")) return read_csv(path);
    return read_rsp1(path);
}

Manifest load_manifest(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw DataError("load_manifest: cannot open " + path);
    nlohmann::json j;
    try {
        f >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("load_manifest: bad JSON in " + path + ": " + e.what());
    }

    Manifest m;
    m.base_dir = fs::path(path).parent_path().string();
    try {
        m.version = j.at("version").get<std::string>();
        if (m.version != "1")
            throw DataError("load_manifest: unrecognized version `" + m.version + "`");
        if (j.contains("exclude")) m.exclude = j.at("exclude").get<std::vector<std::string>>();
        for (const auto& s : j.at("subjects")) {
            SubjectEntry e;
            e.id = s.at("id").get<std::string>();
            e.ecg_file = resolve(m.base_dir, s.at("ecg").get<std::string>());
            e.accel_file = resolve(m.base_dir, s.at("accel").get<std::string>());
            if (s.contains("resp")) e.resp_file = resolve(m.base_dir, s.at("resp").get<std::string>());
            if (s.contains("truth")) e.truth_file = resolve(m.base_dir, s.at("truth").get<std::string>());
            if (s.contains("fs")) e.fs = s.at("fs").get<double>();
            if (s.contains("activities")) {
                for (const auto& a : s.at("activities")) {
                    if (!a.is_array() || a.size() != 3)
                        throw DataError("load_manifest: activity entries must be [start, end, label]");
                    e.activities.push_back(
                        {a[0].get<double>(), a[1].get<double>(), a[2].get<std::string>()});
                }
            }
            m.subjects.push_back(std::move(e));
        }
    } catch (const nlohmann::json::exception& err) {
        throw DataError("load_manifest: field error in " + path + ": " + err.what());
    }

    for (const auto& e : m.subjects) {
        require_exists(e.ecg_file, "ecg");
        require_exists(e.accel_file, "accel");
        if (!e.resp_file.empty()) require_exists(e.resp_file, "resp");
        if (!e.truth_file.empty()) require_exists(e.truth_file, "truth");

        auto segs = e.activities;
        std::sort(segs.begin(), segs.end(),
                  [](const ActivitySegment& a, const ActivitySegment& b) {
                      return a.start_s < b.start_s;
                  });
        for (std::size_t i = 1; i < segs.size(); ++i)
            if (segs[i].start_s < segs[i - 1].end_s - 1e-9)
                throw DataError("load_manifest: overlapping activity segments for subject " + e.id);
    }
    return m;
}

WindowBatch assemble_windows(const Manifest& manifest, const AssemblyOptions& opts,
                             AssemblyReport* report) {
    auto subjects = manifest.subjects;
    std::sort(subjects.begin(), subjects.end(),
              [](const SubjectEntry& a, const SubjectEntry& b) { return a.id < b.id; });

    WindowBatch batch;
    AssemblyReport rep;
    for (const auto& e : subjects) {
        if (std::find(manifest.exclude.begin(), manifest.exclude.end(), e.id) !=
            manifest.exclude.end())
            continue;

        auto ecg = load_signal(e.ecg_file);
        auto accel = load_signal(e.accel_file);
        std::optional<SampledSignal> resp_ref;
        if (!e.resp_file.empty()) resp_ref = load_signal(e.resp_file);
        std::optional<SynthTruth> truth;
        if (!e.truth_file.empty()) truth = read_truth_json(e.truth_file);

        if (e.fs > 0.0) {
            for (const auto* sig : {&ecg, &accel}) {
                if (std::abs(sig->fs - e.fs) > 1e-6 * e.fs)
                    throw DataError("assemble_windows: fs mismatch for subject " + e.id +
                                    " (manifest says " + std::to_string(e.fs) + " Hz, file has " +
                                    std::to_string(sig->fs) + " Hz)");
            }
            if (resp_ref && std::abs(resp_ref->fs - e.fs) > 1e-6 * e.fs)
                throw DataError("assemble_windows: fs mismatch for subject " + e.id);
        }

        append_subject_windows(batch, ecg, accel, resp_ref ? &*resp_ref : nullptr,
                               truth ? &truth->breath_peak_times_s : nullptr, e.id,
                               e.activities, opts, rep);
    }
    if (report) *report = rep;
    batch.validate();
    return batch;
}

}  // namespace resp
