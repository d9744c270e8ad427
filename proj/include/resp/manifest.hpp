#ifndef RESP_MANIFEST_HPP
#define RESP_MANIFEST_HPP

#include <string>
#include <vector>

#include "resp/windows.hpp"

namespace resp {

struct SubjectEntry {
    std::string id;
    std::string ecg_file;
    std::string accel_file;
    std::string resp_file;    // optional, "" when absent
    std::string truth_file;   // optional
    double fs = 0.0;          // expected rate; 0 skips the check
    std::vector<ActivitySegment> activities;
};

struct Manifest {
    std::string version;
    std::vector<SubjectEntry> subjects;
    std::vector<std::string> exclude;   // subject ids to drop (e.g. improper recordings)
    std::string base_dir;               // resolved from the manifest location
};

// Parses and validates a manifest JSON: version recognized, files present,
// activity segments non-overlapping.
Manifest load_manifest(const std::string& path);

// Signal loader dispatching on extension (.csv or .rsp1/.bin).
SampledSignal load_signal(const std::string& path);

// Runs extraction for every non-excluded subject (ordered by id) and stacks
// the windows; exclusion counts land in `report`.
WindowBatch assemble_windows(const Manifest& manifest, const AssemblyOptions& opts = {},
                             AssemblyReport* report = nullptr);

}  // namespace resp

#endif
