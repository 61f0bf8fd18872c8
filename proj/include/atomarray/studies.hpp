#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "atomarray/config.hpp"

namespace atomarray {

inline constexpr const char* kCodeVersion = "0.1.0";

struct ResultManifest {
    nlohmann::json json;
    std::vector<std::string> outputs;  // files written, relative to the output directory
};

// Runs the configured study, writes CSV files and manifest.json into
// out_dir, and returns the manifest. Per-cell failures are recorded, not
// thrown. `threads` of 0 means environment override or hardware count.
ResultManifest run_study(const RunConfig& config, const std::string& out_dir, unsigned threads,
                         std::ostream* log = nullptr);

}  // namespace atomarray
