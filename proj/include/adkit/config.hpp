#pragma once

#include "adkit/cohort.hpp"
#include "adkit/detector.hpp"
#include "adkit/eval.hpp"
#include "adkit/selection.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace adkit::cfg {

// One benchmark cohort: either generated synthetically from a kind + counts,
// or loaded from an existing manifest whose records must already carry
// train/val/test splits.
struct CohortSpec {
    std::string name;
    bool synthetic = true;
    CohortKind kind = CohortKind::structural;
    data::CohortCounts counts;
    std::filesystem::path manifest; // only when !synthetic
};

struct DetectorSpec {
    std::string id; // config handle; also the default kind token
    det::DetectorKind kind = det::DetectorKind::ae_pixel;
    det::DetectorConfig config;
    std::size_t epochs = 0;
    std::size_t cadence = 0;
};

struct RunConfig {
    std::vector<CohortSpec> cohorts;
    std::vector<DetectorSpec> detectors;
    std::vector<sel::SelectionStrategy> strategies;
    std::vector<std::string> ensemble_members;     // detector ids
    sel::SelectionStrategy ensemble_strategy = sel::SelectionStrategy::normal_val_loss;
    std::vector<std::uint64_t> seeds;
    std::size_t side = 32;
    std::size_t epochs = 250;  // gradient-detector default, per-detector overridable
    std::size_t cadence = 25;
    std::size_t batch = 16;
    std::vector<eval::ReportFormat> report_formats;
    std::filesystem::path out_dir = "out";
};

// Flat key=value config text: '#' starts a comment, keys use dotted section
// prefixes (run.*, cohort.<name>.*, detector.<id>.*), list values are
// comma-separated. Unknown or duplicate keys are ConfigErrors, as is any
// invariant violation (no cohorts, an ensemble member naming no configured
// detector, epochs < cadence, ...). The full grammar is documented in the
// README and the sample configs under configs/.
RunConfig parse_run_config(const std::string& text, const std::string& origin);
RunConfig load_run_config(const std::filesystem::path& path);

// Canonical "key=value" serialization of every resolved setting except the
// output directory, sorted by key. Two configs that resolve to the same run
// produce identical text regardless of formatting, comments, or defaults
// left implicit.
std::string canonical_text(const RunConfig& config);

// FNV-1a 64-bit hash of canonical_text: the run identity stored in the
// ledger, deciding whether completed stages can be skipped.
std::uint64_t config_hash(const RunConfig& config);

} // namespace adkit::cfg
