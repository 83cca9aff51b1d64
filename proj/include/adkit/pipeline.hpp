#pragma once

#include "adkit/config.hpp"
#include "adkit/eval.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>

namespace adkit::pipe {

// Stage names in dependency order. Each stage requires the previous one to
// be marked complete in the ledger for the same config hash.
inline constexpr std::array<const char*, 7> kStageNames = {
    "generate-data", "train", "select", "score", "ensemble", "evaluate", "report",
};

bool is_stage_name(const std::string& name);

// Every artifact location under one output directory. Keeping the layout in
// one place lets the CLI, the stages, and the tests agree on it.
struct ArtifactPaths {
    std::filesystem::path root;

    explicit ArtifactPaths(std::filesystem::path out) : root(std::move(out)) {}

    std::filesystem::path ledger() const { return root / "ledger.json"; }
    std::filesystem::path audit_log() const { return root / "abnormal_access.csv"; }

    std::filesystem::path data_dir(const std::string& cohort, std::uint64_t seed) const;
    std::filesystem::path manifest(const std::string& cohort, std::uint64_t seed) const;
    std::filesystem::path store_dir(const std::string& cohort, std::uint64_t seed,
                                    const std::string& detector) const;
    std::filesystem::path selection_csv(const std::string& cohort, std::uint64_t seed,
                                        const std::string& detector) const;
    std::filesystem::path scores_dir(const std::string& cohort, std::uint64_t seed,
                                     const std::string& detector,
                                     const std::string& strategy) const;
    std::filesystem::path member_csv(const std::string& cohort, std::uint64_t seed,
                                     const std::string& member) const;
    std::filesystem::path combined_csv(const std::string& cohort, std::uint64_t seed) const;
    std::filesystem::path evaluation_csv(const std::string& cohort, std::uint64_t seed) const;
    std::filesystem::path ensemble_roc_csv(const std::string& cohort, std::uint64_t seed) const;
    std::filesystem::path reports_dir() const { return root / "reports"; }
};

// Runs one stage of the benchmark. Returns false when the ledger already
// marks the stage complete for this config hash (nothing is recomputed),
// true when the stage executed. Throws DependencyError, naming the missing
// stage, when the preceding stage has not completed. A ledger written under
// a different config hash resets all completion marks and removes the audit
// log before the stage runs.
bool run_stage(const cfg::RunConfig& config, const std::string& stage);

// Runs all stages in order. Composing run_stage over kStageNames yields
// byte-identical artifacts. Returns the across-seed mean method table that
// the report stage serialized.
eval::ResultTable run_pipeline(const cfg::RunConfig& config);

// Rebuild report tables from the evaluation artifacts (the evaluate stage
// must have run). Methods tables have one row per detector plus "ensemble",
// scored under the configured ensemble strategy; strategy tables hold the
// across-cohort mean AUC per (detector, strategy), with training-free
// detectors marked not-applicable.
eval::ResultTable read_methods_table(const cfg::RunConfig& config, std::uint64_t seed);
eval::ResultTable read_mean_methods_table(const cfg::RunConfig& config);
eval::StrategyTable read_strategy_table(const cfg::RunConfig& config, std::uint64_t seed);
eval::StrategyTable read_mean_strategy_table(const cfg::RunConfig& config);

} // namespace adkit::pipe
