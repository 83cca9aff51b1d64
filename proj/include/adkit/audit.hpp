#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace adkit::audit {

// One read of an abnormal-labeled record, attributed to the pipeline stage
// that consumed it. The log makes abnormality leakage mechanically checkable:
// a run without the oracle strategy must contain evaluation-stage entries
// only (test abnormals read for final scoring), while complete_validation
// additionally produces selection-stage entries (validation abnormals).
struct AuditEntry {
    std::string stage;   // "selection" or "evaluation"
    std::string cohort;
    std::uint64_t seed = 0;
    std::string sample_path;
};

inline constexpr const char* kAuditHeader = "stage,cohort,seed,sample_path";

// Appends entries to the CSV log at `path`, creating it (with header) on
// first use. Deterministic: no timestamps, order is append order.
void append_abnormal_accesses(const std::filesystem::path& path,
                              const std::vector<AuditEntry>& entries);

std::vector<AuditEntry> read_audit_log(const std::filesystem::path& path);

} // namespace adkit::audit
