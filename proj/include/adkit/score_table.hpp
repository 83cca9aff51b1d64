#pragma once

#include "adkit/dataset.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace adkit::tab {

// One scored sample. `value` is the raw score in a raw table and the
// combined score in a combined table.
struct ScoreRow {
    std::string sample_path;
    Label label = Label::normal;
    double value = 0.0;
};

struct MemberRow {
    std::string sample_path;
    Label label = Label::normal;
    double raw = 0.0;
    double normalized = 0.0;
};

// CSV with header "sample_path,label,raw". Scores are written with enough
// digits (%.17g) to round-trip doubles exactly.
void write_raw_scores(const std::filesystem::path& path, const std::vector<ScoreRow>& rows);
std::vector<ScoreRow> read_raw_scores(const std::filesystem::path& path);

// CSV with header "sample_path,label,raw,normalized" (one ensemble member).
void write_member_scores(const std::filesystem::path& path, const std::vector<MemberRow>& rows);
std::vector<MemberRow> read_member_scores(const std::filesystem::path& path);

// CSV with header "sample_path,label,score" (the combined ensemble table).
void write_combined_scores(const std::filesystem::path& path, const std::vector<ScoreRow>& rows);
std::vector<ScoreRow> read_combined_scores(const std::filesystem::path& path);

} // namespace adkit::tab
