#pragma once

#include <span>
#include <string>
#include <vector>

namespace adkit::ens {

// Min/max of a detector's scores on the validation normals; the reference
// range every score is normalized against. Never fitted on test data.
struct NormalizationStats {
    double min_n = 0.0;
    double max_n = 0.0;
    std::size_t source_count = 0; // >= 2
};

// Throws ValidationError on fewer than two or non-finite values and
// DegenerateRangeError when max - min < 1e-12 (the detector is uninformative
// on validation normals and would poison the ensemble mean).
NormalizationStats fit_normalization(std::span<const double> val_normal_scores);

// (raw - min) / (max - min), elementwise. Deliberately unclipped: test
// scores outside the validation range map outside [0, 1], preserving order.
std::vector<double> normalize(std::span<const double> raw, const NormalizationStats& stats);

struct MemberScores {
    std::string id;                  // detector (or detector:strategy) label
    std::vector<double> raw;         // test scores, one per sample
    std::vector<double> normalized;  // same order, normalized by stats
    NormalizationStats stats;
};

struct EnsembleScores {
    std::vector<MemberScores> members;
    std::vector<double> combined;    // unweighted mean of member normalized
};

// Decision-level averaging over k >= 1 members that scored the identical
// ordered sample list.
EnsembleScores average_ensemble(std::vector<MemberScores> members);

} // namespace adkit::ens
