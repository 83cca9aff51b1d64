#include "adkit/ensemble.hpp"

#include "adkit/errors.hpp"

#include <algorithm>
#include <cmath>

namespace adkit::ens {

NormalizationStats fit_normalization(std::span<const double> val_normal_scores) {
    if (val_normal_scores.size() < 2)
        throw ValidationError("fit_normalization: need at least 2 validation-normal "
                              "scores, got " + std::to_string(val_normal_scores.size()));
    for (const double s : val_normal_scores)
        if (!std::isfinite(s))
            throw ValidationError("fit_normalization: non-finite score");

    NormalizationStats stats;
    stats.min_n = *std::min_element(val_normal_scores.begin(), val_normal_scores.end());
    stats.max_n = *std::max_element(val_normal_scores.begin(), val_normal_scores.end());
    stats.source_count = val_normal_scores.size();
    if (stats.max_n - stats.min_n < 1e-12)
        throw DegenerateRangeError("fit_normalization: validation-normal score range "
                                   "is degenerate (all scores within 1e-12)");
    return stats;
}

std::vector<double> normalize(std::span<const double> raw, const NormalizationStats& stats) {
    if (stats.source_count < 2 || !(stats.max_n - stats.min_n >= 1e-12))
        throw ValidationError("normalize: stats are unfitted or degenerate");
    std::vector<double> out(raw.size());
    const double range = stats.max_n - stats.min_n;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        if (!std::isfinite(raw[i]))
            throw ValidationError("normalize: non-finite raw score at index " +
                                  std::to_string(i));
        out[i] = (raw[i] - stats.min_n) / range;
    }
    return out;
}

EnsembleScores average_ensemble(std::vector<MemberScores> members) {
    if (members.empty())
        throw ValidationError("average_ensemble: no members");
    const std::size_t count = members.front().normalized.size();
    for (const auto& member : members) {
        if (member.normalized.size() != count)
            throw ValidationError("average_ensemble: member '" + member.id +
                                  "' scored a different number of samples");
        if (member.raw.size() != member.normalized.size())
            throw ValidationError("average_ensemble: member '" + member.id +
                                  "' has mismatched raw/normalized lengths");
        for (const double v : member.normalized)
            if (!std::isfinite(v))
                throw ValidationError("average_ensemble: member '" + member.id +
                                      "' has a non-finite normalized score");
    }

    EnsembleScores out;
    out.combined.assign(count, 0.0);
    for (const auto& member : members)
        for (std::size_t j = 0; j < count; ++j) out.combined[j] += member.normalized[j];
    const double k = static_cast<double>(members.size());
    for (double& v : out.combined) v /= k;
    out.members = std::move(members);
    return out;
}

} // namespace adkit::ens
