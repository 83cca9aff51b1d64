#pragma once

#include "adkit/checkpoint.hpp"
#include "adkit/detector.hpp"
#include "adkit/patch.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace adkit::sel {

// How the scoring checkpoint is chosen once training has produced a store.
// complete_validation is the only strategy allowed to see abnormal
// validation data; reports flag it as an abnormality-leaking oracle.
enum class SelectionStrategy { last_epoch, normal_val_loss, sample_wise, complete_validation };

std::string to_string(SelectionStrategy strategy);
SelectionStrategy parse_selection_strategy(const std::string& token);
bool requires_abnormal(SelectionStrategy strategy);

struct CheckpointRecord {
    std::uint64_t epoch = 0;
    std::vector<std::uint8_t> checkpoint;   // serialized detector state
    std::vector<double> normal_val_scores;  // score of each validation normal
    double normal_val_loss = 0.0;           // mean evaluation loss on them
};

struct CheckpointStore {
    det::DetectorKind kind = det::DetectorKind::ae_pixel;
    std::size_t cadence = 0;
    std::vector<CheckpointRecord> records;  // strictly increasing epochs
};

// Trains a fresh detector for total_epochs passes, recording a checkpoint at
// every multiple of cadence and always at the final epoch. Requires
// total_epochs >= cadence >= 1 and a nonempty validation-normal list.
CheckpointStore train_with_checkpoints(det::DetectorKind kind,
                                       const std::vector<data::Patch>& train,
                                       const std::vector<data::Patch>& val_normal,
                                       std::size_t total_epochs, std::size_t cadence,
                                       const det::DetectorConfig& config,
                                       std::uint64_t seed);

// Fixed-epoch baseline: the record with the maximal epoch.
const CheckpointRecord& select_last(const CheckpointStore& store);

// Minimal mean validation-normal loss; ties go to the earliest epoch.
const CheckpointRecord& select_by_normal_loss(const CheckpointStore& store);

struct SampleWiseScore {
    double score = 0.0;        // max over checkpoints of score / mean(normals)
    std::uint64_t epoch = 0;   // checkpoint attaining it (earliest on ties)
};

// Per-sample scheme: each checkpoint's score is divided by that checkpoint's
// mean validation-normal score and the maximal ratio wins. Checkpoints whose
// mean normal score is <= 1e-12 are excluded; if that excludes everything, a
// ValidationError is thrown.
SampleWiseScore score_sample_wise(const CheckpointStore& store, const data::Patch& patch);

// Same scheme for many patches, restoring each checkpoint once instead of
// once per patch. Identical results to the one-patch form.
std::vector<SampleWiseScore> score_sample_wise_batch(const CheckpointStore& store,
                                                     const std::vector<data::Patch>& patches);

// Oracle: the record with the highest validation ROC-AUC, which requires
// abnormal validation data (and is therefore flagged in reports). Ties go to
// the earliest epoch.
const CheckpointRecord& select_by_val_auc(const CheckpointStore& store,
                                          const std::vector<data::Patch>& val_normal,
                                          const std::vector<data::Patch>& val_abnormal);

// Directory layout: checkpoint-<epoch>.adk per record, scores-<epoch>.csv
// ("index,score") per record, and index.csv ("epoch,normal_val_loss").
void save_store(const CheckpointStore& store, const std::filesystem::path& dir);
CheckpointStore load_store(const std::filesystem::path& dir);

} // namespace adkit::sel
