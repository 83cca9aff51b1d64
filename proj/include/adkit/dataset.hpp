#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace adkit {

enum class Label { normal, abnormal };
enum class Split { train, val, test, unassigned };

const char* to_string(Label label);
const char* to_string(Split split);

// Throw ParseError on an unknown token.
Label parse_label(const std::string& token);
Split parse_split(const std::string& token);

struct ManifestRecord {
    std::string path;
    Label label = Label::normal;
    std::string patient_id;
    Split split = Split::unassigned;
};

struct Dataset {
    std::string name;
    std::vector<ManifestRecord> records;
};

namespace data {

inline constexpr const char* kManifestHeader = "path,label,patient_id,split";

// Loads a manifest CSV with header "path,label,patient_id,split".
// Unknown label/split tokens and malformed rows raise ParseError with the
// line number; a train record labeled abnormal raises ValidationError.
Dataset load_manifest(const std::filesystem::path& path);

// Writes `dataset` in the manifest CSV format (UTF-8, LF line endings).
void save_manifest(const Dataset& dataset, const std::filesystem::path& path);

// Checks the dataset invariants: no patient in two splits, no abnormal
// train record. Throws ValidationError on violation.
void validate_dataset(const Dataset& dataset);

// Assigns every record to train/val/test by whole-patient groups. Patients
// are shuffled by a seeded RNG, then assigned greedily to the split with the
// largest remaining record-count deficit (ties prefer train, then val).
// Patients with any abnormal record are never placed in train. The result is
// a pure function of (dataset, ratios, seed).
Dataset split_by_patient(const Dataset& dataset, const std::array<double, 3>& ratios,
                         std::uint64_t seed);

} // namespace data
} // namespace adkit
