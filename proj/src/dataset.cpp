#include "adkit/dataset.hpp"

#include "adkit/errors.hpp"
#include "adkit/rng.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace adkit {

const char* to_string(Label label) {
    return label == Label::normal ? "normal" : "abnormal";
}

const char* to_string(Split split) {
    switch (split) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
    default: return "unassigned";
    }
}

Label parse_label(const std::string& token) {
    if (token == "normal") return Label::normal;
    if (token == "abnormal") return Label::abnormal;
    throw ParseError("unknown label '" + token + "'");
}

Split parse_split(const std::string& token) {
    if (token == "train") return Split::train;
    if (token == "val") return Split::val;
    if (token == "test") return Split::test;
    if (token == "unassigned") return Split::unassigned;
    throw ParseError("unknown split '" + token + "'");
}

namespace data {

namespace {

Label parse_label(const std::string& tok, std::size_t line) {
    try {
        return adkit::parse_label(tok);
    } catch (const ParseError& e) {
        throw ParseError("manifest line " + std::to_string(line) + ": " + e.what());
    }
}

Split parse_split(const std::string& tok, std::size_t line) {
    try {
        return adkit::parse_split(tok);
    } catch (const ParseError& e) {
        throw ParseError("manifest line " + std::to_string(line) + ": " + e.what());
    }
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (const char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    return fields;
}

} // namespace

Dataset load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("manifest: cannot open " + path.string());

    Dataset dataset;
    dataset.name = path.stem().string();

    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line))
        throw ParseError("manifest line 1: empty file");
    ++line_no;
    if (line != kManifestHeader)
        throw ParseError("manifest line 1: expected header '" + std::string(kManifestHeader) + "'");

    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        if (line == kManifestHeader)
            throw ParseError("manifest line " + std::to_string(line_no) + ": duplicate header");
        const auto fields = split_csv_line(line);
        if (fields.size() != 4)
            throw ParseError("manifest line " + std::to_string(line_no) + ": expected 4 fields, got " +
                             std::to_string(fields.size()));
        if (fields[0].empty())
            throw ParseError("manifest line " + std::to_string(line_no) + ": empty path");
        if (fields[2].empty())
            throw ParseError("manifest line " + std::to_string(line_no) + ": empty patient_id");
        ManifestRecord rec;
        rec.path = fields[0];
        rec.label = parse_label(fields[1], line_no);
        rec.patient_id = fields[2];
        rec.split = parse_split(fields[3], line_no);
        if (rec.split == Split::train && rec.label == Label::abnormal)
            throw ValidationError("manifest line " + std::to_string(line_no) +
                                  ": train record labeled abnormal");
        dataset.records.push_back(std::move(rec));
    }
    return dataset;
}

void save_manifest(const Dataset& dataset, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("manifest: cannot open for writing " + path.string());
    out << kManifestHeader << "\n";
    for (const auto& rec : dataset.records)
        out << rec.path << "," << to_string(rec.label) << "," << rec.patient_id << ","
            << to_string(rec.split) << "\n";
    if (!out) throw IoError("manifest: write failed for " + path.string());
}

void validate_dataset(const Dataset& dataset) {
    std::map<std::string, Split> seen;
    for (const auto& rec : dataset.records) {
        if (rec.split == Split::train && rec.label == Label::abnormal)
            throw ValidationError("dataset: abnormal record in train split");
        if (rec.split == Split::unassigned) continue;
        const auto [it, inserted] = seen.emplace(rec.patient_id, rec.split);
        if (!inserted && it->second != rec.split)
            throw ValidationError("dataset: patient '" + rec.patient_id +
                                  "' appears in more than one split");
    }
}

Dataset split_by_patient(const Dataset& dataset, const std::array<double, 3>& ratios,
                         std::uint64_t seed) {
    double sum = 0.0;
    for (const double r : ratios) {
        if (r < 0.0) throw ValidationError("split_by_patient: negative ratio");
        sum += r;
    }
    if (std::fabs(sum - 1.0) > 1e-9)
        throw ValidationError("split_by_patient: ratios must sum to 1");
    for (const auto& rec : dataset.records)
        if (rec.split != Split::unassigned)
            throw ValidationError("split_by_patient: all records must be unassigned");

    struct Group {
        std::string id;
        std::size_t count = 0;
        bool abnormal = false;
    };
    std::map<std::string, Group> by_id;
    for (const auto& rec : dataset.records) {
        auto& g = by_id[rec.patient_id];
        g.id = rec.patient_id;
        ++g.count;
        if (rec.label == Label::abnormal) g.abnormal = true;
    }

    std::size_t nonzero = 0;
    for (const double r : ratios)
        if (r > 0.0) ++nonzero;
    if (by_id.size() < 3)
        throw InfeasibleError("split_by_patient: need at least 3 distinct patients, have " +
                              std::to_string(by_id.size()));
    if (by_id.size() < nonzero)
        throw InfeasibleError("split_by_patient: fewer patients than nonzero splits");

    std::vector<Group> groups;
    groups.reserve(by_id.size());
    for (auto& [id, g] : by_id) groups.push_back(std::move(g));
    // std::map iteration already yields a canonical lexicographic base order.
    Rng rng(seed);
    rng.shuffle(groups);

    const double total = static_cast<double>(dataset.records.size());
    const std::array<double, 3> target = {ratios[0] * total, ratios[1] * total,
                                          ratios[2] * total};
    std::array<double, 3> assigned = {0.0, 0.0, 0.0};
    std::map<std::string, Split> placement;
    constexpr std::array<Split, 3> split_of = {Split::train, Split::val, Split::test};

    for (const auto& g : groups) {
        const std::size_t first = g.abnormal ? 1 : 0;
        std::size_t best = first;
        for (std::size_t s = first + 1; s < 3; ++s) {
            if (target[s] - assigned[s] > target[best] - assigned[best]) best = s;
        }
        assigned[best] += static_cast<double>(g.count);
        placement[g.id] = split_of[best];
    }

    Dataset out = dataset;
    for (auto& rec : out.records) rec.split = placement.at(rec.patient_id);
    validate_dataset(out);
    return out;
}

} // namespace data
} // namespace adkit
