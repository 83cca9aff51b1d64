#include "adkit/selection.hpp"

#include "adkit/errors.hpp"
#include "adkit/eval.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace adkit::sel {

namespace {

constexpr double kDegenerateMean = 1e-12;

double mean_of(const std::vector<double>& v) {
    double acc = 0.0;
    for (const double x : v) acc += x;
    return acc / static_cast<double>(v.size());
}

void require_nonempty(const CheckpointStore& store, const char* op) {
    if (store.records.empty())
        throw ValidationError(std::string(op) + ": empty checkpoint store");
}

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

std::string to_string(SelectionStrategy strategy) {
    switch (strategy) {
        case SelectionStrategy::last_epoch: return "last_epoch";
        case SelectionStrategy::normal_val_loss: return "normal_val_loss";
        case SelectionStrategy::sample_wise: return "sample_wise";
        case SelectionStrategy::complete_validation: return "complete_validation";
    }
    throw ValidationError("unknown selection strategy value");
}

SelectionStrategy parse_selection_strategy(const std::string& token) {
    if (token == "last_epoch") return SelectionStrategy::last_epoch;
    if (token == "normal_val_loss") return SelectionStrategy::normal_val_loss;
    if (token == "sample_wise") return SelectionStrategy::sample_wise;
    if (token == "complete_validation") return SelectionStrategy::complete_validation;
    throw ParseError("unknown selection strategy '" + token + "'");
}

bool requires_abnormal(SelectionStrategy strategy) {
    return strategy == SelectionStrategy::complete_validation;
}

CheckpointStore train_with_checkpoints(det::DetectorKind kind,
                                       const std::vector<data::Patch>& train,
                                       const std::vector<data::Patch>& val_normal,
                                       std::size_t total_epochs, std::size_t cadence,
                                       const det::DetectorConfig& config,
                                       std::uint64_t seed) {
    if (cadence == 0)
        throw ValidationError("train_with_checkpoints: cadence must be >= 1");
    if (total_epochs < cadence)
        throw ValidationError("train_with_checkpoints: total_epochs must be >= cadence");
    if (val_normal.empty())
        throw ValidationError("train_with_checkpoints: empty validation-normal list");
    if (train.empty())
        throw ValidationError("train_with_checkpoints: empty training list");

    const std::size_t side = train.front().width;
    auto state = det::init_detector(kind, side, config, seed, train);

    CheckpointStore store;
    store.kind = kind;
    store.cadence = cadence;
    for (std::size_t epoch = 1; epoch <= total_epochs; ++epoch) {
        det::train_epoch(state, train);
        if (epoch % cadence != 0 && epoch != total_epochs) continue;

        CheckpointRecord record;
        record.epoch = epoch;
        record.checkpoint = det::snapshot(state);
        record.normal_val_scores = det::score_batch(state, val_normal);
        for (const double s : record.normal_val_scores)
            if (!std::isfinite(s))
                throw DivergenceError("validation scoring diverged at epoch " +
                                      std::to_string(epoch));
        record.normal_val_loss = mean_of(record.normal_val_scores);
        if (kind == det::DetectorKind::center_distance)
            record.normal_val_loss += det::detail::center_elastic_penalty(state);
        store.records.push_back(std::move(record));
    }
    return store;
}

const CheckpointRecord& select_last(const CheckpointStore& store) {
    require_nonempty(store, "select_last");
    return store.records.back();
}

const CheckpointRecord& select_by_normal_loss(const CheckpointStore& store) {
    require_nonempty(store, "select_by_normal_loss");
    const CheckpointRecord* best = nullptr;
    for (const auto& record : store.records) {
        if (!std::isfinite(record.normal_val_loss))
            throw ValidationError("select_by_normal_loss: non-finite loss at epoch " +
                                  std::to_string(record.epoch));
        if (!best || record.normal_val_loss < best->normal_val_loss) best = &record;
    }
    return *best;
}

std::vector<SampleWiseScore> score_sample_wise_batch(const CheckpointStore& store,
                                                     const std::vector<data::Patch>& patches) {
    require_nonempty(store, "score_sample_wise");

    std::vector<SampleWiseScore> best(patches.size());
    std::vector<bool> seeded(patches.size(), false);
    bool any_usable = false;
    for (const auto& record : store.records) {
        const double mean = mean_of(record.normal_val_scores);
        if (!(mean > kDegenerateMean)) continue; // degenerate checkpoint: excluded
        any_usable = true;
        if (patches.empty()) continue;
        const auto state = det::restore(record.checkpoint);
        const auto scores = det::score_batch(state, patches);
        for (std::size_t i = 0; i < patches.size(); ++i) {
            const double ratio = scores[i] / mean;
            if (!seeded[i] || ratio > best[i].score) {
                best[i] = {ratio, record.epoch};
                seeded[i] = true;
            }
        }
    }
    if (!any_usable)
        throw ValidationError("score_sample_wise: every checkpoint has a degenerate "
                              "mean normal score");
    return best;
}

SampleWiseScore score_sample_wise(const CheckpointStore& store, const data::Patch& patch) {
    return score_sample_wise_batch(store, {patch}).front();
}

const CheckpointRecord& select_by_val_auc(const CheckpointStore& store,
                                          const std::vector<data::Patch>& val_normal,
                                          const std::vector<data::Patch>& val_abnormal) {
    require_nonempty(store, "select_by_val_auc");
    if (val_normal.empty())
        throw ValidationError("select_by_val_auc: empty validation-normal list");
    if (val_abnormal.empty())
        throw ValidationError("select_by_val_auc: this strategy needs abnormal "
                              "validation data");

    const CheckpointRecord* best = nullptr;
    double best_auc = -1.0;
    for (const auto& record : store.records) {
        const auto state = det::restore(record.checkpoint);
        const auto normal_scores = det::score_batch(state, val_normal);
        const auto abnormal_scores = det::score_batch(state, val_abnormal);
        const double auc = eval::roc_auc(normal_scores, abnormal_scores).auc;
        if (!best || auc > best_auc) {
            best = &record;
            best_auc = auc;
        }
    }
    return *best;
}

void save_store(const CheckpointStore& store, const std::filesystem::path& dir) {
    require_nonempty(store, "save_store");
    std::filesystem::create_directories(dir);

    std::ofstream index(dir / "index.csv", std::ios::binary | std::ios::trunc);
    if (!index) throw IoError("store: cannot open " + (dir / "index.csv").string());
    index << "epoch,normal_val_loss\n";
    for (const auto& record : store.records) {
        index << record.epoch << "," << fmt17(record.normal_val_loss) << "\n";

        const auto ckpt_path = dir / ("checkpoint-" + std::to_string(record.epoch) + ".adk");
        std::ofstream ckpt(ckpt_path, std::ios::binary | std::ios::trunc);
        if (!ckpt) throw IoError("store: cannot open " + ckpt_path.string());
        ckpt.write(reinterpret_cast<const char*>(record.checkpoint.data()),
                   static_cast<std::streamsize>(record.checkpoint.size()));
        if (!ckpt) throw IoError("store: write failed for " + ckpt_path.string());

        const auto scores_path = dir / ("scores-" + std::to_string(record.epoch) + ".csv");
        std::ofstream scores(scores_path, std::ios::binary | std::ios::trunc);
        if (!scores) throw IoError("store: cannot open " + scores_path.string());
        scores << "index,score\n";
        for (std::size_t i = 0; i < record.normal_val_scores.size(); ++i)
            scores << i << "," << fmt17(record.normal_val_scores[i]) << "\n";
        if (!scores) throw IoError("store: write failed for " + scores_path.string());
    }
    if (!index) throw IoError("store: write failed for " + (dir / "index.csv").string());
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

double parse_double(const std::string& token, const std::string& context) {
    try {
        std::size_t used = 0;
        const double v = std::stod(token, &used);
        if (used != token.size()) throw std::invalid_argument(token);
        return v;
    } catch (const std::exception&) {
        throw ParseError(context + ": bad number '" + token + "'");
    }
}

std::uint64_t parse_epoch(const std::string& token, const std::string& context) {
    try {
        std::size_t used = 0;
        const unsigned long long v = std::stoull(token, &used);
        if (used != token.size()) throw std::invalid_argument(token);
        return v;
    } catch (const std::exception&) {
        throw ParseError(context + ": bad epoch '" + token + "'");
    }
}

} // namespace

CheckpointStore load_store(const std::filesystem::path& dir) {
    const auto index_path = dir / "index.csv";
    std::ifstream index(index_path, std::ios::binary);
    if (!index) throw IoError("store: cannot open " + index_path.string());

    std::string line;
    if (!std::getline(index, line)) throw ParseError(index_path.string() + ": empty index");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "epoch,normal_val_loss")
        throw ParseError(index_path.string() + ": bad header '" + line + "'");

    CheckpointStore store;
    while (std::getline(index, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != 2)
            throw ParseError(index_path.string() + ": expected 2 fields, got " +
                             std::to_string(fields.size()));
        CheckpointRecord record;
        record.epoch = parse_epoch(fields[0], index_path.string());
        record.normal_val_loss = parse_double(fields[1], index_path.string());

        const auto ckpt_path = dir / ("checkpoint-" + std::to_string(record.epoch) + ".adk");
        std::ifstream ckpt(ckpt_path, std::ios::binary);
        if (!ckpt) throw IoError("store: cannot open " + ckpt_path.string());
        record.checkpoint.assign(std::istreambuf_iterator<char>(ckpt),
                                 std::istreambuf_iterator<char>());

        const auto scores_path = dir / ("scores-" + std::to_string(record.epoch) + ".csv");
        std::ifstream scores(scores_path, std::ios::binary);
        if (!scores) throw IoError("store: cannot open " + scores_path.string());
        std::string sline;
        if (!std::getline(scores, sline))
            throw ParseError(scores_path.string() + ": empty file");
        if (!sline.empty() && sline.back() == '\r') sline.pop_back();
        if (sline != "index,score")
            throw ParseError(scores_path.string() + ": bad header '" + sline + "'");
        while (std::getline(scores, sline)) {
            if (!sline.empty() && sline.back() == '\r') sline.pop_back();
            if (sline.empty()) continue;
            const auto sfields = split_csv_line(sline);
            if (sfields.size() != 2)
                throw ParseError(scores_path.string() + ": expected 2 fields, got " +
                                 std::to_string(sfields.size()));
            record.normal_val_scores.push_back(parse_double(sfields[1], scores_path.string()));
        }
        if (record.normal_val_scores.empty())
            throw ParseError(scores_path.string() + ": no scores");

        store.records.push_back(std::move(record));
    }
    if (store.records.empty())
        throw ParseError(index_path.string() + ": no checkpoint records");
    for (std::size_t i = 1; i < store.records.size(); ++i)
        if (store.records[i].epoch <= store.records[i - 1].epoch)
            throw ValidationError("store: epochs are not strictly increasing");

    store.kind = det::restore(store.records.front().checkpoint).kind;
    store.cadence = static_cast<std::size_t>(store.records.front().epoch);
    return store;
}

} // namespace adkit::sel
