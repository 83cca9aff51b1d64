#include "adkit/pipeline.hpp"

#include "adkit/audit.hpp"
#include "adkit/checkpoint.hpp"
#include "adkit/cohort.hpp"
#include "adkit/dataset.hpp"
#include "adkit/detector.hpp"
#include "adkit/ensemble.hpp"
#include "adkit/errors.hpp"
#include "adkit/patch.hpp"
#include "adkit/rng.hpp"
#include "adkit/score_table.hpp"
#include "adkit/selection.hpp"

#include <json.hpp>

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <utility>

namespace adkit::pipe {

namespace fs = std::filesystem;

namespace {

std::string seed_dir(std::uint64_t seed) {
    return "seed" + std::to_string(seed);
}

std::string fmt_double(double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

std::string hash_hex(std::uint64_t hash) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, hash);
    return buf;
}

void write_text_file(const fs::path& path, const std::string& text) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError("cannot open '" + path.string() + "' for writing");
    out << text;
    out.flush();
    if (!out)
        throw IoError("write to '" + path.string() + "' failed");
}

// ---- ledger ----------------------------------------------------------------

struct Ledger {
    std::string config_hash;
    std::map<std::string, bool> stages; // presence == completed
};

Ledger load_ledger(const fs::path& path, const std::string& current_hash) {
    Ledger ledger;
    ledger.config_hash = current_hash;
    std::ifstream in(path, std::ios::binary);
    if (!in)
        return ledger; // fresh output directory
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("ledger '" + path.string() + "': " + e.what());
    }
    if (!doc.is_object() || !doc.contains("config_hash") || !doc["config_hash"].is_string())
        throw FormatError("ledger '" + path.string() + "': missing config_hash");
    ledger.config_hash = doc["config_hash"].get<std::string>();
    if (doc.contains("stages")) {
        if (!doc["stages"].is_object())
            throw FormatError("ledger '" + path.string() + "': stages must be an object");
        for (const auto& [name, value] : doc["stages"].items()) {
            if (!value.is_boolean() || !value.get<bool>())
                continue;
            if (std::find_if(kStageNames.begin(), kStageNames.end(),
                             [&](const char* s) { return name == s; }) == kStageNames.end())
                throw FormatError("ledger '" + path.string() + "': unknown stage '" + name + "'");
            ledger.stages[name] = true;
        }
    }
    return ledger;
}

void save_ledger(const fs::path& path, const Ledger& ledger) {
    nlohmann::ordered_json doc;
    doc["config_hash"] = ledger.config_hash;
    nlohmann::ordered_json stages = nlohmann::ordered_json::object();
    for (const char* name : kStageNames) {
        if (ledger.stages.count(name))
            stages[name] = true;
    }
    doc["stages"] = stages;
    write_text_file(path, doc.dump(2) + "\n");
}

// ---- sample loading ---------------------------------------------------------

struct SampleSet {
    std::vector<data::Patch> patches;
    std::vector<std::string> paths; // record paths as written in the manifest
};

fs::path resolve_record(const fs::path& manifest_dir, const std::string& record_path) {
    fs::path p = record_path;
    return p.is_relative() ? manifest_dir / p : p;
}

SampleSet load_samples(const Dataset& dataset, const fs::path& manifest_dir, Split split,
                       Label label) {
    SampleSet out;
    for (const auto& rec : dataset.records) {
        if (rec.split != split || rec.label != label)
            continue;
        out.patches.push_back(data::read_patch(resolve_record(manifest_dir, rec.path)));
        out.paths.push_back(rec.path);
    }
    return out;
}

struct TestSet {
    std::vector<data::Patch> patches;
    std::vector<std::string> paths;
    std::vector<Label> labels;
};

TestSet load_test_set(const Dataset& dataset, const fs::path& manifest_dir) {
    TestSet out;
    for (const auto& rec : dataset.records) {
        if (rec.split != Split::test)
            continue;
        out.patches.push_back(data::read_patch(resolve_record(manifest_dir, rec.path)));
        out.paths.push_back(rec.path);
        out.labels.push_back(rec.label);
    }
    return out;
}

// ---- per-stage bodies -------------------------------------------------------

bool uses_oracle(const cfg::RunConfig& config) {
    return std::any_of(config.strategies.begin(), config.strategies.end(),
                       sel::requires_abnormal);
}

template <typename Fn>
void for_each_cohort_seed(const cfg::RunConfig& config, const char* stage, Fn&& fn) {
    for (const auto& cohort : config.cohorts) {
        for (std::uint64_t seed : config.seeds) {
            try {
                fn(cohort, seed);
            } catch (const Error& e) {
                throw Error("stage '" + std::string(stage) + "' failed for cohort '" +
                            cohort.name + "' seed " + std::to_string(seed) + ": " + e.what());
            }
        }
    }
}

void stage_generate_data(const cfg::RunConfig& config, const ArtifactPaths& paths) {
    const bool oracle = uses_oracle(config);
    for_each_cohort_seed(config, "generate-data", [&](const cfg::CohortSpec& cohort,
                                                      std::uint64_t seed) {
        const fs::path dir = paths.data_dir(cohort.name, seed);
        if (cohort.synthetic) {
            data::generate_synthetic_cohort(cohort.kind, cohort.counts, config.side,
                                            derive_seed(seed, "cohort-" + cohort.name), dir);
            return;
        }
        Dataset dataset = data::load_manifest(cohort.manifest);
        data::validate_dataset(dataset);
        std::size_t n_train = 0, n_val_normal = 0, n_val_abnormal = 0;
        std::size_t n_test_normal = 0, n_test_abnormal = 0;
        for (auto& rec : dataset.records) {
            if (rec.split == Split::unassigned)
                throw ValidationError("manifest '" + cohort.manifest.string() +
                                      "': record '" + rec.path +
                                      "' has no split; external manifests must be pre-split");
            if (rec.split == Split::train)
                ++n_train;
            else if (rec.split == Split::val)
                (rec.label == Label::normal ? n_val_normal : n_val_abnormal)++;
            else
                (rec.label == Label::normal ? n_test_normal : n_test_abnormal)++;
            // Data files stay where they are; the copied manifest points at
            // them with absolute paths.
            fs::path resolved = resolve_record(cohort.manifest.parent_path(), rec.path);
            rec.path = fs::absolute(resolved).lexically_normal().string();
        }
        if (n_train == 0)
            throw ValidationError("cohort '" + cohort.name + "': no training records");
        if (n_val_normal < 2)
            throw ValidationError("cohort '" + cohort.name +
                                  "': need at least 2 validation normals");
        if (n_test_normal == 0 || n_test_abnormal == 0)
            throw ValidationError("cohort '" + cohort.name +
                                  "': test split needs both normal and abnormal records");
        if (oracle && n_val_abnormal == 0)
            throw ValidationError("cohort '" + cohort.name +
                                  "': the oracle strategy needs abnormal validation records");
        dataset.name = cohort.name;
        fs::create_directories(dir);
        data::save_manifest(dataset, paths.manifest(cohort.name, seed));
    });
}

void stage_train(const cfg::RunConfig& config, const ArtifactPaths& paths) {
    for_each_cohort_seed(config, "train", [&](const cfg::CohortSpec& cohort,
                                              std::uint64_t seed) {
        const fs::path dir = paths.data_dir(cohort.name, seed);
        const Dataset dataset = data::load_manifest(paths.manifest(cohort.name, seed));
        const SampleSet train = load_samples(dataset, dir, Split::train, Label::normal);
        const SampleSet val = load_samples(dataset, dir, Split::val, Label::normal);
        for (const auto& spec : config.detectors) {
            const auto store = sel::train_with_checkpoints(
                spec.kind, train.patches, val.patches, spec.epochs, spec.cadence, spec.config,
                derive_seed(seed, "train-" + cohort.name + "-" + spec.id));
            sel::save_store(store, paths.store_dir(cohort.name, seed, spec.id));
        }
    });
}

void stage_select(const cfg::RunConfig& config, const ArtifactPaths& paths) {
    const bool oracle = uses_oracle(config);
    for_each_cohort_seed(config, "select", [&](const cfg::CohortSpec& cohort,
                                               std::uint64_t seed) {
        SampleSet val_normal, val_abnormal;
        if (oracle) {
            const fs::path dir = paths.data_dir(cohort.name, seed);
            const Dataset dataset = data::load_manifest(paths.manifest(cohort.name, seed));
            val_normal = load_samples(dataset, dir, Split::val, Label::normal);
            val_abnormal = load_samples(dataset, dir, Split::val, Label::abnormal);
            std::vector<audit::AuditEntry> accesses;
            accesses.reserve(val_abnormal.paths.size());
            for (const auto& p : val_abnormal.paths)
                accesses.push_back({"selection", cohort.name, seed, p});
            audit::append_abnormal_accesses(paths.audit_log(), accesses);
        }
        for (const auto& spec : config.detectors) {
            const auto store = sel::load_store(paths.store_dir(cohort.name, seed, spec.id));
            std::string csv = "strategy,epoch\n";
            for (const auto strategy : config.strategies) {
                std::string epoch;
                switch (strategy) {
                case sel::SelectionStrategy::last_epoch:
                    epoch = std::to_string(sel::select_last(store).epoch);
                    break;
                case sel::SelectionStrategy::normal_val_loss:
                    epoch = std::to_string(sel::select_by_normal_loss(store).epoch);
                    break;
                case sel::SelectionStrategy::sample_wise:
                    epoch = "per_sample"; // resolved per test sample at scoring time
                    break;
                case sel::SelectionStrategy::complete_validation:
                    epoch = std::to_string(
                        sel::select_by_val_auc(store, val_normal.patches, val_abnormal.patches)
                            .epoch);
                    break;
                }
                csv += sel::to_string(strategy) + "," + epoch + "\n";
            }
            write_text_file(paths.selection_csv(cohort.name, seed, spec.id), csv);
        }
    });
}

std::map<std::string, std::string> read_selection_csv(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open selection table '" + path.string() + "'");
    std::string line;
    if (!std::getline(in, line))
        throw ParseError("selection table '" + path.string() + "': empty file");
    if (!line.empty() && line.back() == '\r')
        line.pop_back();
    if (line != "strategy,epoch")
        throw ParseError("selection table '" + path.string() + "': bad header '" + line + "'");
    std::map<std::string, std::string> out;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw ParseError("selection table '" + path.string() + "': bad row '" + line + "'");
        out[line.substr(0, comma)] = line.substr(comma + 1);
    }
    return out;
}

std::vector<tab::ScoreRow> score_rows(const std::vector<std::string>& sample_paths,
                                      const std::vector<Label>& labels,
                                      const std::vector<double>& values) {
    std::vector<tab::ScoreRow> rows(sample_paths.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        rows[i] = {sample_paths[i], labels[i], values[i]};
    return rows;
}

void stage_score(const cfg::RunConfig& config, const ArtifactPaths& paths) {
    for_each_cohort_seed(config, "score", [&](const cfg::CohortSpec& cohort,
                                              std::uint64_t seed) {
        const fs::path dir = paths.data_dir(cohort.name, seed);
        const Dataset dataset = data::load_manifest(paths.manifest(cohort.name, seed));
        const SampleSet val_normal = load_samples(dataset, dir, Split::val, Label::normal);
        const TestSet test = load_test_set(dataset, dir);
        const std::vector<Label> val_labels(val_normal.paths.size(), Label::normal);

        std::vector<audit::AuditEntry> accesses;
        for (std::size_t i = 0; i < test.paths.size(); ++i) {
            if (test.labels[i] == Label::abnormal)
                accesses.push_back({"evaluation", cohort.name, seed, test.paths[i]});
        }
        audit::append_abnormal_accesses(paths.audit_log(), accesses);

        for (const auto& spec : config.detectors) {
            const auto store = sel::load_store(paths.store_dir(cohort.name, seed, spec.id));
            const auto chosen = read_selection_csv(paths.selection_csv(cohort.name, seed,
                                                                       spec.id));
            // Strategies often pick the same epoch; restore and score once.
            std::map<std::uint64_t, std::vector<double>> test_cache;
            auto test_scores_at = [&](std::uint64_t epoch) -> const std::vector<double>& {
                auto it = test_cache.find(epoch);
                if (it != test_cache.end())
                    return it->second;
                const auto rec = std::find_if(store.records.begin(), store.records.end(),
                                              [&](const auto& r) { return r.epoch == epoch; });
                if (rec == store.records.end())
                    throw ValidationError("detector '" + spec.id + "': no checkpoint at epoch " +
                                          std::to_string(epoch));
                const auto state = det::restore(rec->checkpoint, config.side);
                return test_cache.emplace(epoch, det::score_batch(state, test.patches))
                    .first->second;
            };

            for (const auto strategy : config.strategies) {
                const std::string name = sel::to_string(strategy);
                std::vector<double> val_raw;
                std::vector<double> test_raw;
                if (strategy == sel::SelectionStrategy::sample_wise) {
                    for (const auto& s : sel::score_sample_wise_batch(store, val_normal.patches))
                        val_raw.push_back(s.score);
                    for (const auto& s : sel::score_sample_wise_batch(store, test.patches))
                        test_raw.push_back(s.score);
                } else {
                    const auto it = chosen.find(name);
                    if (it == chosen.end())
                        throw ValidationError("selection table for detector '" + spec.id +
                                              "' lacks strategy '" + name + "'");
                    char* end = nullptr;
                    const std::uint64_t epoch = std::strtoull(it->second.c_str(), &end, 10);
                    if (end == it->second.c_str() || *end != '\0')
                        throw ParseError("selection table for detector '" + spec.id +
                                         "': bad epoch '" + it->second + "'");
                    const auto rec = std::find_if(store.records.begin(), store.records.end(),
                                                  [&](const auto& r) { return r.epoch == epoch; });
                    if (rec == store.records.end())
                        throw ValidationError("detector '" + spec.id +
                                              "': no checkpoint at epoch " + it->second);
                    val_raw = rec->normal_val_scores;
                    test_raw = test_scores_at(epoch);
                }
                const fs::path out_dir = paths.scores_dir(cohort.name, seed, spec.id, name);
                tab::write_raw_scores(out_dir / "val_normal.csv",
                                      score_rows(val_normal.paths, val_labels, val_raw));
                tab::write_raw_scores(out_dir / "test.csv",
                                      score_rows(test.paths, test.labels, test_raw));
            }
        }
    });
}

void stage_ensemble(const cfg::RunConfig& config, const ArtifactPaths& paths) {
    const std::string strategy = sel::to_string(config.ensemble_strategy);
    for_each_cohort_seed(config, "ensemble", [&](const cfg::CohortSpec& cohort,
                                                 std::uint64_t seed) {
        std::vector<ens::MemberScores> members;
        std::vector<std::string> sample_paths;
        std::vector<Label> labels;
        for (const auto& id : config.ensemble_members) {
            const fs::path dir = paths.scores_dir(cohort.name, seed, id, strategy);
            const auto val_rows = tab::read_raw_scores(dir / "val_normal.csv");
            const auto test_rows = tab::read_raw_scores(dir / "test.csv");
            if (members.empty()) {
                for (const auto& row : test_rows) {
                    sample_paths.push_back(row.sample_path);
                    labels.push_back(row.label);
                }
            } else {
                if (test_rows.size() != sample_paths.size())
                    throw ValidationError("ensemble member '" + id +
                                          "' scored a different number of test samples");
                for (std::size_t i = 0; i < test_rows.size(); ++i)
                    if (test_rows[i].sample_path != sample_paths[i])
                        throw ValidationError("ensemble member '" + id +
                                              "' scored a different test sample order");
            }
            std::vector<double> val_raw;
            for (const auto& row : val_rows)
                val_raw.push_back(row.value);
            ens::MemberScores member;
            member.id = id;
            for (const auto& row : test_rows)
                member.raw.push_back(row.value);
            member.stats = ens::fit_normalization(val_raw);
            member.normalized = ens::normalize(member.raw, member.stats);
            std::vector<tab::MemberRow> rows(test_rows.size());
            for (std::size_t i = 0; i < rows.size(); ++i)
                rows[i] = {sample_paths[i], labels[i], member.raw[i], member.normalized[i]};
            tab::write_member_scores(paths.member_csv(cohort.name, seed, id), rows);
            members.push_back(std::move(member));
        }
        const auto result = ens::average_ensemble(std::move(members));
        tab::write_combined_scores(paths.combined_csv(cohort.name, seed),
                                   score_rows(sample_paths, labels, result.combined));
    });
}

void split_by_label(const std::vector<tab::ScoreRow>& rows, std::vector<double>& normal,
                    std::vector<double>& abnormal) {
    normal.clear();
    abnormal.clear();
    for (const auto& row : rows)
        (row.label == Label::normal ? normal : abnormal).push_back(row.value);
}

void stage_evaluate(const cfg::RunConfig& config, const ArtifactPaths& paths) {
    for_each_cohort_seed(config, "evaluate", [&](const cfg::CohortSpec& cohort,
                                                 std::uint64_t seed) {
        std::string csv = "method,strategy,auc,n_normal,n_abnormal\n";
        std::vector<double> normal, abnormal;
        auto append_row = [&](const std::string& method, const std::string& strategy) {
            const auto result = eval::roc_auc(normal, abnormal);
            csv += method + "," + strategy + "," + fmt_double(result.auc) + "," +
                   std::to_string(result.n_normal) + "," + std::to_string(result.n_abnormal) +
                   "\n";
        };
        for (const auto& spec : config.detectors) {
            for (const auto strategy : config.strategies) {
                const std::string name = sel::to_string(strategy);
                const auto rows = tab::read_raw_scores(
                    paths.scores_dir(cohort.name, seed, spec.id, name) / "test.csv");
                split_by_label(rows, normal, abnormal);
                append_row(spec.id, name);
            }
        }
        const auto combined = tab::read_combined_scores(paths.combined_csv(cohort.name, seed));
        split_by_label(combined, normal, abnormal);
        append_row("ensemble", sel::to_string(config.ensemble_strategy));
        write_text_file(paths.evaluation_csv(cohort.name, seed), csv);
        eval::write_roc_csv(eval::roc_curve(normal, abnormal),
                            paths.ensemble_roc_csv(cohort.name, seed));
    });
}

// ---- evaluation artifacts back into tables ----------------------------------

struct EvalKey {
    std::string method;
    std::string strategy;
    bool operator<(const EvalKey& o) const {
        return method != o.method ? method < o.method : strategy < o.strategy;
    }
};

std::map<EvalKey, eval::AucResult> read_evaluation_rows(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open evaluation table '" + path.string() + "'");
    std::string line;
    std::size_t line_no = 0;
    auto fail = [&](const std::string& what) -> void {
        throw ParseError("evaluation table '" + path.string() + "' line " +
                         std::to_string(line_no) + ": " + what);
    };
    if (!std::getline(in, line))
        throw ParseError("evaluation table '" + path.string() + "': empty file");
    ++line_no;
    if (!line.empty() && line.back() == '\r')
        line.pop_back();
    if (line != "method,strategy,auc,n_normal,n_abnormal")
        fail("bad header '" + line + "'");
    std::map<EvalKey, eval::AucResult> out;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        std::vector<std::string> fields;
        std::size_t start = 0;
        for (std::size_t i = 0; i <= line.size(); ++i) {
            if (i == line.size() || line[i] == ',') {
                fields.push_back(line.substr(start, i - start));
                start = i + 1;
            }
        }
        if (fields.size() != 5)
            fail("expected 5 fields, got " + std::to_string(fields.size()));
        eval::AucResult result;
        char* end = nullptr;
        result.auc = std::strtod(fields[2].c_str(), &end);
        if (end == fields[2].c_str() || *end != '\0')
            fail("bad auc '" + fields[2] + "'");
        result.n_normal = std::strtoull(fields[3].c_str(), &end, 10);
        if (end == fields[3].c_str() || *end != '\0')
            fail("bad n_normal '" + fields[3] + "'");
        result.n_abnormal = std::strtoull(fields[4].c_str(), &end, 10);
        if (end == fields[4].c_str() || *end != '\0')
            fail("bad n_abnormal '" + fields[4] + "'");
        if (!out.emplace(EvalKey{fields[0], fields[1]}, result).second)
            fail("duplicate entry for " + fields[0] + "/" + fields[1]);
    }
    return out;
}

const eval::AucResult& lookup(const std::map<EvalKey, eval::AucResult>& rows,
                              const std::string& method, const std::string& strategy,
                              const fs::path& path) {
    const auto it = rows.find(EvalKey{method, strategy});
    if (it == rows.end())
        throw ValidationError("evaluation table '" + path.string() + "' has no entry for " +
                              method + "/" + strategy);
    return it->second;
}

std::string strategy_label(sel::SelectionStrategy strategy) {
    std::string label = sel::to_string(strategy);
    if (sel::requires_abnormal(strategy))
        label += ":oracle"; // flags abnormal validation data leaking into selection
    return label;
}

void stage_report(const cfg::RunConfig& config, const ArtifactPaths& paths) {
    const fs::path dir = paths.reports_dir();
    auto emit_methods = [&](const eval::ResultTable& table, const std::string& base) {
        for (const auto format : config.report_formats)
            eval::emit_report(table, format,
                              dir / (base + (format == eval::ReportFormat::csv ? ".csv"
                                                                               : ".json")));
    };
    auto emit_strategies = [&](const eval::StrategyTable& table, const std::string& base) {
        for (const auto format : config.report_formats)
            eval::emit_strategy_report(table, format,
                                       dir / (base + (format == eval::ReportFormat::csv
                                                          ? ".csv"
                                                          : ".json")));
    };
    for (std::uint64_t seed : config.seeds) {
        emit_methods(read_methods_table(config, seed), "methods_" + seed_dir(seed));
        emit_strategies(read_strategy_table(config, seed), "strategies_" + seed_dir(seed));
    }
    emit_methods(read_mean_methods_table(config), "methods_mean");
    emit_strategies(read_mean_strategy_table(config), "strategies_mean");
}

void run_stage_body(const cfg::RunConfig& config, const ArtifactPaths& paths,
                    const std::string& stage) {
    if (stage == "generate-data")
        stage_generate_data(config, paths);
    else if (stage == "train")
        stage_train(config, paths);
    else if (stage == "select")
        stage_select(config, paths);
    else if (stage == "score")
        stage_score(config, paths);
    else if (stage == "ensemble")
        stage_ensemble(config, paths);
    else if (stage == "evaluate")
        stage_evaluate(config, paths);
    else
        stage_report(config, paths);
}

} // namespace

fs::path ArtifactPaths::data_dir(const std::string& cohort, std::uint64_t seed) const {
    return root / "data" / cohort / seed_dir(seed);
}

fs::path ArtifactPaths::manifest(const std::string& cohort, std::uint64_t seed) const {
    return data_dir(cohort, seed) / "manifest.csv";
}

fs::path ArtifactPaths::store_dir(const std::string& cohort, std::uint64_t seed,
                                  const std::string& detector) const {
    return root / "stores" / cohort / seed_dir(seed) / detector;
}

fs::path ArtifactPaths::selection_csv(const std::string& cohort, std::uint64_t seed,
                                      const std::string& detector) const {
    return root / "selections" / cohort / seed_dir(seed) / (detector + ".csv");
}

fs::path ArtifactPaths::scores_dir(const std::string& cohort, std::uint64_t seed,
                                   const std::string& detector,
                                   const std::string& strategy) const {
    return root / "scores" / cohort / seed_dir(seed) / detector / strategy;
}

fs::path ArtifactPaths::member_csv(const std::string& cohort, std::uint64_t seed,
                                   const std::string& member) const {
    return root / "ensemble" / cohort / seed_dir(seed) / "members" / (member + ".csv");
}

fs::path ArtifactPaths::combined_csv(const std::string& cohort, std::uint64_t seed) const {
    return root / "ensemble" / cohort / seed_dir(seed) / "combined.csv";
}

fs::path ArtifactPaths::evaluation_csv(const std::string& cohort, std::uint64_t seed) const {
    return root / "evaluations" / cohort / (seed_dir(seed) + ".csv");
}

fs::path ArtifactPaths::ensemble_roc_csv(const std::string& cohort, std::uint64_t seed) const {
    return root / "evaluations" / cohort / (seed_dir(seed) + "_ensemble_roc.csv");
}

bool is_stage_name(const std::string& name) {
    return std::find_if(kStageNames.begin(), kStageNames.end(),
                        [&](const char* s) { return name == s; }) != kStageNames.end();
}

bool run_stage(const cfg::RunConfig& config, const std::string& stage) {
    const auto it = std::find_if(kStageNames.begin(), kStageNames.end(),
                                 [&](const char* s) { return stage == s; });
    if (it == kStageNames.end())
        throw ValidationError("unknown stage '" + stage + "'");
    const ArtifactPaths paths(config.out_dir);
    fs::create_directories(paths.root);

    const std::string hash = hash_hex(cfg::config_hash(config));
    Ledger ledger = load_ledger(paths.ledger(), hash);
    if (ledger.config_hash != hash) {
        // Different run identity in this output directory: every completion
        // mark is stale, as is the audit log.
        ledger.config_hash = hash;
        ledger.stages.clear();
        fs::remove(paths.audit_log());
    }
    if (ledger.stages.count(stage))
        return false; // completed for this config hash; never recomputed

    const auto index = static_cast<std::size_t>(it - kStageNames.begin());
    if (index > 0 && !ledger.stages.count(kStageNames[index - 1]))
        throw DependencyError("stage '" + stage + "' requires completed stage '" +
                              kStageNames[index - 1] + "'");

    run_stage_body(config, paths, stage);
    ledger.stages[stage] = true;
    save_ledger(paths.ledger(), ledger);
    return true;
}

eval::ResultTable run_pipeline(const cfg::RunConfig& config) {
    for (const char* stage : kStageNames)
        run_stage(config, stage);
    return read_mean_methods_table(config);
}

eval::ResultTable read_methods_table(const cfg::RunConfig& config, std::uint64_t seed) {
    const ArtifactPaths paths(config.out_dir);
    const std::string strategy = sel::to_string(config.ensemble_strategy);
    eval::ResultTable table;
    for (const auto& spec : config.detectors)
        table.methods.push_back(spec.id);
    table.methods.push_back("ensemble");
    for (const auto& cohort : config.cohorts)
        table.cohorts.push_back(cohort.name);
    table.cells.assign(table.methods.size(), {});
    for (auto& row : table.cells)
        row.resize(table.cohorts.size());
    for (std::size_t c = 0; c < table.cohorts.size(); ++c) {
        const fs::path path = paths.evaluation_csv(table.cohorts[c], seed);
        const auto rows = read_evaluation_rows(path);
        for (std::size_t m = 0; m < table.methods.size(); ++m)
            table.cells[m][c] = lookup(rows, table.methods[m], strategy, path);
    }
    return table;
}

eval::ResultTable read_mean_methods_table(const cfg::RunConfig& config) {
    if (config.seeds.empty())
        throw ValidationError("no seeds configured");
    eval::ResultTable mean = read_methods_table(config, config.seeds.front());
    for (std::size_t s = 1; s < config.seeds.size(); ++s) {
        const auto table = read_methods_table(config, config.seeds[s]);
        for (std::size_t m = 0; m < mean.cells.size(); ++m)
            for (std::size_t c = 0; c < mean.cells[m].size(); ++c)
                mean.cells[m][c].auc += table.cells[m][c].auc;
    }
    for (auto& row : mean.cells)
        for (auto& cell : row)
            cell.auc /= static_cast<double>(config.seeds.size());
    return mean;
}

eval::StrategyTable read_strategy_table(const cfg::RunConfig& config, std::uint64_t seed) {
    const ArtifactPaths paths(config.out_dir);
    eval::StrategyTable table;
    for (const auto& spec : config.detectors)
        table.methods.push_back(spec.id);
    for (const auto strategy : config.strategies)
        table.strategies.push_back(strategy_label(strategy));
    table.cells.assign(table.methods.size(),
                       std::vector<double>(table.strategies.size(), 0.0));

    std::vector<std::map<EvalKey, eval::AucResult>> per_cohort;
    std::vector<fs::path> cohort_paths;
    for (const auto& cohort : config.cohorts) {
        cohort_paths.push_back(paths.evaluation_csv(cohort.name, seed));
        per_cohort.push_back(read_evaluation_rows(cohort_paths.back()));
    }
    for (std::size_t m = 0; m < config.detectors.size(); ++m) {
        const auto& spec = config.detectors[m];
        for (std::size_t s = 0; s < config.strategies.size(); ++s) {
            if (!det::is_gradient_kind(spec.kind)) {
                // A single-checkpoint detector gives every strategy the same
                // answer; the comparison carries no information.
                table.cells[m][s] = std::numeric_limits<double>::quiet_NaN();
                continue;
            }
            const std::string name = sel::to_string(config.strategies[s]);
            double sum = 0.0;
            for (std::size_t c = 0; c < per_cohort.size(); ++c)
                sum += lookup(per_cohort[c], spec.id, name, cohort_paths[c]).auc;
            table.cells[m][s] = sum / static_cast<double>(per_cohort.size());
        }
    }
    return table;
}

eval::StrategyTable read_mean_strategy_table(const cfg::RunConfig& config) {
    if (config.seeds.empty())
        throw ValidationError("no seeds configured");
    eval::StrategyTable mean = read_strategy_table(config, config.seeds.front());
    for (std::size_t s = 1; s < config.seeds.size(); ++s) {
        const auto table = read_strategy_table(config, config.seeds[s]);
        for (std::size_t m = 0; m < mean.cells.size(); ++m)
            for (std::size_t c = 0; c < mean.cells[m].size(); ++c)
                mean.cells[m][c] += table.cells[m][c];
    }
    for (auto& row : mean.cells)
        for (auto& cell : row)
            cell /= static_cast<double>(config.seeds.size());
    return mean;
}

} // namespace adkit::pipe
