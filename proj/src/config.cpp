#include "adkit/config.hpp"

#include "adkit/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace adkit::cfg {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::vector<std::string> split_list(const std::string& value, const std::string& key) {
    std::vector<std::string> items;
    std::string cur;
    std::istringstream in(value);
    while (std::getline(in, cur, ',')) {
        cur = trim(cur);
        if (cur.empty())
            throw ConfigError("config: empty element in list '" + key + "'");
        items.push_back(cur);
    }
    if (items.empty())
        throw ConfigError("config: list '" + key + "' is empty");
    return items;
}

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// Raw key-value pairs with consumption tracking, so leftover (unknown) keys
// can be reported after the known ones are pulled out.
class KeyMap {
public:
    void insert(const std::string& key, const std::string& value, const std::string& where) {
        if (!entries_.emplace(key, value).second)
            throw ConfigError("config: duplicate key '" + key + "' (" + where + ")");
    }

    bool has(const std::string& key) const { return entries_.count(key) != 0; }

    std::string take(const std::string& key, const std::string& fallback) {
        auto it = entries_.find(key);
        if (it == entries_.end()) return fallback;
        consumed_.insert(key);
        return it->second;
    }

    bool take_optional(const std::string& key, std::string& out) {
        auto it = entries_.find(key);
        if (it == entries_.end()) return false;
        consumed_.insert(key);
        out = it->second;
        return true;
    }

    void finish() const {
        for (const auto& [key, value] : entries_)
            if (!consumed_.count(key))
                throw ConfigError("config: unknown key '" + key + "'");
    }

private:
    std::map<std::string, std::string> entries_;
    std::set<std::string> consumed_;
};

std::uint64_t to_u64(const std::string& value, const std::string& key) {
    try {
        std::size_t used = 0;
        const unsigned long long v = std::stoull(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config: '" + key + "' expects an unsigned integer, got '" +
                          value + "'");
    }
}

std::size_t to_count(const std::string& value, const std::string& key) {
    return static_cast<std::size_t>(to_u64(value, key));
}

double to_double(const std::string& value, const std::string& key) {
    try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config: '" + key + "' expects a number, got '" + value + "'");
    }
}

KeyMap parse_pairs(const std::string& text, const std::string& origin) {
    KeyMap map;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: " + origin + " line " + std::to_string(line_no) +
                              ": expected key=value, got '" + line + "'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError("config: " + origin + " line " + std::to_string(line_no) +
                              ": empty key or value");
        map.insert(key, value, origin + " line " + std::to_string(line_no));
    }
    return map;
}

CohortSpec build_cohort(const std::string& name, KeyMap& map,
                        bool oracle_strategy_present) {
    const std::string prefix = "cohort." + name + ".";
    CohortSpec spec;
    spec.name = name;

    std::string manifest, kind_token;
    const bool has_manifest = map.take_optional(prefix + "manifest", manifest);
    const bool has_kind = map.take_optional(prefix + "kind", kind_token);
    if (has_manifest && has_kind)
        throw ConfigError("config: cohort '" + name + "' sets both manifest and kind");

    if (has_manifest) {
        spec.synthetic = false;
        spec.manifest = manifest;
    } else {
        spec.synthetic = true;
        const std::string token = has_kind ? kind_token : name;
        try {
            spec.kind = parse_cohort_kind(token);
        } catch (const ParseError&) {
            throw ConfigError("config: cohort '" + name + "': '" + token +
                              "' is not a cohort kind (structural, artifact, density) "
                              "and no manifest is given");
        }
    }

    auto& c = spec.counts;
    if (spec.synthetic) {
        // desk-scale defaults; manifest cohorts take their counts from the
        // manifest itself, so those stay zero here
        c.n_train = 60;
        c.n_val_normal = 40;
        c.n_val_abnormal = 30;
        c.n_test_normal = 60;
        c.n_test_abnormal = 60;
    }
    c.n_train = to_count(map.take(prefix + "train", std::to_string(c.n_train)),
                         prefix + "train");
    c.n_val_normal = to_count(map.take(prefix + "val_normal", std::to_string(c.n_val_normal)),
                              prefix + "val_normal");
    c.n_val_abnormal = to_count(map.take(prefix + "val_abnormal", std::to_string(c.n_val_abnormal)),
                                prefix + "val_abnormal");
    c.n_test_normal = to_count(map.take(prefix + "test_normal", std::to_string(c.n_test_normal)),
                               prefix + "test_normal");
    c.n_test_abnormal = to_count(map.take(prefix + "test_abnormal", std::to_string(c.n_test_abnormal)),
                                 prefix + "test_abnormal");

    if (spec.synthetic) {
        if (c.n_train == 0)
            throw ConfigError("config: cohort '" + name + "': train count must be >= 1");
        if (c.n_val_normal < 2)
            throw ConfigError("config: cohort '" + name + "': val_normal must be >= 2 "
                              "(score normalization needs a range)");
        if (c.n_test_normal == 0 || c.n_test_abnormal == 0)
            throw ConfigError("config: cohort '" + name + "': test counts must be >= 1");
        if (oracle_strategy_present && c.n_val_abnormal == 0)
            throw ConfigError("config: cohort '" + name + "': complete_validation needs "
                              "val_abnormal >= 1");
    }
    return spec;
}

DetectorSpec build_detector(const std::string& id, KeyMap& map, const RunConfig& run) {
    const std::string prefix = "detector." + id + ".";
    DetectorSpec spec;
    spec.id = id;

    const std::string kind_token = map.take(prefix + "kind", id);
    try {
        spec.kind = det::parse_detector_kind(kind_token);
    } catch (const ParseError&) {
        throw ConfigError("config: detector '" + id + "': '" + kind_token +
                          "' is not a detector kind (set detector." + id + ".kind)");
    }

    spec.config = det::default_config(spec.kind);
    spec.config.batch_size = run.batch;
    std::string v;
    if (map.take_optional(prefix + "lr", v))
        spec.config.learning_rate = to_double(v, prefix + "lr");
    if (map.take_optional(prefix + "batch", v))
        spec.config.batch_size = to_count(v, prefix + "batch");
    if (map.take_optional(prefix + "hidden1", v))
        spec.config.hidden1 = to_count(v, prefix + "hidden1");
    if (map.take_optional(prefix + "hidden2", v))
        spec.config.hidden2 = to_count(v, prefix + "hidden2");
    if (map.take_optional(prefix + "bottleneck", v))
        spec.config.bottleneck = to_count(v, prefix + "bottleneck");
    if (map.take_optional(prefix + "feature_dim", v))
        spec.config.feature_dim = to_count(v, prefix + "feature_dim");
    if (map.take_optional(prefix + "embed_dim", v))
        spec.config.embed_dim = to_count(v, prefix + "embed_dim");
    if (map.take_optional(prefix + "lambda_elastic", v))
        spec.config.lambda_elastic = to_double(v, prefix + "lambda_elastic");
    if (map.take_optional(prefix + "latent_dim", v))
        spec.config.latent_dim = to_count(v, prefix + "latent_dim");
    if (map.take_optional(prefix + "residual_weight", v))
        spec.config.residual_weight = to_double(v, prefix + "residual_weight");

    // Training-length defaults honor each family's protocol: the
    // autoencoders follow the run-level profile, center_distance trains 20
    // epochs with checkpoints every 2, and latent_gaussian is training-free
    // (a single recorded epoch).
    switch (spec.kind) {
        case det::DetectorKind::ae_pixel:
        case det::DetectorKind::ae_feature:
            spec.epochs = run.epochs;
            spec.cadence = run.cadence;
            break;
        case det::DetectorKind::center_distance:
            spec.epochs = 20;
            spec.cadence = 2;
            break;
        case det::DetectorKind::latent_gaussian:
            spec.epochs = 1;
            spec.cadence = 1;
            break;
    }
    if (map.take_optional(prefix + "epochs", v))
        spec.epochs = to_count(v, prefix + "epochs");
    if (map.take_optional(prefix + "cadence", v))
        spec.cadence = to_count(v, prefix + "cadence");

    if (spec.cadence == 0 || spec.epochs < spec.cadence)
        throw ConfigError("config: detector '" + id + "': needs epochs >= cadence >= 1 "
                          "(epochs=" + std::to_string(spec.epochs) + ", cadence=" +
                          std::to_string(spec.cadence) + ")");
    if (spec.config.batch_size == 0)
        throw ConfigError("config: detector '" + id + "': batch must be >= 1");
    if (spec.config.learning_rate < 0.0 || !std::isfinite(spec.config.learning_rate))
        throw ConfigError("config: detector '" + id + "': bad learning rate");
    return spec;
}

template <class T, class ToString>
std::string join(const std::vector<T>& items, ToString&& to_str) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += ",";
        out += to_str(items[i]);
    }
    return out;
}

} // namespace

RunConfig parse_run_config(const std::string& text, const std::string& origin) {
    KeyMap map = parse_pairs(text, origin);
    RunConfig config;

    config.side = to_count(map.take("run.side", "32"), "run.side");
    config.epochs = to_count(map.take("run.epochs", "250"), "run.epochs");
    config.cadence = to_count(map.take("run.cadence", "25"), "run.cadence");
    config.batch = to_count(map.take("run.batch", "16"), "run.batch");
    config.out_dir = map.take("run.out", "out");

    if (config.side < 16)
        throw ConfigError("config: run.side must be >= 16");
    if (config.cadence == 0 || config.epochs < config.cadence)
        throw ConfigError("config: run needs epochs >= cadence >= 1");
    if (config.batch == 0) throw ConfigError("config: run.batch must be >= 1");

    for (const auto& token : split_list(map.take("run.seeds", "1,2,3"), "run.seeds"))
        config.seeds.push_back(to_u64(token, "run.seeds"));
    {
        std::set<std::uint64_t> unique(config.seeds.begin(), config.seeds.end());
        if (unique.size() != config.seeds.size())
            throw ConfigError("config: run.seeds contains duplicates");
    }

    for (const auto& token :
         split_list(map.take("run.strategies",
                             "last_epoch,normal_val_loss,sample_wise,complete_validation"),
                    "run.strategies")) {
        try {
            config.strategies.push_back(sel::parse_selection_strategy(token));
        } catch (const ParseError& e) {
            throw ConfigError(std::string("config: run.strategies: ") + e.what());
        }
    }
    {
        std::set<sel::SelectionStrategy> unique(config.strategies.begin(),
                                                config.strategies.end());
        if (unique.size() != config.strategies.size())
            throw ConfigError("config: run.strategies contains duplicates");
    }
    const bool oracle_present =
        std::count(config.strategies.begin(), config.strategies.end(),
                   sel::SelectionStrategy::complete_validation) != 0;

    for (const auto& token : split_list(map.take("run.report_formats", "csv,json"),
                                        "run.report_formats")) {
        try {
            config.report_formats.push_back(eval::parse_report_format(token));
        } catch (const ValidationError& e) {
            throw ConfigError(std::string("config: run.report_formats: ") + e.what());
        }
    }

    const auto cohort_names =
        split_list(map.take("run.cohorts", "structural,artifact,density"), "run.cohorts");
    {
        std::set<std::string> unique(cohort_names.begin(), cohort_names.end());
        if (unique.size() != cohort_names.size())
            throw ConfigError("config: run.cohorts contains duplicates");
    }
    for (const auto& name : cohort_names)
        config.cohorts.push_back(build_cohort(name, map, oracle_present));

    const auto detector_ids = split_list(
        map.take("run.detectors", "ae_pixel,ae_feature,center_distance,latent_gaussian"),
        "run.detectors");
    {
        std::set<std::string> unique(detector_ids.begin(), detector_ids.end());
        if (unique.size() != detector_ids.size())
            throw ConfigError("config: run.detectors contains duplicates");
    }
    for (const auto& id : detector_ids)
        config.detectors.push_back(build_detector(id, map, config));

    const std::size_t dim = config.side * config.side;
    for (const auto& spec : config.detectors) {
        if ((spec.kind == det::DetectorKind::ae_pixel ||
             spec.kind == det::DetectorKind::ae_feature) &&
            spec.config.bottleneck >= dim)
            throw ConfigError("config: detector '" + spec.id +
                              "': bottleneck must be below side^2");
        if (spec.kind == det::DetectorKind::latent_gaussian &&
            spec.config.latent_dim > dim)
            throw ConfigError("config: detector '" + spec.id +
                              "': latent_dim must be at most side^2");
    }

    std::string members;
    if (map.take_optional("run.ensemble.members", members))
        config.ensemble_members = split_list(members, "run.ensemble.members");
    else
        config.ensemble_members = detector_ids;
    {
        std::set<std::string> unique(config.ensemble_members.begin(),
                                     config.ensemble_members.end());
        if (unique.size() != config.ensemble_members.size())
            throw ConfigError("config: run.ensemble.members contains duplicates");
    }
    for (const auto& member : config.ensemble_members) {
        const bool known = std::any_of(config.detectors.begin(), config.detectors.end(),
                                       [&](const DetectorSpec& d) { return d.id == member; });
        if (!known)
            throw ConfigError("config: ensemble member '" + member +
                              "' does not name a configured detector");
    }

    std::string strategy_token;
    if (map.take_optional("run.ensemble.strategy", strategy_token)) {
        try {
            config.ensemble_strategy = sel::parse_selection_strategy(strategy_token);
        } catch (const ParseError& e) {
            throw ConfigError(std::string("config: run.ensemble.strategy: ") + e.what());
        }
    } else {
        config.ensemble_strategy = config.strategies.front();
    }
    if (std::count(config.strategies.begin(), config.strategies.end(),
                   config.ensemble_strategy) == 0)
        throw ConfigError("config: run.ensemble.strategy '" +
                          sel::to_string(config.ensemble_strategy) +
                          "' is not in run.strategies");

    map.finish();
    return config;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("config: cannot open " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_run_config(buffer.str(), path.string());
}

std::string canonical_text(const RunConfig& config) {
    std::vector<std::string> lines;
    auto add = [&](const std::string& key, const std::string& value) {
        lines.push_back(key + "=" + value);
    };

    add("run.side", std::to_string(config.side));
    add("run.epochs", std::to_string(config.epochs));
    add("run.cadence", std::to_string(config.cadence));
    add("run.batch", std::to_string(config.batch));
    add("run.seeds", join(config.seeds, [](std::uint64_t s) { return std::to_string(s); }));
    add("run.strategies", join(config.strategies, [](sel::SelectionStrategy s) {
            return sel::to_string(s);
        }));
    add("run.report_formats", join(config.report_formats, [](eval::ReportFormat f) {
            return std::string(f == eval::ReportFormat::csv ? "csv" : "json");
        }));
    add("run.cohorts",
        join(config.cohorts, [](const CohortSpec& c) { return c.name; }));
    add("run.detectors",
        join(config.detectors, [](const DetectorSpec& d) { return d.id; }));
    add("run.ensemble.members",
        join(config.ensemble_members, [](const std::string& m) { return m; }));
    add("run.ensemble.strategy", sel::to_string(config.ensemble_strategy));

    for (const auto& cohort : config.cohorts) {
        const std::string prefix = "cohort." + cohort.name + ".";
        if (cohort.synthetic) {
            add(prefix + "kind", to_string(cohort.kind));
            add(prefix + "train", std::to_string(cohort.counts.n_train));
            add(prefix + "val_normal", std::to_string(cohort.counts.n_val_normal));
            add(prefix + "val_abnormal", std::to_string(cohort.counts.n_val_abnormal));
            add(prefix + "test_normal", std::to_string(cohort.counts.n_test_normal));
            add(prefix + "test_abnormal", std::to_string(cohort.counts.n_test_abnormal));
        } else {
            add(prefix + "manifest", cohort.manifest.string());
        }
    }
    for (const auto& spec : config.detectors) {
        const std::string prefix = "detector." + spec.id + ".";
        add(prefix + "kind", det::to_string(spec.kind));
        add(prefix + "lr", fmt17(spec.config.learning_rate));
        add(prefix + "batch", std::to_string(spec.config.batch_size));
        add(prefix + "epochs", std::to_string(spec.epochs));
        add(prefix + "cadence", std::to_string(spec.cadence));
        switch (spec.kind) {
            case det::DetectorKind::ae_pixel:
                add(prefix + "hidden1", std::to_string(spec.config.hidden1));
                add(prefix + "hidden2", std::to_string(spec.config.hidden2));
                add(prefix + "bottleneck", std::to_string(spec.config.bottleneck));
                break;
            case det::DetectorKind::ae_feature:
                add(prefix + "hidden1", std::to_string(spec.config.hidden1));
                add(prefix + "hidden2", std::to_string(spec.config.hidden2));
                add(prefix + "bottleneck", std::to_string(spec.config.bottleneck));
                add(prefix + "feature_dim", std::to_string(spec.config.feature_dim));
                break;
            case det::DetectorKind::center_distance:
                add(prefix + "feature_dim", std::to_string(spec.config.feature_dim));
                add(prefix + "embed_dim", std::to_string(spec.config.embed_dim));
                add(prefix + "lambda_elastic", fmt17(spec.config.lambda_elastic));
                break;
            case det::DetectorKind::latent_gaussian:
                add(prefix + "latent_dim", std::to_string(spec.config.latent_dim));
                add(prefix + "residual_weight", fmt17(spec.config.residual_weight));
                break;
        }
    }

    std::sort(lines.begin(), lines.end());
    std::string text;
    for (const auto& line : lines) {
        text += line;
        text += "\n";
    }
    return text;
}

std::uint64_t config_hash(const RunConfig& config) {
    const std::string text = canonical_text(config);
    std::uint64_t hash = 0xcbf29ce484222325ull; // FNV-1a 64
    for (const unsigned char c : text) {
        hash ^= c;
        hash *= 0x100000001b3ull;
    }
    return hash;
}

} // namespace adkit::cfg
