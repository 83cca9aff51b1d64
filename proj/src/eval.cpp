#include "adkit/eval.hpp"

#include "adkit/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include <json.hpp>

namespace adkit::eval {

namespace {

void check_scores(std::span<const double> scores, const char* which) {
    if (scores.empty())
        throw ValidationError(std::string("roc_auc: empty ") + which + " score vector");
    for (const double s : scores)
        if (!std::isfinite(s))
            throw ValidationError(std::string("roc_auc: non-finite ") + which + " score");
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

} // namespace

AucResult roc_auc(std::span<const double> normal_scores,
                  std::span<const double> abnormal_scores) {
    check_scores(normal_scores, "normal");
    check_scores(abnormal_scores, "abnormal");

    struct Tagged {
        double score;
        bool abnormal;
    };
    std::vector<Tagged> pool;
    pool.reserve(normal_scores.size() + abnormal_scores.size());
    for (const double s : normal_scores) pool.push_back({s, false});
    for (const double s : abnormal_scores) pool.push_back({s, true});
    std::sort(pool.begin(), pool.end(),
              [](const Tagged& a, const Tagged& b) { return a.score < b.score; });

    // Midranks over tie groups; sum the abnormal ranks.
    double abnormal_rank_sum = 0.0;
    std::size_t i = 0;
    while (i < pool.size()) {
        std::size_t j = i;
        while (j < pool.size() && pool[j].score == pool[i].score) ++j;
        const double midrank = 0.5 * static_cast<double>(i + 1 + j); // (i+1 + j) / 2
        for (std::size_t k = i; k < j; ++k)
            if (pool[k].abnormal) abnormal_rank_sum += midrank;
        i = j;
    }

    const auto n = static_cast<double>(normal_scores.size());
    const auto m = static_cast<double>(abnormal_scores.size());
    const double u = abnormal_rank_sum - m * (m + 1.0) / 2.0;

    AucResult result;
    result.auc = u / (n * m);
    result.n_normal = normal_scores.size();
    result.n_abnormal = abnormal_scores.size();
    return result;
}

std::vector<RocPoint> roc_curve(std::span<const double> normal_scores,
                                std::span<const double> abnormal_scores) {
    check_scores(normal_scores, "normal");
    check_scores(abnormal_scores, "abnormal");

    std::vector<double> thresholds;
    thresholds.reserve(normal_scores.size() + abnormal_scores.size());
    thresholds.insert(thresholds.end(), normal_scores.begin(), normal_scores.end());
    thresholds.insert(thresholds.end(), abnormal_scores.begin(), abnormal_scores.end());
    std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
    thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

    std::vector<RocPoint> curve;
    curve.reserve(thresholds.size() + 1);
    curve.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
    const auto n = static_cast<double>(normal_scores.size());
    const auto m = static_cast<double>(abnormal_scores.size());
    for (const double t : thresholds) {
        double fp = 0.0, tp = 0.0;
        for (const double s : normal_scores)
            if (s >= t) fp += 1.0;
        for (const double s : abnormal_scores)
            if (s >= t) tp += 1.0;
        curve.push_back({t, fp / n, tp / m});
    }
    return curve;
}

void write_roc_csv(const std::vector<RocPoint>& curve,
                   const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("roc: cannot open for writing " + path.string());
    out << "threshold,fpr,tpr\n";
    for (const auto& pt : curve) {
        if (std::isinf(pt.threshold))
            out << "inf";
        else
            out << fmt(pt.threshold);
        out << "," << fmt(pt.fpr) << "," << fmt(pt.tpr) << "\n";
    }
}

double ResultTable::average(std::size_t m) const {
    double sum = 0.0;
    for (const auto& cell : cells[m]) sum += cell.auc;
    return sum / static_cast<double>(cells[m].size());
}

std::vector<std::vector<std::size_t>> rank_methods(const ResultTable& table) {
    if (table.cells.size() != table.methods.size())
        throw ValidationError("rank_methods: row count does not match methods");
    for (const auto& row : table.cells) {
        if (row.size() != table.cohorts.size())
            throw ValidationError("rank_methods: incomplete grid");
        for (const auto& cell : row)
            if (!std::isfinite(cell.auc))
                throw ValidationError("rank_methods: missing cell");
    }

    std::vector<std::vector<std::size_t>> ranks(
        table.methods.size(), std::vector<std::size_t>(table.cohorts.size(), 1));
    for (std::size_t c = 0; c < table.cohorts.size(); ++c) {
        for (std::size_t m = 0; m < table.methods.size(); ++m) {
            std::size_t rank = 1;
            for (std::size_t o = 0; o < table.methods.size(); ++o)
                if (table.cells[o][c].auc > table.cells[m][c].auc) ++rank;
            ranks[m][c] = rank;
        }
    }
    return ranks;
}

ReportFormat parse_report_format(const std::string& token) {
    if (token == "csv") return ReportFormat::csv;
    if (token == "json") return ReportFormat::json;
    throw ValidationError("unknown report format '" + token + "'");
}

void emit_report(const ResultTable& table, ReportFormat format,
                 const std::filesystem::path& path) {
    const auto ranks = rank_methods(table); // also validates completeness
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("report: cannot open for writing " + path.string());

    if (format == ReportFormat::csv) {
        out << "method";
        for (const auto& cohort : table.cohorts) out << "," << cohort;
        out << ",average\n";
        for (std::size_t m = 0; m < table.methods.size(); ++m) {
            out << table.methods[m];
            for (std::size_t c = 0; c < table.cohorts.size(); ++c)
                out << "," << fmt(table.cells[m][c].auc);
            out << "," << fmt(table.average(m)) << "\n";
        }
    } else {
        nlohmann::ordered_json doc;
        doc["cohorts"] = table.cohorts;
        auto& rows = doc["rows"];
        rows = nlohmann::ordered_json::array();
        for (std::size_t m = 0; m < table.methods.size(); ++m) {
            nlohmann::ordered_json row;
            row["method"] = table.methods[m];
            for (std::size_t c = 0; c < table.cohorts.size(); ++c) {
                row["auc"][table.cohorts[c]] = table.cells[m][c].auc;
                row["rank"][table.cohorts[c]] = ranks[m][c];
            }
            row["average"] = table.average(m);
            rows.push_back(std::move(row));
        }
        out << doc.dump(2) << "\n";
    }
    if (!out) throw IoError("report: write failed for " + path.string());
}

void emit_strategy_report(const StrategyTable& table, ReportFormat format,
                          const std::filesystem::path& path) {
    if (table.cells.size() != table.methods.size())
        throw ValidationError("strategy report: row count does not match methods");
    for (const auto& row : table.cells)
        if (row.size() != table.strategies.size())
            throw ValidationError("strategy report: incomplete grid");

    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("report: cannot open for writing " + path.string());

    if (format == ReportFormat::csv) {
        out << "method";
        for (const auto& strategy : table.strategies) out << "," << strategy;
        out << "\n";
        for (std::size_t m = 0; m < table.methods.size(); ++m) {
            out << table.methods[m];
            for (std::size_t s = 0; s < table.strategies.size(); ++s) {
                const double v = table.cells[m][s];
                out << "," << (std::isnan(v) ? std::string("na") : fmt(v));
            }
            out << "\n";
        }
    } else {
        nlohmann::ordered_json doc;
        doc["strategies"] = table.strategies;
        auto& rows = doc["rows"];
        rows = nlohmann::ordered_json::array();
        for (std::size_t m = 0; m < table.methods.size(); ++m) {
            nlohmann::ordered_json row;
            row["method"] = table.methods[m];
            for (std::size_t s = 0; s < table.strategies.size(); ++s) {
                const double v = table.cells[m][s];
                if (std::isnan(v))
                    row["auc"][table.strategies[s]] = nullptr;
                else
                    row["auc"][table.strategies[s]] = v;
            }
            rows.push_back(std::move(row));
        }
        out << doc.dump(2) << "\n";
    }
    if (!out) throw IoError("report: write failed for " + path.string());
}

} // namespace adkit::eval
