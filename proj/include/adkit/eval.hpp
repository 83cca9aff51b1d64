#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace adkit::eval {

struct AucResult {
    double auc = 0.0;
    std::size_t n_normal = 0;
    std::size_t n_abnormal = 0;
};

// Tie-corrected ROC-AUC (Mann-Whitney convention, ties count half), computed
// by sort-and-midrank in O((n+m) log(n+m)). Higher scores mean more
// anomalous. Throws ValidationError on empty or non-finite input.
AucResult roc_auc(std::span<const double> normal_scores,
                  std::span<const double> abnormal_scores);

struct RocPoint {
    double threshold = 0.0; // +inf for the (0,0) starting point
    double fpr = 0.0;
    double tpr = 0.0;
};

// Monotone staircase from (0,0) to (1,1), one point per distinct threshold
// (predict abnormal when score >= threshold). The trapezoidal area equals
// roc_auc on the same scores.
std::vector<RocPoint> roc_curve(std::span<const double> normal_scores,
                                std::span<const double> abnormal_scores);

// Writes "threshold,fpr,tpr" CSV rows for external plotting.
void write_roc_csv(const std::vector<RocPoint>& curve,
                   const std::filesystem::path& path);

// Method-by-cohort grid of AUC results.
struct ResultTable {
    std::vector<std::string> methods; // row labels
    std::vector<std::string> cohorts; // column labels
    std::vector<std::vector<AucResult>> cells; // [method][cohort]

    const AucResult& cell(std::size_t m, std::size_t c) const { return cells[m][c]; }
    double average(std::size_t m) const; // unweighted mean across cohorts
};

// Competition ranking per cohort: rank 1 is the highest AUC, ties share the
// minimum rank. Throws ValidationError if the grid is incomplete.
std::vector<std::vector<std::size_t>> rank_methods(const ResultTable& table);

enum class ReportFormat { csv, json };

ReportFormat parse_report_format(const std::string& token);

// Deterministic serialization of the grid: methods as rows, cohorts as
// columns, plus a final "average" column. JSON additionally carries the
// per-cohort ranks.
void emit_report(const ResultTable& table, ReportFormat format,
                 const std::filesystem::path& path);

// Table of per-(method, strategy) mean AUC across cohorts. Cells may be
// missing (e.g. a training-free detector where epoch selection does not
// apply); missing cells serialize as "na" / null. The abnormal-leaking
// strategy column is labeled with an ":oracle" suffix.
struct StrategyTable {
    std::vector<std::string> methods;
    std::vector<std::string> strategies; // column labels, already flagged
    std::vector<std::vector<double>> cells; // NaN = not applicable
};

void emit_strategy_report(const StrategyTable& table, ReportFormat format,
                          const std::filesystem::path& path);

} // namespace adkit::eval
