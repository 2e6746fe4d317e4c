// Copyright the eager authors. Licensed under the Apache 2.0 license. See LICENSE in the project root.
#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace eager {

struct PRF {
    double precision = 0.0;
    double recall = 0.0;
    double f_measure = 0.0;
    uint64_t tp = 0, fp = 0, fn = 0, tn = 0;
};

// Binary P/R/F with match (1) as the positive class. Zero denominators yield
// zero, and F = 2PR/(P+R) when P+R > 0, else 0.
PRF prf(std::span<const int> labels, std::span<const int> predictions);

// P/R/F restricted to each type's pairs; every pair must carry a type.
std::map<std::string, PRF> per_type_prf(std::span<const int> labels, std::span<const int> predictions,
                                        std::span<const std::string> types);

// Dense N x k score matrix (datasets x methods).
struct ScoreMatrix {
    std::size_t n_rows = 0, n_cols = 0;
    std::vector<double> values;

    double at(std::size_t r, std::size_t c) const { return values[r * n_cols + c]; }
    double& at(std::size_t r, std::size_t c) { return values[r * n_cols + c]; }
};

// Per-dataset ranks (1 = best, ties averaged), averaged over datasets.
std::vector<double> average_ranks(const ScoreMatrix& scores, bool higher_is_better = true);

struct FriedmanResult {
    double chi2 = 0.0;
    double p = 1.0;
    // Iman-Davenport F refinement, reported alongside the base statistic.
    double iman_davenport_f = 0.0;
    double iman_davenport_p = 1.0;
};

// chi2_F = 12N/(k(k+1)) (sum_j R_j^2 - k(k+1)^2/4) with tie-averaged ranks;
// p from the chi-square survival function with k-1 degrees of freedom.
FriedmanResult friedman_test(const ScoreMatrix& scores, bool higher_is_better = true);

// Critical distance q_alpha(k) sqrt(k(k+1)/(6N)); alpha in {0.05, 0.10},
// k in [2, 20] (the embedded critical-value table).
double nemenyi_cd(int k, std::size_t n_datasets, double alpha);

// Maximal groups of methods whose pairwise average-rank differences are all
// below cd (maximal cliques of the induced interval graph). Each group lists
// method indices ordered by rank; singleton groups are included.
std::vector<std::vector<int>> nemenyi_groups(const std::vector<double>& avg_ranks, double cd);

struct RankReport {
    std::vector<std::string> methods;
    std::vector<std::string> datasets;
    ScoreMatrix scores;
    std::vector<double> avg_ranks;
    double friedman_chi2 = 0.0;
    double friedman_p = 1.0;
    double iman_davenport_f = 0.0;
    double iman_davenport_p = 1.0;
    double cd = 0.0;
    double alpha = 0.05;
    std::vector<std::vector<int>> groups;

    nlohmann::json to_json() const;
};

RankReport make_rank_report(std::vector<std::string> methods, std::vector<std::string> datasets,
                            ScoreMatrix scores, double alpha, bool higher_is_better = true);

// CSV with a header row of method names; the first column holds dataset
// names.
void read_scores_csv(const std::string& path, std::vector<std::string>& methods,
                     std::vector<std::string>& datasets, ScoreMatrix& scores);

// Standalone SVG critical-distance diagram: rank axis, one labeled tick per
// method, bars connecting groups that are not separated by cd, and a CD
// ruler. Byte output is deterministic for fixed inputs.
void write_cd_diagram(const RankReport& report, const std::string& path);
std::string render_cd_diagram(const RankReport& report);

}  // namespace eager
