// Copyright the eager authors. Licensed under the Apache 2.0 license. See LICENSE in the project root.
#include "evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <numeric>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/fisher_f.hpp>
#include <nlohmann/json.hpp>

#include "common.hpp"
#include "csv.hpp"

namespace eager {

PRF prf(std::span<const int> labels, std::span<const int> predictions) {
    if (labels.size() != predictions.size())
        throw Error::invalid("prf: ", labels.size(), " labels vs ", predictions.size(), " predictions");
    if (labels.empty()) throw Error::invalid("prf: empty input");
    PRF out;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const bool truth = labels[i] != 0, pred = predictions[i] != 0;
        if (truth && pred) ++out.tp;
        else if (!truth && pred) ++out.fp;
        else if (truth && !pred) ++out.fn;
        else ++out.tn;
    }
    out.precision = out.tp + out.fp ? double(out.tp) / double(out.tp + out.fp) : 0.0;
    out.recall = out.tp + out.fn ? double(out.tp) / double(out.tp + out.fn) : 0.0;
    out.f_measure = out.precision + out.recall > 0.0
                        ? 2.0 * out.precision * out.recall / (out.precision + out.recall)
                        : 0.0;
    return out;
}

std::map<std::string, PRF> per_type_prf(std::span<const int> labels, std::span<const int> predictions,
                                        std::span<const std::string> types) {
    if (labels.size() != predictions.size() || labels.size() != types.size())
        throw Error::invalid("per_type_prf: length mismatch");
    std::map<std::string, std::pair<std::vector<int>, std::vector<int>>> buckets;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (types[i].empty()) throw Error::invalid("per_type_prf: pair ", i, " has no type");
        auto& [l, p] = buckets[types[i]];
        l.push_back(labels[i]);
        p.push_back(predictions[i]);
    }
    std::map<std::string, PRF> out;
    for (const auto& [type, lp] : buckets) out.emplace(type, prf(lp.first, lp.second));
    return out;
}

namespace {

// Tie-averaged ranks of one row; rank 1 goes to the best score.
std::vector<double> row_ranks(const ScoreMatrix& scores, std::size_t r, bool higher_is_better) {
    const std::size_t k = scores.n_cols;
    std::vector<int> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        double va = scores.at(r, std::size_t(a)), vb = scores.at(r, std::size_t(b));
        return higher_is_better ? va > vb : va < vb;
    });
    std::vector<double> ranks(k);
    std::size_t i = 0;
    while (i < k) {
        std::size_t j = i;
        while (j + 1 < k &&
               scores.at(r, std::size_t(order[j + 1])) == scores.at(r, std::size_t(order[i])))
            ++j;
        const double avg = (double(i + 1) + double(j + 1)) / 2.0;
        for (std::size_t m = i; m <= j; ++m) ranks[std::size_t(order[m])] = avg;
        i = j + 1;
    }
    return ranks;
}

void check_matrix(const ScoreMatrix& scores, std::size_t min_rows) {
    if (scores.n_rows < min_rows || scores.n_cols < 2)
        throw Error::invalid("score matrix needs at least ", min_rows, " datasets and 2 methods, got ",
                             scores.n_rows, "x", scores.n_cols);
    if (scores.values.size() != scores.n_rows * scores.n_cols)
        throw Error::invalid("score matrix shape mismatch");
    for (double v : scores.values)
        if (!std::isfinite(v)) throw Error::invalid("score matrix contains a non-finite entry");
}

}  // namespace

std::vector<double> average_ranks(const ScoreMatrix& scores, bool higher_is_better) {
    check_matrix(scores, 1);
    std::vector<double> sums(scores.n_cols, 0.0);
    for (std::size_t r = 0; r < scores.n_rows; ++r) {
        std::vector<double> ranks = row_ranks(scores, r, higher_is_better);
        for (std::size_t c = 0; c < scores.n_cols; ++c) sums[c] += ranks[c];
    }
    for (double& s : sums) s /= double(scores.n_rows);
    return sums;
}

FriedmanResult friedman_test(const ScoreMatrix& scores, bool higher_is_better) {
    check_matrix(scores, 2);
    const double N = double(scores.n_rows), k = double(scores.n_cols);
    std::vector<double> ranks = average_ranks(scores, higher_is_better);
    double sum_sq = 0.0;
    for (double r : ranks) sum_sq += r * r;
    FriedmanResult out;
    out.chi2 = 12.0 * N / (k * (k + 1.0)) * (sum_sq - k * (k + 1.0) * (k + 1.0) / 4.0);
    if (out.chi2 < 0.0) out.chi2 = 0.0;  // guard fp noise on fully tied inputs
    boost::math::chi_squared chi2_dist(k - 1.0);
    out.p = boost::math::cdf(boost::math::complement(chi2_dist, out.chi2));

    const double denom = N * (k - 1.0) - out.chi2;
    if (denom <= 0.0) {
        out.iman_davenport_f = std::numeric_limits<double>::infinity();
        out.iman_davenport_p = 0.0;
    } else {
        out.iman_davenport_f = (N - 1.0) * out.chi2 / denom;
        boost::math::fisher_f f_dist(k - 1.0, (k - 1.0) * (N - 1.0));
        out.iman_davenport_p = boost::math::cdf(boost::math::complement(f_dist, out.iman_davenport_f));
    }
    return out;
}

namespace {

// Two-tailed Nemenyi critical values (studentized range quantile / sqrt(2))
// for k = 2..20 methods.
constexpr double kNemenyiQ05[] = {1.959964233, 2.343700476, 2.569032073, 2.727774717, 2.849705382,
                                  2.948319908, 3.030878867, 3.101730260, 3.163683420, 3.218653901,
                                  3.268003591, 3.312738701, 3.353617959, 3.391230382, 3.426041249,
                                  3.458424619, 3.488684546, 3.517072762, 3.543799277};
constexpr double kNemenyiQ10[] = {1.644853971, 2.052292580, 2.291341341, 2.459516082, 2.588520643,
                                  2.692731919, 2.779883537, 2.854606339, 2.919888558, 2.977768077,
                                  3.029694463, 3.076733328, 3.119693155, 3.159198949, 3.195743642,
                                  3.229723658, 3.261461439, 3.291224351, 3.319233508};

}  // namespace

double nemenyi_cd(int k, std::size_t n_datasets, double alpha) {
    if (k < 2 || k > 20)
        throw Error::invalid("Nemenyi critical values are tabulated for 2..20 methods, got ", k);
    if (n_datasets < 1) throw Error::invalid("Nemenyi test needs at least one dataset");
    const double* table;
    if (std::abs(alpha - 0.05) < 1e-12) table = kNemenyiQ05;
    else if (std::abs(alpha - 0.10) < 1e-12) table = kNemenyiQ10;
    else throw Error::invalid("alpha must be 0.05 or 0.10, got ", alpha);
    const double q = table[k - 2];
    return q * std::sqrt(double(k) * double(k + 1) / (6.0 * double(n_datasets)));
}

std::vector<std::vector<int>> nemenyi_groups(const std::vector<double>& avg_ranks, double cd) {
    const std::size_t k = avg_ranks.size();
    std::vector<int> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (avg_ranks[std::size_t(a)] != avg_ranks[std::size_t(b)])
            return avg_ranks[std::size_t(a)] < avg_ranks[std::size_t(b)];
        return a < b;
    });
    // On ranks sorted ascending a clique is a contiguous run with
    // max - min < cd, so the maximal cliques are the runs whose right end
    // strictly grows.
    std::vector<std::vector<int>> groups;
    std::size_t prev_end = 0;
    for (std::size_t i = 0; i < k; ++i) {
        std::size_t j = i;
        while (j + 1 < k &&
               avg_ranks[std::size_t(order[j + 1])] - avg_ranks[std::size_t(order[i])] < cd)
            ++j;
        if (groups.empty() || j + 1 > prev_end) {
            groups.emplace_back(order.begin() + long(i), order.begin() + long(j + 1));
            prev_end = j + 1;
        }
    }
    return groups;
}

RankReport make_rank_report(std::vector<std::string> methods, std::vector<std::string> datasets,
                            ScoreMatrix scores, double alpha, bool higher_is_better) {
    if (methods.size() != scores.n_cols || datasets.size() != scores.n_rows)
        throw Error::invalid("rank report: name lists do not match the matrix shape");
    RankReport report;
    report.methods = std::move(methods);
    report.datasets = std::move(datasets);
    report.avg_ranks = average_ranks(scores, higher_is_better);
    FriedmanResult fr = friedman_test(scores, higher_is_better);
    report.friedman_chi2 = fr.chi2;
    report.friedman_p = fr.p;
    report.iman_davenport_f = fr.iman_davenport_f;
    report.iman_davenport_p = fr.iman_davenport_p;
    report.cd = nemenyi_cd(int(scores.n_cols), scores.n_rows, alpha);
    report.alpha = alpha;
    report.groups = nemenyi_groups(report.avg_ranks, report.cd);
    report.scores = std::move(scores);
    return report;
}

nlohmann::json RankReport::to_json() const {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t r = 0; r < scores.n_rows; ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (std::size_t c = 0; c < scores.n_cols; ++c) row.push_back(scores.at(r, c));
        rows.push_back(std::move(row));
    }
    return {{"methods", methods},
            {"datasets", datasets},
            {"scores", std::move(rows)},
            {"avg_ranks", avg_ranks},
            {"friedman_chi2", friedman_chi2},
            {"friedman_p", friedman_p},
            {"iman_davenport_f", std::isfinite(iman_davenport_f) ? nlohmann::json(iman_davenport_f)
                                                                 : nlohmann::json("inf")},
            {"iman_davenport_p", iman_davenport_p},
            {"cd", cd},
            {"alpha", alpha},
            {"groups", groups}};
}

void read_scores_csv(const std::string& path, std::vector<std::string>& methods,
                     std::vector<std::string>& datasets, ScoreMatrix& scores) {
    CsvTable csv = read_csv(path);
    if (csv.header.size() < 3)
        throw Error::invalid(path, ": expected a dataset column plus at least 2 method columns");
    methods.assign(csv.header.begin() + 1, csv.header.end());
    datasets.clear();
    scores = ScoreMatrix{csv.rows.size(), methods.size(), {}};
    scores.values.resize(scores.n_rows * scores.n_cols);
    for (std::size_t r = 0; r < csv.rows.size(); ++r) {
        datasets.push_back(csv.rows[r][0]);
        for (std::size_t c = 0; c < methods.size(); ++c) {
            const std::string& cell = csv.rows[r][c + 1];
            char* end = nullptr;
            double v = std::strtod(cell.c_str(), &end);
            if (end == cell.c_str() || *end != '\0')
                throw Error::invalid(path, ": row ", r + 2, ": malformed score '", cell, "'");
            scores.at(r, c) = v;
        }
    }
}

namespace {

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

std::string fmt(double v, const char* spec = "%.1f") {
    char buf[48];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

}  // namespace

std::string render_cd_diagram(const RankReport& report) {
    const std::size_t k = report.methods.size();
    const double margin = 180.0, axis_y = 70.0;
    const double width = 760.0;
    const double span = width - 2.0 * margin;
    auto x_of = [&](double rank) { return margin + (rank - 1.0) / double(k - 1) * span; };

    std::vector<int> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (report.avg_ranks[std::size_t(a)] != report.avg_ranks[std::size_t(b)])
            return report.avg_ranks[std::size_t(a)] < report.avg_ranks[std::size_t(b)];
        return a < b;
    });

    // Bars for groups of two or more methods, stacked to avoid overlap.
    std::vector<std::pair<double, double>> bars;
    for (const auto& g : report.groups) {
        if (g.size() < 2) continue;
        double lo = report.avg_ranks[std::size_t(g.front())];
        double hi = report.avg_ranks[std::size_t(g.back())];
        bars.emplace_back(lo, hi);
    }

    const std::size_t left_count = (k + 1) / 2;
    const double label_dy = 18.0;
    const double bars_base = axis_y + 14.0;
    const double labels_base = bars_base + double(bars.size()) * 8.0 + 16.0;
    const double height = labels_base + double(std::max(left_count, k - left_count)) * label_dy + 20.0;

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(width) + "\" height=\"" + fmt(height) +
           "\" viewBox=\"0 0 " + fmt(width) + " " + fmt(height) + "\">\n";
    svg += "<style>text{font-family:Helvetica,Arial,sans-serif;font-size:12px;}</style>\n";

    // Rank axis with integer ticks.
    svg += "<line x1=\"" + fmt(x_of(1)) + "\" y1=\"" + fmt(axis_y) + "\" x2=\"" + fmt(x_of(double(k))) +
           "\" y2=\"" + fmt(axis_y) + "\" stroke=\"black\" stroke-width=\"1.5\"/>\n";
    for (std::size_t t = 1; t <= k; ++t) {
        double x = x_of(double(t));
        svg += "<line x1=\"" + fmt(x) + "\" y1=\"" + fmt(axis_y - 5) + "\" x2=\"" + fmt(x) + "\" y2=\"" +
               fmt(axis_y) + "\" stroke=\"black\"/>\n";
        svg += "<text x=\"" + fmt(x) + "\" y=\"" + fmt(axis_y - 10) + "\" text-anchor=\"middle\">" +
               std::to_string(t) + "</text>\n";
    }

    // CD ruler.
    if (k >= 2) {
        double x0 = x_of(1.0), x1 = x_of(std::min(1.0 + report.cd, double(k)));
        svg += "<line x1=\"" + fmt(x0) + "\" y1=\"" + fmt(axis_y - 40) + "\" x2=\"" + fmt(x1) + "\" y2=\"" +
               fmt(axis_y - 40) + "\" stroke=\"black\"/>\n";
        for (double xx : {x0, x1})
            svg += "<line x1=\"" + fmt(xx) + "\" y1=\"" + fmt(axis_y - 44) + "\" x2=\"" + fmt(xx) +
                   "\" y2=\"" + fmt(axis_y - 36) + "\" stroke=\"black\"/>\n";
        svg += "<text x=\"" + fmt((x0 + x1) / 2.0) + "\" y=\"" + fmt(axis_y - 48) +
               "\" text-anchor=\"middle\">CD = " + fmt(report.cd, "%.3f") + "</text>\n";
    }

    for (std::size_t b = 0; b < bars.size(); ++b) {
        double y = bars_base + double(b) * 8.0;
        svg += "<line x1=\"" + fmt(x_of(bars[b].first) - 3) + "\" y1=\"" + fmt(y) + "\" x2=\"" +
               fmt(x_of(bars[b].second) + 3) + "\" y2=\"" + fmt(y) +
               "\" stroke=\"black\" stroke-width=\"4\"/>\n";
    }

    // Method labels: best half on the left, rest on the right, with
    // connectors down from their axis positions.
    for (std::size_t i = 0; i < k; ++i) {
        int m = order[i];
        double rank = report.avg_ranks[std::size_t(m)];
        double x = x_of(rank);
        bool left = i < left_count;
        std::size_t slot = left ? i : k - 1 - i;
        double ly = labels_base + double(slot) * label_dy;
        double lx = left ? margin - 12.0 : width - margin + 12.0;
        svg += "<polyline fill=\"none\" stroke=\"black\" points=\"" + fmt(x) + "," + fmt(axis_y) + " " +
               fmt(x) + "," + fmt(ly) + " " + fmt(lx) + "," + fmt(ly) + "\"/>\n";
        svg += "<text x=\"" + fmt(left ? lx - 4.0 : lx + 4.0) + "\" y=\"" + fmt(ly + 4.0) +
               "\" text-anchor=\"" + (left ? "end" : "start") + "\">" + xml_escape(report.methods[std::size_t(m)]) +
               " (" + fmt(rank, "%.3f") + ")</text>\n";
    }
    svg += "</svg>\n";
    return svg;
}

void write_cd_diagram(const RankReport& report, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error::io("cannot write diagram: ", path);
    out << render_cd_diagram(report);
    if (!out) throw Error::io("failed writing diagram: ", path);
}

}  // namespace eager
