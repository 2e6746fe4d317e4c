// Copyright the eager authors. Licensed under the Apache 2.0 license. See LICENSE in the project root.
#include "strsim.hpp"

#include <algorithm>
#include <limits>
#include <unordered_map>

#include "common.hpp"
#include "unicode.hpp"

namespace eager {

std::string build_profile_text(const KnowledgeGraph& kg, EntityId entity) {
    const auto& triples = kg.attrs_of(entity);  // throws on unknown entity
    std::vector<std::pair<std::string_view, std::string_view>> values;
    values.reserve(triples.size());
    for (const AttrTriple& t : triples) values.emplace_back(kg.attribute_iri(t.attr), kg.literal(t.value));
    std::sort(values.begin(), values.end());
    std::string text;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) text.push_back(' ');
        text += nfc(to_lower(values[i].second));
    }
    return text;
}

std::vector<std::string> build_profiles(const KnowledgeGraph& kg) {
    std::vector<std::string> profiles(kg.entity_count());
    parallel_for(profiles.size(), [&](std::size_t i) { profiles[i] = build_profile_text(kg, EntityId(i)); });
    return profiles;
}

std::size_t levenshtein_distance(const std::u32string& a, const std::u32string& b) {
    const std::size_t n = a.size(), m = b.size();
    if (n == 0) return m;
    if (m == 0) return n;
    std::vector<std::size_t> prev(m + 1), cur(m + 1);
    for (std::size_t j = 0; j <= m; ++j) prev[j] = j;
    for (std::size_t i = 1; i <= n; ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= m; ++j) {
            std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[m];
}

double levenshtein_sim(std::string_view a, std::string_view b) {
    std::u32string ua = utf8_decode(a), ub = utf8_decode(b);
    std::size_t longest = std::max(ua.size(), ub.size());
    if (longest == 0) return 1.0;
    return 1.0 - double(levenshtein_distance(ua, ub)) / double(longest);
}

namespace {

// Trigram multiset as packed 64-bit keys: 21 bits per scalar value plus a
// length tag, so sub-3-character strings hash as their own single gram.
void collect_grams(const std::u32string& s, std::unordered_map<uint64_t, int>& out, std::size_t& total) {
    if (s.empty()) return;
    if (s.size() < 3) {
        uint64_t key = uint64_t(s.size()) << 62;
        for (char32_t c : s) key = (key << 21) | (uint64_t(c) & 0x1FFFFF);
        ++out[key];
        ++total;
        return;
    }
    for (std::size_t i = 0; i + 3 <= s.size(); ++i) {
        uint64_t key = (uint64_t(3) << 62) | ((uint64_t(s[i]) & 0x1FFFFF) << 42) |
                       ((uint64_t(s[i + 1]) & 0x1FFFFF) << 21) | (uint64_t(s[i + 2]) & 0x1FFFFF);
        ++out[key];
        ++total;
    }
}

}  // namespace

double trigram_dice_sim(std::string_view a, std::string_view b) {
    std::u32string ua = utf8_decode(a), ub = utf8_decode(b);
    if (ua.empty() && ub.empty()) return 1.0;
    std::unordered_map<uint64_t, int> ga, gb;
    std::size_t na = 0, nb = 0;
    collect_grams(ua, ga, na);
    collect_grams(ub, gb, nb);
    if (na + nb == 0) return 1.0;
    std::size_t inter = 0;
    for (const auto& [key, count] : ga) {
        auto it = gb.find(key);
        if (it != gb.end()) inter += std::size_t(std::min(count, it->second));
    }
    return 2.0 * double(inter) / double(na + nb);
}

std::vector<std::u32string> alnum_tokenize(std::string_view s) {
    std::vector<std::u32string> tokens;
    std::u32string cur;
    for (char32_t cp : utf8_decode(s)) {
        if (is_alnum(cp)) {
            cur.push_back(cp);
        } else if (!cur.empty()) {
            tokens.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) tokens.push_back(std::move(cur));
    return tokens;
}

double jaro_sim(const std::u32string& a, const std::u32string& b) {
    const std::size_t la = a.size(), lb = b.size();
    if (la == 0 && lb == 0) return 1.0;
    if (la == 0 || lb == 0) return 0.0;
    const std::size_t window = std::max(la, lb) / 2 == 0 ? 0 : std::max(la, lb) / 2 - 1;
    std::vector<char> a_match(la, 0), b_match(lb, 0);
    std::size_t m = 0;
    for (std::size_t i = 0; i < la; ++i) {
        std::size_t lo = i > window ? i - window : 0;
        std::size_t hi = std::min(lb, i + window + 1);
        for (std::size_t j = lo; j < hi; ++j) {
            if (!b_match[j] && a[i] == b[j]) {
                a_match[i] = b_match[j] = 1;
                ++m;
                break;
            }
        }
    }
    if (m == 0) return 0.0;
    std::size_t transpositions = 0, j = 0;
    for (std::size_t i = 0; i < la; ++i) {
        if (!a_match[i]) continue;
        while (!b_match[j]) ++j;
        if (a[i] != b[j]) ++transpositions;
        ++j;
    }
    double dm = double(m);
    return (dm / double(la) + dm / double(lb) + (dm - double(transpositions) / 2.0) / dm) / 3.0;
}

namespace {

constexpr double kGjThreshold = 0.5;

struct Candidate {
    double sim;
    std::size_t i, j;
};

double gj_greedy(const std::vector<std::vector<double>>& sims, std::size_t nx, std::size_t ny) {
    std::vector<Candidate> cands;
    for (std::size_t i = 0; i < nx; ++i)
        for (std::size_t j = 0; j < ny; ++j)
            if (sims[i][j] >= kGjThreshold) cands.push_back({sims[i][j], i, j});
    // Ties broken by (left index, right index) so the matching is total-order
    // deterministic.
    std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
        if (a.sim != b.sim) return a.sim > b.sim;
        if (a.i != b.i) return a.i < b.i;
        return a.j < b.j;
    });
    std::vector<char> used_x(nx, 0), used_y(ny, 0);
    double sum = 0.0;
    std::size_t matched = 0;
    for (const Candidate& c : cands) {
        if (used_x[c.i] || used_y[c.j]) continue;
        used_x[c.i] = used_y[c.j] = 1;
        sum += c.sim;
        ++matched;
    }
    return sum / double(nx + ny - matched);
}

// Max-weight assignment via the potentials form of the Hungarian method on
// the (rows <= cols) matrix; pairs below the threshold carry weight 0 and do
// not count as matched.
double gj_optimal(const std::vector<std::vector<double>>& sims, std::size_t nx, std::size_t ny) {
    bool swapped = nx > ny;
    const std::size_t n = swapped ? ny : nx;
    const std::size_t m = swapped ? nx : ny;
    auto weight = [&](std::size_t r, std::size_t c) {
        double s = swapped ? sims[c][r] : sims[r][c];
        return s >= kGjThreshold ? s : 0.0;
    };
    const double inf = std::numeric_limits<double>::infinity();
    // Minimize cost = -weight.
    std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
    std::vector<std::size_t> match_col(m + 1, 0);  // col -> row (1-based; 0 = free)
    for (std::size_t r = 1; r <= n; ++r) {
        match_col[0] = r;
        std::size_t j0 = 0;
        std::vector<double> minv(m + 1, inf);
        std::vector<char> used(m + 1, 0);
        std::vector<std::size_t> way(m + 1, 0);
        do {
            used[j0] = 1;
            std::size_t r0 = match_col[j0], j1 = 0;
            double delta = inf;
            for (std::size_t j = 1; j <= m; ++j) {
                if (used[j]) continue;
                double cur = -weight(r0 - 1, j - 1) - u[r0] - v[j];
                if (cur < minv[j]) { minv[j] = cur; way[j] = j0; }
                if (minv[j] < delta) { delta = minv[j]; j1 = j; }
            }
            for (std::size_t j = 0; j <= m; ++j) {
                if (used[j]) { u[match_col[j]] += delta; v[j] -= delta; }
                else minv[j] -= delta;
            }
            j0 = j1;
        } while (match_col[j0] != 0);
        do {
            std::size_t j1 = way[j0];
            match_col[j0] = match_col[j1];
            j0 = j1;
        } while (j0);
    }
    std::vector<std::size_t> row_to_col(n + 1, 0);
    for (std::size_t j = 1; j <= m; ++j)
        if (match_col[j]) row_to_col[match_col[j]] = j;
    double sum = 0.0;
    std::size_t matched = 0;
    for (std::size_t r = 1; r <= n; ++r) {
        if (!row_to_col[r]) continue;
        double w = weight(r - 1, row_to_col[r] - 1);
        if (w >= kGjThreshold) { sum += w; ++matched; }
    }
    return sum / double(nx + ny - matched);
}

}  // namespace

double generalized_jaccard_sim(std::string_view a, std::string_view b, GjMatching matching) {
    std::vector<std::u32string> x = alnum_tokenize(a), y = alnum_tokenize(b);
    if (x.empty() && y.empty()) return 1.0;
    if (x.empty() || y.empty()) return 0.0;
    std::vector<std::vector<double>> sims(x.size(), std::vector<double>(y.size()));
    for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t j = 0; j < y.size(); ++j) sims[i][j] = jaro_sim(x[i], y[j]);
    return matching == GjMatching::greedy ? gj_greedy(sims, x.size(), y.size())
                                          : gj_optimal(sims, x.size(), y.size());
}

SimVector attr_feature_vector(std::string_view profile1, std::string_view profile2, GjMatching matching) {
    return {levenshtein_sim(profile1, profile2), generalized_jaccard_sim(profile1, profile2, matching),
            trigram_dice_sim(profile1, profile2)};
}

}  // namespace eager
