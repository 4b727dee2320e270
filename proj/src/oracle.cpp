#include "simtol/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace simtol::oracle {

namespace {

std::vector<std::u32string> split_words(std::u32string_view s) {
    std::vector<std::u32string> out;
    size_t i = 0;
    auto ws = [](char32_t c) {
        return c == U' ' || c == U'\t' || c == U'\r' || c == U'\n' || c == U'\f' || c == U'\v';
    };
    while (i < s.size()) {
        while (i < s.size() && ws(s[i]))
            ++i;
        size_t j = i;
        while (j < s.size() && !ws(s[j]))
            ++j;
        if (j > i)
            out.emplace_back(s.substr(i, j - i));
        i = j;
    }
    return out;
}

long long overlap_sorted(const std::vector<uint32_t>& a, const std::vector<uint32_t>& b) {
    long long n = 0;
    size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] == b[j])
            ++n, ++i, ++j;
        else if (a[i] < b[j])
            ++i;
        else
            ++j;
    }
    return n;
}

double fractional_sim(SimFn fn, long long overlap, size_t na, size_t nb) {
    switch (fn) {
    case SimFn::Jac:
        return (double)overlap / (double)(na + nb - overlap);
    case SimFn::Cos:
        return (double)overlap / std::sqrt((double)na * (double)nb);
    case SimFn::Dice:
        return 2.0 * (double)overlap / (double)(na + nb);
    default:
        throw std::invalid_argument("fractional_sim requires JAC/COS/DICE");
    }
}

// Multiset overlap of two sorted u32string vectors.
long long overlap_sorted_text(const std::vector<std::u32string>& a,
                              const std::vector<std::u32string>& b) {
    long long n = 0;
    size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        int c = a[i].compare(b[j]);
        if (c == 0)
            ++n, ++i, ++j;
        else if (c < 0)
            ++i;
        else
            ++j;
    }
    return n;
}

} // namespace

int full_edit_distance(std::u32string_view a, std::u32string_view b) {
    size_t n = a.size(), m = b.size();
    std::vector<int> prev(m + 1), cur(m + 1);
    for (size_t j = 0; j <= m; ++j)
        prev[j] = (int)j;
    for (size_t i = 1; i <= n; ++i) {
        cur[0] = (int)i;
        for (size_t j = 1; j <= m; ++j) {
            int sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({sub, prev[j] + 1, cur[j - 1] + 1});
        }
        std::swap(prev, cur);
    }
    return prev[m];
}

std::vector<Pair> brute_join_ed(const std::vector<std::u32string>& records, int tau) {
    std::vector<Pair> out;
    for (size_t i = 0; i < records.size(); ++i)
        for (size_t j = i + 1; j < records.size(); ++j) {
            int ed = full_edit_distance(records[i], records[j]);
            if (ed <= tau)
                out.push_back({(uint32_t)i, (uint32_t)j, (double)ed});
        }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<Pair> brute_join_ed(const std::vector<std::u32string>& r,
                                const std::vector<std::u32string>& s, int tau) {
    std::vector<Pair> out;
    for (size_t i = 0; i < r.size(); ++i)
        for (size_t j = 0; j < s.size(); ++j) {
            int ed = full_edit_distance(r[i], s[j]);
            if (ed <= tau)
                out.push_back({(uint32_t)i, (uint32_t)j, (double)ed});
        }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<Pair> brute_join_eds(const std::vector<std::u32string>& records, double delta) {
    std::vector<Pair> out;
    for (size_t i = 0; i < records.size(); ++i)
        for (size_t j = i + 1; j < records.size(); ++j) {
            size_t m = std::max(records[i].size(), records[j].size());
            if (m == 0)
                continue;
            int ed = full_edit_distance(records[i], records[j]);
            double eds = 1.0 - (double)ed / (double)m;
            if (eds >= delta)
                out.push_back({(uint32_t)i, (uint32_t)j, eds});
        }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<Pair> brute_join_set(const std::vector<std::vector<uint32_t>>& records, SimFn fn,
                                 double delta) {
    std::vector<Pair> out;
    for (size_t i = 0; i < records.size(); ++i)
        for (size_t j = i + 1; j < records.size(); ++j) {
            double v = fractional_sim(fn, overlap_sorted(records[i], records[j]),
                                      records[i].size(), records[j].size());
            if (v >= delta)
                out.push_back({(uint32_t)i, (uint32_t)j, v});
        }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<Pair> brute_join_set(const std::vector<std::vector<uint32_t>>& r,
                                 const std::vector<std::vector<uint32_t>>& s, SimFn fn,
                                 double delta) {
    std::vector<Pair> out;
    for (size_t i = 0; i < r.size(); ++i)
        for (size_t j = 0; j < s.size(); ++j) {
            double v = fractional_sim(fn, overlap_sorted(r[i], s[j]), r[i].size(), s[j].size());
            if (v >= delta)
                out.push_back({(uint32_t)i, (uint32_t)j, v});
        }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<SearchHit> brute_search(const std::vector<std::u32string>& records,
                                    std::u32string_view query, int tau) {
    std::vector<SearchHit> out;
    for (size_t i = 0; i < records.size(); ++i) {
        int ed = full_edit_distance(records[i], query);
        if (ed <= tau)
            out.push_back({(uint32_t)i, ed});
    }
    return out;
}

std::vector<ExtractHit> brute_extract(const std::vector<std::u32string>& entities,
                                      std::u32string_view document, const SimilaritySpec& spec) {
    spec.validate();
    std::vector<ExtractHit> out;
    bool char_view = spec.fn == SimFn::Ed || spec.fn == SimFn::Eds;

    if (char_view) {
        // Token = q-gram; a window of l grams starting at character i spans
        // characters [i, i + l + q - 2].
        long long doc_tokens = (long long)document.size() - spec.q + 1;
        for (size_t e = 0; e < entities.size(); ++e) {
            const auto& ent = entities[e];
            long long ecount = (long long)ent.size() - spec.q + 1;
            if (ecount < 1)
                continue;
            SizeBounds b = token_count_bounds(spec, ecount);
            // Loose window on purpose: exact similarity decides membership.
            long long lo = std::max<long long>(1, b.lower - 1);
            long long hi = std::min(doc_tokens, b.upper + 1);
            for (long long l = lo; l <= hi; ++l) {
                for (long long start = 1; start + l - 1 <= doc_tokens; ++start) {
                    auto sub = document.substr(start - 1, l + spec.q - 1);
                    int ed = full_edit_distance(ent, sub);
                    if (spec.fn == SimFn::Ed) {
                        if (ed <= spec.tau)
                            out.push_back({(uint32_t)e, (int)start, (int)(start + l + spec.q - 2),
                                           (double)ed});
                    } else {
                        double v = 1.0 - (double)ed / (double)std::max(ent.size(), sub.size());
                        if (v >= spec.delta)
                            out.push_back({(uint32_t)e, (int)start, (int)(start + l + spec.q - 2), v});
                    }
                }
            }
        }
    } else {
        auto doc_words = split_words(document);
        for (size_t e = 0; e < entities.size(); ++e) {
            auto ent_words = split_words(entities[e]);
            if (ent_words.empty())
                continue;
            std::sort(ent_words.begin(), ent_words.end());
            SizeBounds b = token_count_bounds(spec, (long long)ent_words.size());
            long long lo = std::max<long long>(1, b.lower - 1);
            long long hi = std::min<long long>((long long)doc_words.size(), b.upper + 1);
            for (long long l = lo; l <= hi; ++l) {
                for (long long start = 1; start + l - 1 <= (long long)doc_words.size(); ++start) {
                    std::vector<std::u32string> sub(doc_words.begin() + start - 1,
                                                    doc_words.begin() + start - 1 + l);
                    std::sort(sub.begin(), sub.end());
                    long long ov = overlap_sorted_text(ent_words, sub);
                    double v = fractional_sim(spec.fn, ov, ent_words.size(), sub.size());
                    if (v >= spec.delta)
                        out.push_back({(uint32_t)e, (int)start, (int)(start + l - 1), v});
                }
            }
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::optional<AllocationCost> brute_allocation(const std::vector<std::array<long long, 3>>& costs,
                                               long long target) {
    size_t m = costs.size();
    if (m > 12)
        throw std::invalid_argument("brute_allocation caps m at 12");
    std::optional<AllocationCost> best;
    std::vector<uint8_t> vec(m, 0);
    // Odometer over {0,1,2}^m.
    while (true) {
        long long sum = 0, cost = 0;
        for (size_t i = 0; i < m; ++i) {
            sum += vec[i];
            cost += costs[i][vec[i]];
        }
        if (sum == target && (!best || cost < best->cost))
            best = AllocationCost{vec, cost};
        size_t k = 0;
        while (k < m && vec[k] == 2)
            vec[k++] = 0;
        if (k == m)
            break;
        ++vec[k];
    }
    return best;
}

std::optional<PivotChoice> brute_pivots(const std::vector<std::pair<int, long long>>& pos_weight,
                                        int count, int q) {
    size_t n = pos_weight.size();
    if (n > 13)
        throw std::invalid_argument("brute_pivots caps the prefix at 13 grams");
    std::optional<PivotChoice> best;
    for (uint32_t mask = 0; mask < (1u << n); ++mask) {
        if (__builtin_popcount(mask) != count)
            continue;
        std::vector<size_t> picked;
        long long w = 0;
        for (size_t i = 0; i < n; ++i)
            if (mask & (1u << i)) {
                picked.push_back(i);
                w += pos_weight[i].second;
            }
        bool ok = true;
        for (size_t a = 0; a < picked.size() && ok; ++a)
            for (size_t b = a + 1; b < picked.size() && ok; ++b)
                if (std::abs(pos_weight[picked[a]].first - pos_weight[picked[b]].first) < q)
                    ok = false;
        if (ok && (!best || w < best->weight))
            best = PivotChoice{picked, w};
    }
    return best;
}

int brute_sed(std::u32string_view gram, std::u32string_view window) {
    int best = (int)gram.size(); // empty substring
    for (size_t a = 0; a < window.size(); ++a)
        for (size_t b = a; b < window.size(); ++b) {
            int ed = full_edit_distance(gram, window.substr(a, b - a + 1));
            best = std::min(best, ed);
        }
    return best;
}

} // namespace simtol::oracle
