#include "simtol/pivotal.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <random>
#include <stdexcept>

namespace simtol::pivotal {

namespace {
constexpr long long kInfW = std::numeric_limits<long long>::max() / 4;
constexpr int kInf = std::numeric_limits<int>::max() / 4;
} // namespace

std::optional<std::vector<size_t>> select_pivots(const std::vector<PositionalGram>& by_pos,
                                                 const std::vector<long long>& weights, int count,
                                                 int q) {
    size_t n = by_pos.size();
    if (count <= 0 || n < (size_t)count)
        return count <= 0 ? std::optional<std::vector<size_t>>{std::vector<size_t>{}}
                          : std::nullopt;

    // disj[i]: largest index < i whose gram is disjoint from gram i (or -1).
    std::vector<int> disj(n, -1);
    for (size_t i = 0; i < n; ++i) {
        int k = (int)i - 1;
        while (k >= 0 && by_pos[i].pos - by_pos[k].pos < q)
            --k;
        disj[i] = k;
    }

    // W[j][i]: min weight of j disjoint picks among the first i+1 grams;
    // take[j][iggle]: whether gram i is the j-th pick. Ties prefer earlier grams,
    // i.e. taking gram i requires a strict improvement.
    std::vector<std::vector<long long>> W(count + 1, std::vector<long long>(n, kInfW));
    std::vector<std::vector<uint8_t>> take(count + 1, std::vector<uint8_t>(n, 0));
    for (size_t i = 0; i < n; ++i) {
        long long skip = i > 0 ? W[1][i - 1] : kInfW;
        if (weights[i] < skip) {
            W[1][i] = weights[i];
            take[1][i] = 1;
        } else {
            W[1][i] = skip;
        }
    }
    for (int j = 2; j <= count; ++j) {
        for (size_t i = 0; i < n; ++i) {
            long long skip = i > 0 ? W[j][i - 1] : kInfW;
            long long pick = kInfW;
            if (disj[i] >= 0 && W[j - 1][disj[i]] < kInfW)
                pick = W[j - 1][disj[i]] + weights[i];
            if (pick < skip) {
                W[j][i] = pick;
                take[j][i] = 1;
            } else {
                W[j][i] = skip;
            }
        }
    }
    if (W[count][n - 1] >= kInfW)
        return std::nullopt;
    std::vector<size_t> picked;
    int j = count;
    int i = (int)n - 1;
    while (j >= 1) {
        while (!take[j][i])
            --i;
        picked.push_back((size_t)i);
        i = disj[i];
        --j;
    }
    std::reverse(picked.begin(), picked.end());
    return picked;
}

std::optional<int> substring_ed(std::u32string_view gram, std::u32string_view r, int g_pos,
                                int tau, int budget) {
    if (budget < 0)
        return std::nullopt;
    int glen = (int)gram.size();
    int ustart = g_pos - tau; // unclamped window start (may be < 1)
    int start = std::max(1, ustart);
    int end = std::min((int)r.size(), g_pos + glen - 1 + tau);
    int w = std::max(0, end - start + 1);
    int shift = start - ustart; // columns clipped away on the left

    // Row 0: an alignment may start anywhere; column 0 means the gram hangs
    // over the left edge of the window (cost = consumed gram chars).
    std::vector<int> prev(w + 1, 0), cur(w + 1, kInf);
    for (int i = 1; i <= glen; ++i) {
        std::fill(cur.begin(), cur.end(), kInf);
        cur[0] = i;
        int jb = std::max(1, i - shift), je = std::min(w, i + 2 * tau - shift);
        int row_min = cur[0];
        for (int j = jb; j <= je; ++j) {
            int best = kInf;
            if (prev[j - 1] < kInf)
                best = std::min(best, prev[j - 1] + (gram[i - 1] == r[start - 1 + j - 1] ? 0 : 1));
            if (prev[j] < kInf)
                best = std::min(best, prev[j] + 1);
            if (cur[j - 1] < kInf)
                best = std::min(best, cur[j - 1] + 1);
            cur[j] = best;
            row_min = std::min(row_min, best);
        }
        if (row_min > budget)
            return std::nullopt;
        std::swap(prev, cur);
    }
    int sed = kInf;
    for (int j = 0; j <= w; ++j)
        sed = std::min(sed, prev[j]);
    if (sed > budget)
        return std::nullopt;
    return sed;
}

bool alignment_filter(const std::vector<PositionalGram>& pivots, std::u32string_view r, int tau) {
    int err = 0;
    for (const auto& g : pivots) {
        auto v = substring_ed(g.text, r, g.pos, tau, tau - err);
        if (!v)
            return false;
        err += *v;
        if (err > tau)
            return false;
    }
    return true;
}

size_t SearchIndex::U32Hash::operator()(const std::u32string& s) const {
    uint64_t h = 1469598103934665603ull;
    for (char32_t c : s) {
        h ^= (uint64_t)c;
        h *= 1099511628211ull;
    }
    return (size_t)h;
}

void SearchIndex::append(Index& idx, const std::u32string& text, uint32_t rec, int pos) {
    auto& list = idx[text];
    int len = (int)records_[rec].size();
    if (list.len_offsets.empty() || list.len_offsets.back().first != len)
        list.len_offsets.emplace_back(len, (int)list.entries.size());
    list.entries.push_back({rec, pos});
}

namespace {

// Arbitrary-but-deterministic disjoint selection: the RANDOM baseline the
// optimal selection is measured against. Greedy over a seeded shuffle; may
// fail to reach `count` on adversarial prefixes (callers fall back to the
// DP selection to stay complete).
std::optional<std::vector<size_t>> random_pivots(const std::vector<PositionalGram>& grams,
                                                 int count, int q, uint64_t seed) {
    std::vector<size_t> order(grams.size());
    for (size_t i = 0; i < order.size(); ++i)
        order[i] = i;
    std::mt19937_64 rng(seed * 0x9e3779b97f4a7c15ull + 1);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<size_t> picked;
    for (size_t i : order) {
        bool ok = true;
        for (size_t p : picked)
            if (std::abs(grams[i].pos - grams[p].pos) < q)
                ok = false;
        if (ok) {
            picked.push_back(i);
            if ((int)picked.size() == count)
                return picked;
        }
    }
    if ((int)picked.size() < count)
        return std::nullopt;
    return picked;
}

uint64_t text_seed(std::u32string_view s) {
    uint64_t h = 1469598103934665603ull;
    for (char32_t c : s) {
        h ^= (uint64_t)c;
        h *= 1099511628211ull;
    }
    return h;
}

} // namespace

SearchIndex::SearchIndex(std::vector<std::u32string> records, int q, int tau_max,
                         PivotMode data_pivots)
    : records_(std::move(records)), q_(q), tau_max_(tau_max) {
    if (q < 1)
        throw std::invalid_argument("q must be >= 1");
    if (tau_max < 0)
        throw std::invalid_argument("tau_max must be >= 0");
    {
        std::string bad;
        for (size_t i = 0; i < records_.size(); ++i)
            if (records_[i].size() < (size_t)q)
                bad += (bad.empty() ? "" : ", ") + std::to_string(i + 1);
        if (!bad.empty())
            throw std::invalid_argument("records shorter than q (ids: " + bad + ")");
    }

    std::vector<std::vector<std::u32string>> corpus;
    corpus.reserve(records_.size());
    for (const auto& r : records_) {
        std::vector<std::u32string> toks;
        for (auto& g : qgrams(r, q_))
            toks.push_back(std::move(g.text));
        corpus.push_back(std::move(toks));
    }
    order_ = GlobalOrder::build(corpus);

    prefix_index_.resize(tau_max_ + 1);
    pivot_index_.resize(tau_max_ + 1);
    support_.assign(records_.size(), 0);
    last_rank_.assign(tau_max_ + 1, std::vector<uint32_t>(records_.size(), 0));
    shorts_.assign(tau_max_ + 1, {});

    // Records sorted by (length, id) so posting lists stay length-grouped.
    std::vector<uint32_t> ids(records_.size());
    for (uint32_t i = 0; i < ids.size(); ++i)
        ids[i] = i;
    std::sort(ids.begin(), ids.end(), [&](uint32_t a, uint32_t b) {
        if (records_[a].size() != records_[b].size())
            return records_[a].size() < records_[b].size();
        return a < b;
    });

    for (uint32_t id : ids) {
        auto og = ordered_grams(records_[id], q_, order_);
        int gcount = (int)og.size();
        int support = std::min(tau_max_, (gcount - 1) / q_);
        support_[id] = support;
        if (support < tau_max_)
            shorts_[support + 1].push_back(id);

        // Prefix side: gram t (1-based) of the global-order sequence lands in
        // level ceil((t-1)/q); occurrences of one text all land at the level
        // where the text first enters the prefix.
        int cap = std::min(gcount, q_ * support + 1);
        int t = 0;
        while (t < cap) {
            int run_end = t;
            while (run_end + 1 < gcount && og[run_end + 1].text == og[t].text)
                ++run_end;
            // 0-based index t sits in level ceil(t / q): the prefix for
            // threshold i ends at index q*i (inclusive).
            int level = t == 0 ? 0 : (t + q_ - 1) / q_;
            for (int u = t; u <= run_end; ++u)
                append(prefix_index_[level], og[u].text, id, og[u].pos);
            t = run_end + 1;
        }

        for (int tau = 0; tau <= support; ++tau) {
            int plen = std::min(gcount, q_ * tau + 1);
            last_rank_[tau][id] = order_.rank(og[plen - 1].text).value();

            std::vector<PositionalGram> by_pos(og.begin(), og.begin() + plen);
            std::sort(by_pos.begin(), by_pos.end(),
                      [](const PositionalGram& a, const PositionalGram& b) { return a.pos < b.pos; });
            std::optional<std::vector<size_t>> picked;
            if (data_pivots == PivotMode::Random)
                picked = random_pivots(by_pos, tau + 1, q_, (uint64_t)id * 131 + (uint64_t)tau);
            if (!picked) {
                std::vector<long long> weights(by_pos.size());
                for (size_t k = 0; k < by_pos.size(); ++k)
                    weights[k] = (long long)order_.frequency(by_pos[k].text);
                picked = select_pivots(by_pos, weights, tau + 1, q_);
            }
            if (!picked)
                throw std::logic_error("pivot selection failed on a full prefix");
            for (size_t k : *picked)
                append(pivot_index_[tau], by_pos[k].text, id, by_pos[k].pos);
        }
    }
}

void SearchIndex::probe_list(const PostingList& list, int len_lo, int len_hi,
                             const std::function<void(const Entry&)>& fn, long long* probed) const {
    auto lo = std::lower_bound(list.len_offsets.begin(), list.len_offsets.end(),
                               std::make_pair(len_lo, std::numeric_limits<int>::min()));
    size_t begin = lo == list.len_offsets.end() ? list.entries.size() : (size_t)lo->second;
    auto hi = std::upper_bound(list.len_offsets.begin(), list.len_offsets.end(),
                               std::make_pair(len_hi, std::numeric_limits<int>::max()));
    size_t end = hi == list.len_offsets.end() ? list.entries.size() : (size_t)hi->second;
    for (size_t k = begin; k < end; ++k) {
        if (probed)
            ++*probed;
        fn(list.entries[k]);
    }
}

std::vector<std::u32string> SearchIndex::prefix_texts(uint32_t id, int tau) const {
    std::vector<std::u32string> out;
    for (int i = 0; i <= tau; ++i)
        for (const auto& [text, list] : prefix_index_[i])
            for (const auto& e : list.entries)
                if (e.rec == id)
                    out.push_back(text);
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::u32string> SearchIndex::pivot_texts(uint32_t id, int tau) const {
    std::vector<std::u32string> out;
    for (const auto& [text, list] : pivot_index_[tau])
        for (const auto& e : list.entries)
            if (e.rec == id)
                out.push_back(text);
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<SearchHit> SearchIndex::search(std::u32string_view query, int tau,
                                           const SearchOptions& opt, SearchStats* stats) const {
    if (tau < 0 || tau > tau_max_)
        throw std::invalid_argument("tau must lie in [0, tau_max]");
    std::vector<SearchHit> hits;
    int slen = (int)query.size();

    std::vector<uint32_t> cand;
    std::vector<uint8_t> seen(records_.size(), 0);
    auto add_candidate = [&](uint32_t id) {
        if (!seen[id]) {
            seen[id] = 1;
            cand.push_back(id);
        }
    };

    auto og = ordered_grams(query, q_, order_);
    int gcount = (int)og.size();
    bool fallback = gcount < q_ * tau + 1;

    std::vector<PositionalGram> pivots; // query pivots, position-sorted
    if (!fallback) {
        int plen = q_ * tau + 1;
        // last(pre(s)) as an order key; absent grams are the rarest, so a
        // ranked last gram is comparable against data ranks directly.
        auto last_rank_s = order_.rank(og[plen - 1].text);

        std::vector<PositionalGram> by_pos(og.begin(), og.begin() + plen);
        std::sort(by_pos.begin(), by_pos.end(),
                  [](const PositionalGram& a, const PositionalGram& b) { return a.pos < b.pos; });
        std::optional<std::vector<size_t>> picked;
        if (opt.query_pivots == PivotMode::Random)
            picked = random_pivots(by_pos, tau + 1, q_, text_seed(query) + (uint64_t)tau);
        if (!picked) {
            std::vector<long long> weights(by_pos.size());
            for (size_t k = 0; k < by_pos.size(); ++k) {
                long long w = 0;
                for (int i = 0; i <= tau; ++i) {
                    auto it = prefix_index_[i].find(by_pos[k].text);
                    if (it != prefix_index_[i].end())
                        w += (long long)it->second.entries.size();
                }
                weights[k] = w;
            }
            picked = select_pivots(by_pos, weights, tau + 1, q_);
        }
        if (!picked)
            throw std::logic_error("pivot selection failed on a full query prefix");
        for (size_t k : *picked)
            pivots.push_back(by_pos[k]);
        std::sort(pivots.begin(), pivots.end(),
                  [](const PositionalGram& a, const PositionalGram& b) { return a.pos < b.pos; });

        long long* probed = stats ? &stats->probed_entries : nullptr;
        auto keep_gt = [&](const Entry& e, int gpos) {
            if (support_[e.rec] < tau)
                return; // handled by the shorts fallback
            bool gt = !last_rank_s || last_rank_[tau][e.rec] > *last_rank_s;
            if (gt && std::abs(e.pos - gpos) <= tau)
                add_candidate(e.rec);
        };
        auto keep_le = [&](const Entry& e, int gpos) {
            if (support_[e.rec] < tau)
                return;
            bool le = last_rank_s && last_rank_[tau][e.rec] <= *last_rank_s;
            if (le && std::abs(e.pos - gpos) <= tau)
                add_candidate(e.rec);
        };

        // piv(s) against the prefix indexes: covers last(pre(r)) > last(pre(s)).
        for (const auto& g : pivots)
            for (int i = 0; i <= tau; ++i) {
                auto it = prefix_index_[i].find(g.text);
                if (it != prefix_index_[i].end())
                    probe_list(it->second, slen - tau, slen + tau,
                               [&](const Entry& e) { keep_gt(e, g.pos); }, probed);
            }
        // pre(s) against the pivotal indexes: covers last(pre(r)) <= last(pre(s)).
        // Every occurrence of a prefix text probes, so duplicate texts around
        // the prefix cutoff keep their aligned positions.
        std::vector<std::u32string> prefix_texts;
        for (int k = 0; k < plen; ++k)
            prefix_texts.push_back(og[k].text);
        std::sort(prefix_texts.begin(), prefix_texts.end());
        prefix_texts.erase(std::unique(prefix_texts.begin(), prefix_texts.end()),
                           prefix_texts.end());
        for (const auto& g : og) {
            if (!std::binary_search(prefix_texts.begin(), prefix_texts.end(), g.text))
                continue;
            for (int i = 0; i <= tau; ++i) {
                auto it = pivot_index_[i].find(g.text);
                if (it != pivot_index_[i].end())
                    probe_list(it->second, slen - tau, slen + tau,
                               [&](const Entry& e) { keep_le(e, g.pos); }, probed);
            }
        }
        // Records whose prefixes cannot carry this threshold.
        for (int k = 0; k <= tau; ++k)
            for (uint32_t id : shorts_[k])
                if (std::abs((int)records_[id].size() - slen) <= tau)
                    add_candidate(id);
    } else {
        for (uint32_t id = 0; id < (uint32_t)records_.size(); ++id)
            if (std::abs((int)records_[id].size() - slen) <= tau)
                add_candidate(id);
    }

    if (stats) {
        stats->candidates += (long long)cand.size();
        stats->candidate_ids.insert(stats->candidate_ids.end(), cand.begin(), cand.end());
    }
    for (uint32_t id : cand) {
        if (!fallback && opt.alignment && !alignment_filter(pivots, records_[id], tau))
            continue;
        auto ed = bounded_edit_distance(records_[id], query, tau);
        if (ed)
            hits.push_back({id, *ed});
    }
    std::sort(hits.begin(), hits.end());
    if (stats)
        stats->results += (long long)hits.size();
    return hits;
}

} // namespace simtol::pivotal
