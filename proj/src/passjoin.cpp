#include "simtol/passjoin.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>
#include <thread>
#include <unordered_map>
#include <unordered_set>

namespace simtol::passjoin {

namespace {

struct U32Hash {
    size_t operator()(const std::u32string& s) const {
        uint64_t h = 1469598103934665603ull;
        for (char32_t c : s) {
            h ^= (uint64_t)c;
            h *= 1099511628211ull;
        }
        return (size_t)h;
    }
};

int floor_div2(int x) { return x >= 0 ? x / 2 : -((-x + 1) / 2); }

} // namespace

std::optional<std::vector<Segment>> partition_even(int len, int tau) {
    int m = tau + 1;
    if (len < m)
        return std::nullopt;
    int short_len = len / m;
    int k = len - short_len * m; // last k segments are one longer
    std::vector<Segment> segs(m);
    int pos = 1;
    for (int i = 0; i < m; ++i) {
        int li = short_len + (i >= m - k ? 1 : 0);
        segs[i] = {pos, li};
        pos += li;
    }
    return segs;
}

StartRange select_range(Strategy st, int s_len, int l, int tau, int slot, int pi, int li) {
    int max_start = s_len - li + 1;
    int delta = s_len - l;
    int lo = 1, hi = max_start;
    switch (st) {
    case Strategy::Length:
        break;
    case Strategy::Shift:
        lo = std::max(lo, pi - tau);
        hi = std::min(hi, pi + tau);
        break;
    case Strategy::Position:
        lo = std::max(lo, pi - floor_div2(tau - delta));
        hi = std::min(hi, pi + floor_div2(tau + delta));
        break;
    case Strategy::MultiMatch: {
        int lo_l = pi - (slot - 1);
        int hi_l = pi + (slot - 1);
        int lo_r = pi + delta - (tau + 1 - slot);
        int hi_r = pi + delta + (tau + 1 - slot);
        lo = std::max({lo, lo_l, lo_r});
        hi = std::min({hi, hi_l, hi_r});
        break;
    }
    }
    return {lo, hi};
}

std::vector<std::vector<int>> select_substrings(int s_len, int l, int tau, Strategy st) {
    auto segs = partition_even(l, tau);
    if (!segs)
        throw std::invalid_argument("select_substrings requires l >= tau+1");
    std::vector<std::vector<int>> out(segs->size());
    for (size_t i = 0; i < segs->size(); ++i) {
        auto r = select_range(st, s_len, l, tau, (int)i + 1, (*segs)[i].start, (*segs)[i].len);
        for (int p = r.lo; p <= r.hi; ++p)
            out[i].push_back(p);
    }
    return out;
}

std::optional<int> extension_verify(std::u32string_view r, std::u32string_view s, int slot,
                                    int pi, int li, int p, int tau) {
    std::u32string_view rl = r.substr(0, pi - 1);
    std::u32string_view sl = s.substr(0, p - 1);
    std::u32string_view rr = r.substr(pi - 1 + li);
    std::u32string_view sr = s.substr(p - 1 + li);

    int tau_l = std::min<int>(tau - std::abs((int)rr.size() - (int)sr.size()), slot - 1);
    auto dl = bounded_edit_distance(rl, sl, tau_l);
    if (!dl)
        return std::nullopt;
    int tau_r = std::min(tau + 1 - slot, tau - *dl);
    auto dr = bounded_edit_distance(rr, sr, tau_r);
    if (!dr)
        return std::nullopt;
    return *dl + *dr;
}

namespace {

// Per-length index: one segment-text map per slot; postings keep insertion
// order, which is (length, lexicographic) under the sweep.
struct LengthIndex {
    std::vector<Segment> segs;
    std::vector<std::unordered_map<std::u32string, std::vector<uint32_t>, U32Hash>> slots;
};

struct Engine {
    const std::vector<std::u32string>* recs_r; // indexed side
    const std::vector<std::u32string>* recs_s; // probe side
    int tau = 0;                               // fixed for ED; per length for EDS
    double delta = 1.0;
    bool eds = false;
    JoinOptions opt;
    JoinStats* stats = nullptr;

    std::map<int, LengthIndex> index;
    std::vector<uint32_t> fallback; // indexed records too short to partition
    std::unordered_set<uint64_t> found;
    std::vector<JoinPair> results;

    BandedVerifier left_verifier, right_verifier;

    int tau_for_len(int l) const {
        return eds ? (int)guarded_floor((1.0 - delta) * (double)l) : tau;
    }

    void insert(uint32_t id) {
        const auto& s = (*recs_r)[id];
        int t = tau_for_len((int)s.size());
        auto segs = partition_even((int)s.size(), t);
        if (!segs) {
            fallback.push_back(id);
            return;
        }
        auto& li = index[(int)s.size()];
        if (li.slots.empty()) {
            li.segs = *segs;
            li.slots.resize(segs->size());
        }
        for (size_t i = 0; i < segs->size(); ++i) {
            const auto& sg = (*segs)[i];
            li.slots[i][s.substr(sg.start - 1, sg.len)].push_back(id);
        }
        if (stats)
            stats->live_lengths = std::max(stats->live_lengths, (long long)index.size());
    }

    void emit(uint32_t rid, uint32_t sid, int ed, size_t rlen, size_t slen) {
        uint32_t a = rid, b = sid;
        if (recs_r == recs_s && a > b)
            std::swap(a, b);
        results.push_back({a, b, ed, eds_value(ed, rlen, slen)});
    }

    bool already_found(uint32_t rid, uint32_t sid) const {
        uint32_t a = rid, b = sid;
        if (recs_r == recs_s && a > b)
            std::swap(a, b);
        return found.count(((uint64_t)a << 32) | b) != 0;
    }

    void mark_found(uint32_t rid, uint32_t sid) {
        uint32_t a = rid, b = sid;
        if (recs_r == recs_s && a > b)
            std::swap(a, b);
        found.insert(((uint64_t)a << 32) | b);
    }

    void probe_fallback(uint32_t sid) {
        const auto& s = (*recs_s)[sid];
        for (uint32_t rid : fallback) {
            const auto& r = (*recs_r)[rid];
            int t = eds ? tau_for_len((int)std::max(r.size(), s.size())) : tau;
            if (std::abs((int)r.size() - (int)s.size()) > t)
                continue;
            if (already_found(rid, sid))
                continue;
            auto ed = bounded_edit_distance(r, s, t);
            if (ed) {
                mark_found(rid, sid);
                emit(rid, sid, *ed, r.size(), s.size());
            }
        }
    }

    // Probe every indexed length l in [lo, hi] with the strategy's selected
    // substrings of s, verifying matches by extension.
    void probe(uint32_t sid, int lo, int hi) {
        const auto& s = (*recs_s)[sid];
        auto it = index.lower_bound(lo);
        for (; it != index.end() && it->first <= hi; ++it) {
            int l = it->first;
            int t = tau_for_len(std::max<int>(l, (int)s.size()));
            LengthIndex& li = it->second;
            for (size_t slot = 0; slot < li.segs.size(); ++slot) {
                const auto& sg = li.segs[slot];
                auto range = select_range(opt.strategy, (int)s.size(), l, t, (int)slot + 1,
                                          sg.start, sg.len);
                for (int p = range.lo; p <= range.hi; ++p) {
                    auto w = s.substr(p - 1, sg.len);
                    auto lit = li.slots[slot].find(w);
                    if (lit == li.slots[slot].end())
                        continue;
                    verify_list(sid, lit->second, (int)slot + 1, sg, p, t);
                }
            }
        }
    }

    void verify_list(uint32_t sid, const std::vector<uint32_t>& list, int slot, Segment sg, int p,
                     int t) {
        const auto& s = (*recs_s)[sid];
        std::u32string_view sl = std::u32string_view(s).substr(0, p - 1);
        std::u32string_view sr = std::u32string_view(s).substr(p - 1 + sg.len);

        // Structural caps are fixed across the postings list, so the banded
        // rows can be shared between consecutive entries via common prefixes.
        // prev_l/prev_r track the record each verifier's cache describes;
        // the right verifier only runs when the left part passed.
        int tau_r_cap = t + 1 - slot;
        bool verifier_ready = false;
        int tau_l_cap = 0;
        const std::u32string* prev_l = nullptr;
        const std::u32string* prev_r = nullptr;

        for (uint32_t rid : list) {
            if (stats)
                ++stats->probes;
            if (recs_r == recs_s && rid == sid)
                continue;
            const auto& r = (*recs_r)[rid];
            if (already_found(rid, sid))
                continue;
            if (stats)
                ++stats->candidates;

            std::u32string_view rl = std::u32string_view(r).substr(0, sg.start - 1);
            std::u32string_view rr = std::u32string_view(r).substr(sg.start - 1 + sg.len);
            if (!verifier_ready) {
                // |r_r| is fixed for the whole list (same length, same slot).
                tau_l_cap = std::min<int>(t - std::abs((int)rr.size() - (int)sr.size()), slot - 1);
                left_verifier.reset(sl, tau_l_cap);
                right_verifier.reset(sr, tau_r_cap);
                verifier_ready = true;
            }

            size_t reuse_l = 0;
            if (opt.share_prefix && prev_l) {
                size_t cap = std::min({prev_l->size(), r.size(), (size_t)(sg.start - 1)});
                while (reuse_l < cap && (*prev_l)[reuse_l] == r[reuse_l])
                    ++reuse_l;
            }
            prev_l = &r;
            auto dl = left_verifier.distance(rl, reuse_l);
            if (!dl)
                continue;

            size_t reuse_r = 0;
            if (opt.share_prefix && prev_r) {
                std::u32string_view pr =
                    std::u32string_view(*prev_r).substr(sg.start - 1 + sg.len);
                size_t cap = std::min(pr.size(), rr.size());
                while (reuse_r < cap && pr[reuse_r] == rr[reuse_r])
                    ++reuse_r;
            }
            prev_r = &r;
            auto dr = right_verifier.distance(rr, reuse_r);
            if (!dr || *dl + *dr > t)
                continue;
            // The extension bound certifies membership; the reported value is
            // the exact distance.
            auto ed = bounded_edit_distance(r, s, t);
            if (!ed)
                continue; // unreachable: d_l + d_r <= t bounds the distance
            mark_found(rid, sid);
            emit(rid, sid, *ed, r.size(), s.size());
        }
    }
};

} // namespace

std::vector<JoinPair> join_ed(const std::vector<std::u32string>& records, int tau,
                              const JoinOptions& opt, JoinStats* stats) {
    if (tau < 0)
        throw std::invalid_argument("tau must be >= 0");
    Engine eng;
    eng.recs_r = eng.recs_s = &records;
    eng.tau = tau;
    eng.opt = opt;
    eng.stats = stats;

    std::vector<uint32_t> order(records.size());
    for (uint32_t i = 0; i < order.size(); ++i)
        order[i] = i;
    std::sort(order.begin(), order.end(), [&](uint32_t a, uint32_t b) {
        if (records[a].size() != records[b].size())
            return records[a].size() < records[b].size();
        if (records[a] != records[b])
            return records[a] < records[b];
        return a < b;
    });

    for (uint32_t id : order) {
        int slen = (int)records[id].size();
        // Drop indexes that can no longer match (lengths < |s| - tau).
        eng.index.erase(eng.index.begin(), eng.index.lower_bound(slen - tau));
        eng.probe_fallback(id);
        eng.probe(id, std::max(0, slen - tau), slen);
        eng.insert(id);
    }
    std::sort(eng.results.begin(), eng.results.end());
    return eng.results;
}

std::vector<JoinPair> join_ed(const std::vector<std::u32string>& r,
                              const std::vector<std::u32string>& s, int tau,
                              const JoinOptions& opt, JoinStats* stats) {
    if (tau < 0)
        throw std::invalid_argument("tau must be >= 0");
    Engine eng;
    eng.recs_r = &r;
    eng.recs_s = &s;
    eng.tau = tau;
    eng.opt = opt;
    eng.stats = stats;
    for (uint32_t id = 0; id < (uint32_t)r.size(); ++id)
        eng.insert(id);

    std::vector<uint32_t> order(s.size());
    for (uint32_t i = 0; i < order.size(); ++i)
        order[i] = i;
    std::sort(order.begin(), order.end(), [&](uint32_t a, uint32_t b) {
        if (s[a].size() != s[b].size())
            return s[a].size() < s[b].size();
        return a < b;
    });

    int threads = std::max(1, opt.threads);
    if (threads == 1) {
        for (uint32_t id : order) {
            int slen = (int)s[id].size();
            eng.index.erase(eng.index.begin(), eng.index.lower_bound(slen - tau));
            eng.probe_fallback(id);
            eng.probe(id, std::max(0, slen - tau), slen + tau);
        }
        std::sort(eng.results.begin(), eng.results.end());
        return eng.results;
    }

    // Concurrent probe phase over the immutable index; results are merged
    // and sorted so the thread count never changes the output. Per-record
    // counters are summed, which is deterministic as well.
    std::vector<std::vector<JoinPair>> partial(threads);
    std::vector<JoinStats> partial_stats(threads);
    std::vector<std::thread> pool;
    for (int w = 0; w < threads; ++w) {
        pool.emplace_back([&, w] {
            Engine local;
            local.recs_r = &r;
            local.recs_s = &s;
            local.tau = tau;
            local.opt = opt;
            local.stats = &partial_stats[w];
            local.index = eng.index; // copy: verifier caches are per-thread
            local.fallback = eng.fallback;
            for (size_t k = w; k < order.size(); k += threads) {
                uint32_t id = order[k];
                int slen = (int)s[id].size();
                local.probe_fallback(id);
                local.probe(id, std::max(0, slen - tau), slen + tau);
            }
            partial[w] = std::move(local.results);
        });
    }
    for (auto& t : pool)
        t.join();
    std::vector<JoinPair> merged;
    for (auto& p : partial)
        merged.insert(merged.end(), p.begin(), p.end());
    std::sort(merged.begin(), merged.end());
    if (stats)
        for (const auto& ps : partial_stats) {
            stats->probes += ps.probes;
            stats->candidates += ps.candidates;
        }
    return merged;
}

std::vector<JoinPair> join_eds(const std::vector<std::u32string>& records, double delta,
                               const JoinOptions& opt, JoinStats* stats) {
    if (!(delta > 0.0 && delta <= 1.0))
        throw std::invalid_argument("delta must lie in (0,1]");
    for (const auto& r : records)
        if (r.empty())
            throw std::invalid_argument("EDS is undefined for empty records");

    Engine eng;
    eng.recs_r = eng.recs_s = &records;
    eng.delta = delta;
    eng.eds = true;
    eng.opt = opt;
    eng.opt.strategy = Strategy::MultiMatch;
    eng.stats = stats;

    std::vector<uint32_t> order(records.size());
    for (uint32_t i = 0; i < order.size(); ++i)
        order[i] = i;
    std::sort(order.begin(), order.end(), [&](uint32_t a, uint32_t b) {
        if (records[a].size() != records[b].size())
            return records[a].size() > records[b].size(); // descending length
        if (records[a] != records[b])
            return records[a] < records[b];
        return a < b;
    });

    for (uint32_t id : order) {
        int slen = (int)records[id].size();
        int hi = (int)guarded_floor((double)slen / delta);
        // Longer indexed strings above |s|/delta can never match again.
        eng.index.erase(eng.index.upper_bound(hi), eng.index.end());
        eng.probe_fallback(id);
        eng.probe(id, slen, hi);
        eng.insert(id);
    }
    std::sort(eng.results.begin(), eng.results.end());
    return eng.results;
}

} // namespace simtol::passjoin
