#include "simtol/setjoin.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>
#include <thread>
#include <unordered_map>

namespace simtol::setjoin {

namespace {
constexpr long long kInf = std::numeric_limits<long long>::max() / 4;

uint64_t fnv1a(std::string_view bytes) {
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        h ^= (uint64_t)c;
        h *= 1099511628211ull;
    }
    return h;
}

struct FragmentHash {
    size_t operator()(const Fragment& f) const {
        uint64_t h = 1469598103934665603ull;
        for (uint32_t x : f) {
            h ^= (uint64_t)x + 1;
            h *= 1099511628211ull;
        }
        return (size_t)h;
    }
};
} // namespace

long long max_mismatch(SimFn fn, double delta, long long l) {
    switch (fn) {
    case SimFn::Jac:
        return guarded_floor((1.0 - delta) / delta * (double)l);
    case SimFn::Cos:
        return guarded_floor((1.0 - delta * delta) / (delta * delta) * (double)l);
    case SimFn::Dice:
        return guarded_floor(2.0 * (1.0 - delta) / delta * (double)l);
    default:
        throw std::invalid_argument("set join requires JAC/COS/DICE");
    }
}

long long pair_mismatch(SimFn fn, double delta, long long l, long long s) {
    switch (fn) {
    case SimFn::Jac:
        return guarded_floor((1.0 - delta) / (1.0 + delta) * (double)(l + s));
    case SimFn::Cos:
        return guarded_floor((double)(l + s) - 2.0 * delta * std::sqrt((double)l * (double)s));
    case SimFn::Dice:
        return guarded_floor((1.0 - delta) * (double)(l + s));
    default:
        throw std::invalid_argument("set join requires JAC/COS/DICE");
    }
}

SizeBounds partner_size_range(SimFn fn, double delta, long long l) {
    SizeBounds b;
    switch (fn) {
    case SimFn::Jac:
        b.lower = guarded_ceil((double)l * delta);
        b.upper = guarded_floor((double)l / delta);
        break;
    case SimFn::Cos:
        b.lower = guarded_ceil((double)l * delta * delta);
        b.upper = guarded_floor((double)l / (delta * delta));
        break;
    case SimFn::Dice:
        b.lower = guarded_ceil((double)l * delta / (2.0 - delta));
        b.upper = guarded_floor((double)l * (2.0 - delta) / delta);
        break;
    default:
        throw std::invalid_argument("set join requires JAC/COS/DICE");
    }
    b.lower = std::max<long long>(1, b.lower);
    return b;
}

Scheme hash_scheme(int m, const std::vector<uint64_t>& element_hashes) {
    Scheme s;
    s.m = m;
    s.slot = [m, &element_hashes](uint32_t id) { return (int)(element_hashes[id] % (uint64_t)m); };
    return s;
}

std::vector<Fragment> partition_set(const std::vector<uint32_t>& sorted_elements,
                                    const Scheme& scheme) {
    std::vector<Fragment> frags(scheme.m);
    for (uint32_t e : sorted_elements)
        frags[scheme.slot(e)].push_back(e);
    return frags;
}

std::vector<Fragment> one_deletions(const Fragment& fragment) {
    std::vector<Fragment> out;
    out.reserve(fragment.size());
    for (size_t k = 0; k < fragment.size(); ++k) {
        Fragment d;
        d.reserve(fragment.size() - 1);
        for (size_t j = 0; j < fragment.size(); ++j)
            if (j != k)
                d.push_back(fragment[j]);
        out.push_back(std::move(d));
    }
    return out;
}

std::optional<Allocation> optimal_allocation(const std::vector<CostTriple>& costs,
                                             long long target) {
    long long m = (long long)costs.size();
    if (target < 0 || target > 2 * m)
        return std::nullopt;
    // cost[i][j], i in [0,m], j in [0,target]; cost(i,0)=0, cost(0,j>0)=inf.
    std::vector<std::vector<long long>> cost(m + 1, std::vector<long long>(target + 1, kInf));
    std::vector<std::vector<int8_t>> pick(m + 1, std::vector<int8_t>(target + 1, -1));
    for (long long i = 0; i <= m; ++i)
        cost[i][0] = 0;
    for (long long i = 1; i <= m; ++i) {
        for (long long j = 1; j <= target; ++j) {
            // Ties prefer the larger v (scanning v ascending with >=).
            long long best = kInf;
            int8_t best_v = -1;
            for (int v = 0; v <= 2; ++v) {
                if (j - v < 0)
                    break;
                long long c = cost[i - 1][j - v];
                if (c >= kInf)
                    continue;
                c += costs[i - 1][v];
                if (c <= best) {
                    best = c;
                    best_v = (int8_t)v;
                }
            }
            cost[i][j] = best;
            pick[i][j] = best_v;
        }
    }
    if (cost[m][target] >= kInf)
        return std::nullopt;
    Allocation a;
    a.cost = cost[m][target];
    a.v.assign(m, 0);
    long long j = target;
    for (long long i = m; i >= 1; --i) {
        int8_t v = pick[i][j];
        if (j == 0)
            v = 0;
        a.v[i - 1] = (uint8_t)v;
        j -= v;
    }
    return a;
}

std::optional<Allocation> greedy_allocation(const std::vector<CostTriple>& costs,
                                            long long target) {
    long long m = (long long)costs.size();
    if (target < 0 || target > 2 * m)
        return std::nullopt;
    Allocation a;
    a.v.assign(m, 0);
    // Min-heap over (incremental cost, slot); ties resolve to the lower slot.
    using Node = std::pair<long long, int>;
    std::priority_queue<Node, std::vector<Node>, std::greater<Node>> heap;
    for (int i = 0; i < m; ++i)
        heap.push({costs[i][1] - costs[i][0], i});
    for (long long pops = 0; pops < target; ++pops) {
        auto [inc, i] = heap.top();
        heap.pop();
        ++a.v[i];
        if (a.v[i] == 1)
            heap.push({costs[i][2] - costs[i][1], i});
    }
    for (long long i = 0; i < m; ++i)
        a.cost += costs[i][a.v[i]];
    return a;
}

std::vector<long long> group_boundaries(long long l_min, long long l_max, double alpha) {
    if (!(alpha >= 0.5 && alpha <= 1.0))
        throw std::invalid_argument("alpha must lie in [0.5, 1]");
    std::vector<long long> floors;
    long long l = l_min;
    while (l <= l_max) {
        floors.push_back(l);
        long long cover = guarded_floor((double)l / alpha);
        l = std::max(cover, l) + 1;
    }
    return floors;
}

namespace {

struct Group {
    long long floor_size = 0, max_size = 0; // covered size range
    int m = 0;
    long long max_inserted = 0;
    std::vector<std::unordered_map<Fragment, std::vector<uint32_t>, FragmentHash>> frag_index;
    std::vector<std::unordered_map<Fragment, std::vector<uint32_t>, FragmentHash>> del_index;
};

struct SetEngine {
    SimFn fn;
    double delta;
    JoinOptions opt;
    JoinStats* stats;

    const std::vector<std::vector<uint32_t>>* recs_r;
    const std::vector<std::vector<uint32_t>>* recs_s;
    const std::vector<uint64_t>* elem_hashes;
    bool self = false;

    std::vector<long long> floors;
    std::vector<Group> groups;
    std::vector<JoinPair> results;

    // Probe-side scratch: stamp-based candidate dedup.
    std::vector<uint32_t> stamp;
    uint32_t epoch = 0;
    std::vector<uint32_t> candidates;

    void init_groups(long long lmin, long long lmax) {
        floors = group_boundaries(lmin, lmax, opt.alpha);
        groups.resize(floors.size());
        for (size_t k = 0; k < floors.size(); ++k) {
            groups[k].floor_size = floors[k];
            groups[k].max_size = std::min(lmax, guarded_floor((double)floors[k] / opt.alpha));
            groups[k].m = (int)max_mismatch(fn, delta, floors[k]) + 1;
            groups[k].frag_index.resize(groups[k].m);
            groups[k].del_index.resize(groups[k].m);
        }
    }

    size_t group_of(long long size) const {
        auto it = std::upper_bound(floors.begin(), floors.end(), size);
        return (size_t)(it - floors.begin()) - 1;
    }

    void insert(uint32_t id) {
        const auto& x = (*recs_r)[id];
        Group& g = groups[group_of((long long)x.size())];
        g.max_inserted = std::max<long long>(g.max_inserted, (long long)x.size());
        auto frags = partition_set(x, hash_scheme(g.m, *elem_hashes));
        for (int i = 0; i < g.m; ++i) {
            g.frag_index[i][frags[i]].push_back(id);
            for (auto& d : one_deletions(frags[i]))
                g.del_index[i][std::move(d)].push_back(id);
        }
    }

    void add_candidate(uint32_t id) {
        if (stamp[id] != epoch) {
            stamp[id] = epoch;
            candidates.push_back(id);
        }
    }

    void probe_group(uint32_t sid, Group& g) {
        const auto& x = (*recs_s)[sid];
        long long s = (long long)x.size();
        auto frags = partition_set(x, hash_scheme(g.m, *elem_hashes));
        long long target = pair_mismatch(fn, delta, std::min(g.max_size, g.max_inserted), s) + 1;

        std::vector<uint8_t> v;
        if (opt.selection == Selection::AllOnes) {
            v.assign(g.m, 1);
        } else {
            std::vector<CostTriple> costs(g.m);
            std::vector<std::vector<Fragment>> dels(g.m);
            for (int i = 0; i < g.m; ++i) {
                auto it = g.frag_index[i].find(frags[i]);
                long long c1 = it == g.frag_index[i].end() ? 0 : (long long)it->second.size();
                long long c2 = c1;
                auto dt = g.del_index[i].find(frags[i]);
                if (dt != g.del_index[i].end())
                    c2 += (long long)dt->second.size();
                dels[i] = one_deletions(frags[i]);
                for (const auto& d : dels[i]) {
                    auto jt = g.frag_index[i].find(d);
                    if (jt != g.frag_index[i].end())
                        c2 += (long long)jt->second.size();
                }
                costs[i] = {0, c1, c2};
            }
            auto alloc = opt.selection == Selection::Optimal ? optimal_allocation(costs, target)
                                                             : greedy_allocation(costs, target);
            if (!alloc) {
                // Cannot happen while alpha >= 1/2 holds; fall back to a full
                // group scan to stay complete.
                v.assign(g.m, 1);
            } else {
                if (stats)
                    ++stats->allocations;
                long long sum = 0;
                for (auto b : alloc->v)
                    sum += b;
                if (sum != target)
                    throw std::logic_error("allocation sum invariant violated");
                v = alloc->v;
            }
            for (int i = 0; i < g.m; ++i) {
                if (v[i] == 2) {
                    auto dt = g.del_index[i].find(frags[i]);
                    if (dt != g.del_index[i].end()) {
                        if (stats)
                            stats->probed_length += (long long)dt->second.size();
                        for (uint32_t id : dt->second)
                            add_candidate(id);
                    }
                    for (const auto& d : dels[i]) {
                        auto jt = g.frag_index[i].find(d);
                        if (jt != g.frag_index[i].end()) {
                            if (stats)
                                stats->probed_length += (long long)jt->second.size();
                            for (uint32_t id : jt->second)
                                add_candidate(id);
                        }
                    }
                }
            }
        }
        for (int i = 0; i < g.m; ++i) {
            if (v[i] >= 1) {
                auto it = g.frag_index[i].find(frags[i]);
                if (it != g.frag_index[i].end()) {
                    if (stats)
                        stats->probed_length += (long long)it->second.size();
                    for (uint32_t id : it->second)
                        add_candidate(id);
                }
            }
        }
    }

    void probe(uint32_t sid, std::vector<JoinPair>& out) {
        const auto& x = (*recs_s)[sid];
        long long s = (long long)x.size();
        SizeBounds window = partner_size_range(fn, delta, s);
        long long hi = self ? s : window.upper;
        ++epoch;
        candidates.clear();
        for (size_t k = 0; k < groups.size(); ++k) {
            Group& g = groups[k];
            if (g.max_inserted == 0)
                continue;
            if (g.max_size < window.lower || g.floor_size > hi)
                continue;
            probe_group(sid, g);
        }
        if (stats)
            stats->candidates += (long long)candidates.size();
        for (uint32_t rid : candidates) {
            if (self && rid == sid)
                continue;
            const auto& y = (*recs_r)[rid];
            if ((long long)y.size() < window.lower || (long long)y.size() > window.upper)
                continue;
            double v = set_similarity(fn, x, y);
            if (v >= delta) {
                uint32_t a = rid, b = sid;
                if (self && a > b)
                    std::swap(a, b);
                out.push_back({a, b, v});
            }
        }
    }
};

std::vector<std::vector<uint32_t>> intern(const std::vector<std::vector<std::string>>& raw_r,
                                          const std::vector<std::vector<std::string>>* raw_s,
                                          std::vector<uint64_t>& hashes) {
    // GlobalOrder-style interning: dense ids ascend by (frequency, token),
    // so each record's sorted id sequence is its canonical fragment source.
    std::unordered_map<std::string, uint32_t> freq;
    auto count = [&](const std::vector<std::vector<std::string>>& rs) {
        std::vector<std::string> uniq;
        for (const auto& rec : rs) {
            uniq.assign(rec.begin(), rec.end());
            std::sort(uniq.begin(), uniq.end());
            uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
            for (auto& t : uniq)
                ++freq[t];
        }
    };
    count(raw_r);
    if (raw_s)
        count(*raw_s);

    std::vector<std::pair<uint32_t, const std::string*>> order;
    order.reserve(freq.size());
    for (auto& [t, f] : freq)
        order.emplace_back(f, &t);
    std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first)
            return a.first < b.first;
        return *a.second < *b.second;
    });
    std::unordered_map<std::string, uint32_t> id_of;
    hashes.resize(order.size());
    for (uint32_t i = 0; i < (uint32_t)order.size(); ++i) {
        id_of[*order[i].second] = i;
        hashes[i] = fnv1a(*order[i].second);
    }

    std::vector<std::vector<uint32_t>> out;
    auto convert = [&](const std::vector<std::vector<std::string>>& rs) {
        for (const auto& rec : rs) {
            std::vector<uint32_t> ids;
            ids.reserve(rec.size());
            for (const auto& t : rec)
                ids.push_back(id_of.at(t));
            std::sort(ids.begin(), ids.end());
            ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
            out.push_back(std::move(ids));
        }
    };
    convert(raw_r);
    if (raw_s)
        convert(*raw_s);
    return out;
}

void validate_join_args(SimFn fn, double delta, const JoinOptions& opt) {
    if (fn != SimFn::Jac && fn != SimFn::Cos && fn != SimFn::Dice)
        throw std::invalid_argument("join_set requires JAC/COS/DICE");
    if (!(delta > 0.0 && delta <= 1.0))
        throw std::invalid_argument("delta must lie in (0,1]");
    if (!(opt.alpha >= 0.5 && opt.alpha <= 1.0))
        throw std::invalid_argument("alpha must lie in [0.5, 1]");
    if (opt.selection == Selection::AllOnes && opt.alpha != 1.0)
        throw std::invalid_argument("ALL_ONES selection requires alpha = 1");
}

} // namespace

std::vector<JoinPair> join_set(const std::vector<std::vector<std::string>>& records, SimFn fn,
                               double delta, const JoinOptions& opt, JoinStats* stats) {
    validate_join_args(fn, delta, opt);
    for (const auto& r : records)
        if (r.empty())
            throw std::invalid_argument("set records must be non-empty");
    std::vector<uint64_t> hashes;
    auto sets = intern(records, nullptr, hashes);

    SetEngine eng;
    eng.fn = fn;
    eng.delta = delta;
    eng.opt = opt;
    eng.stats = stats;
    eng.recs_r = eng.recs_s = &sets;
    eng.elem_hashes = &hashes;
    eng.self = true;
    eng.stamp.assign(sets.size(), 0);

    long long lmin = kInf, lmax = 0;
    for (const auto& x : sets) {
        lmin = std::min(lmin, (long long)x.size());
        lmax = std::max(lmax, (long long)x.size());
    }
    if (sets.empty())
        return {};
    eng.init_groups(lmin, lmax);

    std::vector<uint32_t> order(sets.size());
    for (uint32_t i = 0; i < order.size(); ++i)
        order[i] = i;
    std::sort(order.begin(), order.end(), [&](uint32_t a, uint32_t b) {
        if (sets[a].size() != sets[b].size())
            return sets[a].size() < sets[b].size();
        return a < b;
    });
    for (uint32_t id : order) {
        eng.probe(id, eng.results);
        eng.insert(id);
    }
    std::sort(eng.results.begin(), eng.results.end());
    return eng.results;
}

std::vector<JoinPair> join_set(const std::vector<std::vector<std::string>>& r,
                               const std::vector<std::vector<std::string>>& s, SimFn fn,
                               double delta, const JoinOptions& opt, JoinStats* stats) {
    validate_join_args(fn, delta, opt);
    for (const auto& rec : r)
        if (rec.empty())
            throw std::invalid_argument("set records must be non-empty");
    for (const auto& rec : s)
        if (rec.empty())
            throw std::invalid_argument("set records must be non-empty");
    if (r.empty() || s.empty())
        return {};
    std::vector<uint64_t> hashes;
    auto all = intern(r, &s, hashes);
    std::vector<std::vector<uint32_t>> sets_r(all.begin(), all.begin() + r.size());
    std::vector<std::vector<uint32_t>> sets_s(all.begin() + r.size(), all.end());

    SetEngine eng;
    eng.fn = fn;
    eng.delta = delta;
    eng.opt = opt;
    eng.stats = stats;
    eng.recs_r = &sets_r;
    eng.recs_s = &sets_s;
    eng.elem_hashes = &hashes;
    eng.self = false;
    eng.stamp.assign(sets_r.size(), 0);

    long long lmin = kInf, lmax = 0;
    for (const auto& x : sets_r) {
        lmin = std::min(lmin, (long long)x.size());
        lmax = std::max(lmax, (long long)x.size());
    }
    eng.init_groups(lmin, lmax);
    for (uint32_t id = 0; id < (uint32_t)sets_r.size(); ++id)
        eng.insert(id);

    int threads = std::max(1, opt.threads);
    if (threads == 1) {
        for (uint32_t id = 0; id < (uint32_t)sets_s.size(); ++id)
            eng.probe(id, eng.results);
        std::sort(eng.results.begin(), eng.results.end());
        return eng.results;
    }
    std::vector<std::vector<JoinPair>> partial(threads);
    std::vector<JoinStats> pstats(threads);
    std::vector<std::thread> pool;
    for (int w = 0; w < threads; ++w) {
        pool.emplace_back([&, w] {
            SetEngine local;
            local.fn = fn;
            local.delta = delta;
            local.opt = opt;
            local.stats = &pstats[w];
            local.recs_r = &sets_r;
            local.recs_s = &sets_s;
            local.elem_hashes = &hashes;
            local.self = false;
            local.stamp.assign(sets_r.size(), 0);
            local.floors = eng.floors;
            local.groups = eng.groups; // shared immutable index, copied per worker
            for (uint32_t id = w; id < (uint32_t)sets_s.size(); id += threads)
                local.probe(id, partial[w]);
        });
    }
    for (auto& t : pool)
        t.join();
    std::vector<JoinPair> merged;
    for (auto& p : partial)
        merged.insert(merged.end(), p.begin(), p.end());
    std::sort(merged.begin(), merged.end());
    if (stats)
        for (const auto& ps : pstats) {
            stats->probed_length += ps.probed_length;
            stats->candidates += ps.candidates;
            stats->allocations += ps.allocations;
        }
    return merged;
}

} // namespace simtol::setjoin
