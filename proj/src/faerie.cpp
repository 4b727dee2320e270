#include "simtol/faerie.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>

namespace simtol::faerie {

namespace {

std::vector<std::u32string> tokens_of(std::u32string_view s, const SimilaritySpec& spec) {
    std::vector<std::u32string> out;
    if (spec.fn == SimFn::Ed || spec.fn == SimFn::Eds) {
        for (auto& g : qgrams(s, spec.q))
            out.push_back(std::move(g.text));
    } else {
        for (auto& w : word_tokens(s))
            out.push_back(std::move(w.text));
    }
    return out;
}

} // namespace

size_t EntityIndex::U32Hash::operator()(const std::u32string& s) const {
    uint64_t h = 1469598103934665603ull;
    for (char32_t c : s) {
        h ^= (uint64_t)c;
        h *= 1099511628211ull;
    }
    return (size_t)h;
}

EntityIndex build_entity_index(const std::vector<std::u32string>& entities,
                               const SimilaritySpec& spec) {
    spec.validate();
    EntityIndex idx;
    idx.spec = spec;
    idx.entities = entities;
    idx.token_counts.resize(entities.size());
    idx.bounds.resize(entities.size());
    idx.lazy.resize(entities.size());
    if (spec.fn != SimFn::Ed && spec.fn != SimFn::Eds)
        idx.sorted_tokens.resize(entities.size());

    std::string bad;
    for (size_t e = 0; e < entities.size(); ++e) {
        auto toks = tokens_of(entities[e], spec);
        bool ok = !toks.empty();
        if (spec.fn == SimFn::Ed && (long long)entities[e].size() <= spec.tau)
            ok = false;
        if (!ok) {
            bad += (bad.empty() ? "" : ", ") + std::to_string(e + 1);
            continue;
        }
        idx.token_counts[e] = (long long)toks.size();
        idx.bounds[e] = token_count_bounds(spec, idx.token_counts[e]);
        idx.lazy[e] = lazy_threshold(spec, idx.token_counts[e]);
        for (auto& t : toks) {
            auto& list = idx.lists[t];
            if (list.empty() || list.back() != e)
                list.push_back((uint32_t)e);
        }
        if (!idx.char_view()) {
            idx.sorted_tokens[e] = toks;
            std::sort(idx.sorted_tokens[e].begin(), idx.sorted_tokens[e].end());
        }
    }
    if (!bad.empty())
        throw std::invalid_argument("entities unusable under this spec (ids: " + bad + ")");

    idx.bottom_e = std::numeric_limits<long long>::max();
    idx.top_e = 0;
    for (size_t e = 0; e < entities.size(); ++e) {
        idx.bottom_e = std::min(idx.bottom_e, idx.bounds[e].lower);
        idx.top_e = std::max(idx.top_e, idx.bounds[e].upper);
    }
    if (entities.empty())
        idx.bottom_e = 1;
    return idx;
}

void scan_document(const std::vector<std::u32string>& doc_tokens, const EntityIndex& index,
                   const std::function<void(PositionList&&)>& emit, ScanStats* stats) {
    // One cursor per document position with a non-empty inverted list; the
    // heap merges them by (entity, position).
    struct Cursor {
        uint32_t entity;
        int pos; // 1-based token position
        const std::vector<uint32_t>* list;
        size_t offset;
    };
    auto cmp = [](const Cursor& a, const Cursor& b) {
        if (a.entity != b.entity)
            return a.entity > b.entity;
        return a.pos > b.pos;
    };
    std::priority_queue<Cursor, std::vector<Cursor>, decltype(cmp)> heap(cmp);
    long long reads = 0;
    for (size_t p = 0; p < doc_tokens.size(); ++p) {
        auto it = index.lists.find(doc_tokens[p]);
        if (it == index.lists.end() || it->second.empty())
            continue;
        heap.push({it->second[0], (int)p + 1, &it->second, 0});
        ++reads;
    }
    PositionList current{0, {}};
    bool have = false;
    while (!heap.empty()) {
        Cursor c = heap.top();
        heap.pop();
        if (!have || current.entity != c.entity) {
            if (have)
                emit(std::move(current));
            current = PositionList{c.entity, {}};
            have = true;
        }
        current.positions.push_back(c.pos);
        if (c.offset + 1 < c.list->size()) {
            heap.push({(*c.list)[c.offset + 1], c.pos, c.list, c.offset + 1});
            ++reads;
        }
    }
    if (have)
        emit(std::move(current));
    if (stats)
        stats->element_reads += reads;
}

namespace {

// Gap rule for bucket splitting: any substring containing two positions
// with more than `max_gap` unmatched tokens between them cannot be similar.
std::vector<std::pair<int, int>> split_buckets(const std::vector<int>& pos, long long max_gap) {
    std::vector<std::pair<int, int>> buckets;
    int start = 0;
    for (size_t k = 1; k < pos.size(); ++k) {
        if ((long long)pos[k] - pos[k - 1] - 1 > max_gap) {
            buckets.emplace_back(start, (int)k - 1);
            start = (int)k;
        }
    }
    if (!pos.empty())
        buckets.emplace_back(start, (int)pos.size() - 1);
    return buckets;
}

// BinarySpan: largest x in [j, bucket_end] with span(i, x) <= hi.
int binary_span(const std::vector<int>& p, int i, int j, int bucket_end, long long hi) {
    int lower = j, upper = bucket_end;
    while (lower <= upper) {
        int mid = lower + (upper - lower + 1) / 2;
        if ((long long)p[mid] - p[i] + 1 > hi)
            upper = mid - 1;
        else
            lower = mid + 1;
    }
    return upper;
}

// BinaryShift: first start position mid >= i whose window of the same width
// can have span <= hi, via the monotone surrogate (p_j + (mid-i)) - p_mid + 1.
int binary_shift(const std::vector<int>& p, int i, int j, long long hi) {
    int lower = i, upper = j;
    while (lower <= upper) {
        int mid = lower + (upper - lower + 1) / 2;
        if ((long long)p[j] + (mid - i) - p[mid] + 1 > hi)
            lower = mid + 1;
        else
            upper = mid - 1;
    }
    return lower;
}

} // namespace

std::vector<std::pair<int, int>> window_candidates(const std::vector<int>& p, int i, int j,
                                                   const SizeBounds& bounds, long long doc_tokens,
                                                   long long max_len_override) {
    std::vector<std::pair<int, int>> out;
    long long max_len = bounds.upper;
    if (max_len_override >= 0)
        max_len = std::min(max_len, max_len_override);
    long long lo_start = std::max<long long>(
        {1, (long long)p[j] - bounds.upper + 1, i > 0 ? (long long)p[i - 1] + 1 : 1});
    long long hi_end = std::min<long long>(
        doc_tokens, j + 1 < (int)p.size() ? (long long)p[j + 1] - 1 : doc_tokens);
    for (long long start = lo_start; start <= p[i]; ++start) {
        long long end_lo = std::max<long long>((long long)p[j], start + bounds.lower - 1);
        long long end_hi = std::min<long long>(hi_end, start + max_len - 1);
        for (long long end = end_lo; end <= end_hi; ++end)
            out.emplace_back((int)start, (int)(end - start + 1));
    }
    return out;
}

std::vector<CandidateWindow> find_candidate_windows(const std::vector<int>& positions,
                                                    long long tl, long long lo, long long hi) {
    std::vector<CandidateWindow> out;
    if (tl < 1 || (long long)positions.size() < tl)
        return out;
    long long max_gap = hi - tl; // generic mismatch bound
    for (auto [b0, b1] : split_buckets(positions, max_gap)) {
        if ((long long)(b1 - b0 + 1) < tl)
            continue; // bucket-level lazy count
        int i = b0;
        while (i + tl - 1 <= b1) {
            int j = i + (int)tl - 1;
            if ((long long)positions[j] - positions[i] + 1 <= hi) {
                int x = binary_span(positions, i, j, b1, hi);
                for (int k = j; k <= x; ++k) {
                    long long span = (long long)positions[k] - positions[i] + 1;
                    if (span >= lo && span <= hi)
                        out.push_back({i, k});
                }
                ++i;
            } else {
                i = binary_shift(positions, i, j, hi);
            }
        }
    }
    return out;
}

namespace {

struct VerifyCtx {
    const EntityIndex& index;
    std::u32string_view document;
    const std::vector<std::u32string>& doc_tokens;
    std::vector<ExtractResult>& out;
    ExtractStats* stats;
};

void verify_candidate(VerifyCtx& ctx, uint32_t e, int start, int len) {
    const auto& spec = ctx.index.spec;
    if (ctx.stats)
        ++ctx.stats->candidates;
    if (ctx.index.char_view()) {
        // l grams of width q starting at token `start` span characters
        // [start, start + len + q - 2].
        std::u32string_view sub = ctx.document.substr(start - 1, len + spec.q - 1);
        const auto& ent = ctx.index.entities[e];
        if (spec.fn == SimFn::Ed) {
            auto ed = bounded_edit_distance(ent, sub, spec.tau);
            if (ed)
                ctx.out.push_back({e, start, start + len + spec.q - 2, (double)*ed});
        } else {
            size_t m = std::max(ent.size(), sub.size());
            int bound = (int)guarded_floor((1.0 - spec.delta) * (double)m);
            auto ed = bounded_edit_distance(ent, sub, bound);
            if (ed) {
                double v = eds_value(*ed, ent.size(), sub.size());
                if (v >= spec.delta)
                    ctx.out.push_back({e, start, start + len + spec.q - 2, v});
            }
        }
    } else {
        std::vector<std::u32string> sub(ctx.doc_tokens.begin() + start - 1,
                                        ctx.doc_tokens.begin() + start - 1 + len);
        std::sort(sub.begin(), sub.end());
        const auto& ent = ctx.index.sorted_tokens[e];
        long long ov = 0;
        size_t i = 0, j = 0;
        while (i < ent.size() && j < sub.size()) {
            int c = ent[i].compare(sub[j]);
            if (c == 0)
                ++ov, ++i, ++j;
            else if (c < 0)
                ++i;
            else
                ++j;
        }
        double v = 0;
        switch (spec.fn) {
        case SimFn::Jac:
            v = (double)ov / (double)(ent.size() + sub.size() - ov);
            break;
        case SimFn::Cos:
            v = (double)ov / std::sqrt((double)ent.size() * (double)sub.size());
            break;
        default:
            v = 2.0 * (double)ov / (double)(ent.size() + sub.size());
            break;
        }
        if (v >= spec.delta)
            ctx.out.push_back({e, start, start + len - 1, v});
    }
}

// Tighter candidate length cap for the fractional set functions given the
// window's shared-token count c (Section 2.4.1 family of bounds).
long long tight_length_cap(const SimilaritySpec& spec, long long e_tokens, long long c) {
    double cc = (double)std::min(e_tokens, c);
    switch (spec.fn) {
    case SimFn::Jac:
        return guarded_floor(cc / spec.delta);
    case SimFn::Cos:
        return guarded_floor(cc * cc / (spec.delta * spec.delta * (double)e_tokens));
    case SimFn::Dice:
        return guarded_floor(2.0 * cc / spec.delta - (double)e_tokens);
    default:
        return std::numeric_limits<long long>::max();
    }
}

void candidates_from_window(VerifyCtx& ctx, uint32_t e, const std::vector<int>& p, int i, int k,
                            bool batch) {
    const auto& spec = ctx.index.spec;
    long long count = k - i + 1;
    long long max_len = -1;
    if (batch)
        max_len = tight_length_cap(spec, ctx.index.token_counts[e], count);
    for (auto [start, len] : window_candidates(p, i, k, ctx.index.bounds[e],
                                               (long long)ctx.doc_tokens.size(), max_len)) {
        if (batch) {
            // Batch-count: the window count bounds the overlap, so group
            // thresholds on the candidate length prune whole lengths.
            long long tg = overlap_threshold(spec, ctx.index.token_counts[e], len).value;
            if (count < tg)
                continue;
        }
        verify_candidate(ctx, e, start, len);
    }
}

void process_position_list(VerifyCtx& ctx, uint32_t e, const std::vector<int>& p,
                           Pruning pruning) {
    const auto& spec = ctx.index.spec;
    long long tl = ctx.index.lazy[e];
    const SizeBounds& b = ctx.index.bounds[e];
    if (b.empty())
        return;
    long long n_tokens = (long long)ctx.doc_tokens.size();

    if (tl < 1) {
        // Unconditional entity: the overlap threshold cannot prune anything,
        // so every valid substring in the entity's window is a candidate.
        for (long long start = 1; start <= n_tokens; ++start)
            for (long long len = b.lower; len <= b.upper && start + len - 1 <= n_tokens; ++len)
                verify_candidate(ctx, e, (int)start, (int)len);
        return;
    }
    if ((long long)p.size() < tl)
        return; // lazy-count

    std::vector<std::pair<int, int>> buckets;
    if (pruning == Pruning::Lazy) {
        buckets.emplace_back(0, (int)p.size() - 1);
    } else {
        long long max_gap = b.upper - tl;
        if (spec.fn == SimFn::Ed)
            max_gap = std::min<long long>(max_gap, (long long)spec.tau * spec.q);
        buckets = split_buckets(p, max_gap);
    }

    bool batch = pruning == Pruning::BatchBinary;
    for (auto [b0, b1] : buckets) {
        if ((long long)(b1 - b0 + 1) < tl)
            continue;
        int i = b0;
        while (i + tl - 1 <= b1) {
            int j = i + (int)tl - 1;
            if ((long long)p[j] - p[i] + 1 <= b.upper) {
                int x = batch ? binary_span(p, i, j, b1, b.upper) : [&] {
                    int k = j;
                    while (k + 1 <= b1 && (long long)p[k + 1] - p[i] + 1 <= b.upper)
                        ++k;
                    return k;
                }();
                for (int k = j; k <= x; ++k)
                    candidates_from_window(ctx, e, p, i, k, batch);
                ++i;
            } else {
                i = batch ? binary_shift(p, i, j, b.upper) : i + 1;
            }
        }
    }
}

} // namespace

std::vector<ExtractResult> extract(const EntityIndex& index, std::u32string_view document,
                                   Pruning pruning, ExtractStats* stats) {
    std::vector<std::u32string> doc_tokens;
    if (index.char_view()) {
        for (auto& g : qgrams(document, index.spec.q))
            doc_tokens.push_back(std::move(g.text));
    } else {
        for (auto& w : word_tokens(document))
            doc_tokens.push_back(std::move(w.text));
    }

    std::vector<ExtractResult> out;
    VerifyCtx ctx{index, document, doc_tokens, out, stats};

    std::vector<bool> seen(index.entities.size(), false);
    ScanStats scan_stats;
    scan_document(doc_tokens, index, [&](PositionList&& pl) {
        seen[pl.entity] = true;
        if (stats)
            stats->probed_length += (long long)pl.positions.size();
        process_position_list(ctx, pl.entity, pl.positions, pruning);
    }, &scan_stats);

    // Unconditional entities must be processed even when they share no token
    // with the document.
    for (uint32_t e = 0; e < (uint32_t)index.entities.size(); ++e)
        if (!seen[e] && index.lazy[e] < 1 && !index.bounds[e].empty())
            process_position_list(ctx, e, {}, pruning);

    std::sort(out.begin(), out.end());
    if (stats)
        stats->results = (long long)out.size();
    return out;
}

} // namespace simtol::faerie
