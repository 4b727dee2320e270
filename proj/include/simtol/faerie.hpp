#pragma once

#include "simtol/core.hpp"
#include "simtol/tokenize.hpp"

#include <functional>
#include <unordered_map>
#include <vector>

namespace simtol::faerie {

enum class Pruning { Lazy, Bucket, BatchBinary };

// Inverted index over the dictionary's tokens (words for JAC/COS/DICE,
// q-grams for ED/EDS). Lists are ascending by entity id.
struct EntityIndex {
    SimilaritySpec spec;
    std::vector<std::u32string> entities;
    std::vector<std::vector<std::u32string>> sorted_tokens; // word view only
    std::vector<long long> token_counts;                    // |e|
    std::vector<SizeBounds> bounds;                         // [⊥e, ⊤e]
    std::vector<long long> lazy;                            // T_l, may be <= 0
    long long bottom_e = 0, top_e = 0;                      // dictionary-wide window

    struct U32Hash {
        size_t operator()(const std::u32string& s) const;
    };
    std::unordered_map<std::u32string, std::vector<uint32_t>, U32Hash> lists;

    bool char_view() const { return spec.fn == SimFn::Ed || spec.fn == SimFn::Eds; }
};

// Throws std::invalid_argument naming the offending entity ids when an
// entity cannot yield a token (ED additionally requires len > tau).
EntityIndex build_entity_index(const std::vector<std::u32string>& entities,
                               const SimilaritySpec& spec);

// Ascending positions of the document tokens whose inverted list contains
// the entity.
struct PositionList {
    uint32_t entity;
    std::vector<int> positions; // 1-based token positions
};

struct ScanStats {
    long long element_reads = 0; // must equal the sum of |P_e|
};

// Single-heap scan: every inverted list matched by the document is read
// exactly once, entities are emitted in ascending id order with their
// complete position list.
void scan_document(const std::vector<std::u32string>& doc_tokens, const EntityIndex& index,
                   const std::function<void(PositionList&&)>& emit, ScanStats* stats = nullptr);

// Candidate window per Definition 2.3: 0-based inclusive index range into
// the position list with T_l <= count <= ⊤e and ⊥e <= span <= ⊤e.
struct CandidateWindow {
    int i, j;
    bool operator==(const CandidateWindow& o) const { return i == o.i && j == o.j; }
};

// Bucket split (gap pruning), then the binary span/shift walk. Requires
// tl >= 1; callers handle unconditional entities themselves.
std::vector<CandidateWindow> find_candidate_windows(const std::vector<int>& positions,
                                                    long long tl, long long lo, long long hi);

// Candidate substrings (start token, token count) containing all tokens of
// the window [i, j]: starts clamped past the previous shared position, ends
// before the next one, counts within [⊥e, ⊤e]. Adjacent windows therefore
// never produce the same substring twice.
std::vector<std::pair<int, int>> window_candidates(const std::vector<int>& positions, int i,
                                                   int j, const SizeBounds& bounds,
                                                   long long doc_tokens,
                                                   long long max_len_override = -1);

struct ExtractResult {
    uint32_t entity;
    int start, end; // 1-based inclusive; characters for ED/EDS, tokens otherwise
    double value;   // distance for ED, similarity otherwise
    bool operator==(const ExtractResult& o) const {
        return entity == o.entity && start == o.start && end == o.end;
    }
    bool operator<(const ExtractResult& o) const {
        if (entity != o.entity) return entity < o.entity;
        if (start != o.start) return start < o.start;
        return end < o.end;
    }
};

struct ExtractStats {
    long long candidates = 0;
    long long probed_length = 0; // sum of |P_e| processed
    long long results = 0;
};

std::vector<ExtractResult> extract(const EntityIndex& index, std::u32string_view document,
                                   Pruning pruning, ExtractStats* stats = nullptr);

} // namespace simtol::faerie
