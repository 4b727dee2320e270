#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace simtol {

// The five similarity functions supported by every engine. JAC/COS/DICE work
// on word-token multisets, ED/EDS on character sequences (with a q-gram token
// view inside the filters).
enum class SimFn { Jac, Cos, Dice, Ed, Eds };

const char* sim_fn_name(SimFn fn);
bool is_fractional(SimFn fn);

// Threshold bundle used to parameterize the engines: a fractional threshold
// delta in (0,1] for JAC/COS/DICE/EDS, an integer tau >= 0 for ED, and the
// gram length q used by the ED/EDS token views.
struct SimilaritySpec {
    SimFn fn = SimFn::Jac;
    double delta = 1.0;
    int tau = 0;
    int q = 2;

    void validate() const;
};

// Minimum required token overlap |e ∩ s|. Values <= 0 mean the pair is
// unconditionally a candidate.
struct OverlapThreshold {
    long long value = 0;
    bool unconditional() const { return value <= 0; }
};

// Valid token-count window [lower, upper] for substrings of an entity.
// lower is clamped to >= 1; lower > upper means no substring can match.
struct SizeBounds {
    long long lower = 1;
    long long upper = 0;
    bool empty() const { return lower > upper; }
};

// ceil/floor with a 1e-9 guard toward the mathematically exact value, so a
// threshold that is exactly integral does not drift across the integer
// boundary through floating-point representation error.
long long guarded_ceil(double x);
long long guarded_floor(double x);

OverlapThreshold overlap_threshold(const SimilaritySpec& spec, long long e_tokens, long long s_tokens);
SizeBounds token_count_bounds(const SimilaritySpec& spec, long long e_tokens);
long long lazy_threshold(const SimilaritySpec& spec, long long e_tokens);

// Multiset overlap of two ascending id sequences.
long long multiset_overlap(const std::vector<uint32_t>& a, const std::vector<uint32_t>& b);

// Exact JAC/COS/DICE value over ascending token-id multisets.
// Throws std::invalid_argument when either side is empty.
double set_similarity(SimFn fn, const std::vector<uint32_t>& a, const std::vector<uint32_t>& b);

double eds_value(long long ed, size_t len_a, size_t len_b);

// Banded bounded edit distance. Returns the exact distance when it is
// <= bound, std::nullopt (EXCEEDED) otherwise. Rows run over the shorter
// sequence; each row covers floor((bound-d)/2) + floor((bound+d)/2) + 1
// cells, and the scan stops early once every expected edit distance
// E(i,j) = M(i,j) + |(|b|-j) - (|a|-i)| in a row exceeds the bound.
std::optional<int> bounded_edit_distance(std::u32string_view a, std::u32string_view b, int bound);

// Incremental variant of the same band used by the join verifiers: the DP
// rows run over `data` and can be re-used across consecutive data strings
// sharing a prefix. `query` is fixed for the verifier's lifetime.
class BandedVerifier {
public:
    // bound >= 0; rows_valid() tells how many leading rows of the cached
    // table are still usable for the next data string.
    void reset(std::u32string_view query, int bound);
    // Computes ED(data, query) reusing cached rows for data[0, reuse).
    // Returns nullopt when the distance exceeds the bound.
    std::optional<int> distance(std::u32string_view data, size_t reuse);

private:
    std::u32string query_;
    int bound_ = -1;
    int lo_ = 0, hi_ = 0;
    // rows_[i] holds M(i, j) for j in [i - lo_, i + hi_], stored densely.
    std::vector<std::vector<int>> rows_;
    size_t rows_done_ = 0;       // rows valid for the current data prefix
    size_t data_len_ = SIZE_MAX; // cached rows are only reusable at one length
    size_t dead_row_ = SIZE_MAX; // row where early termination fired, if any

    bool compute_row(size_t i, std::u32string_view data);
};

} // namespace simtol
