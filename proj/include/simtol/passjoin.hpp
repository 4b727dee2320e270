#pragma once

#include "simtol/core.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace simtol::passjoin {

enum class Strategy { Length, Shift, Position, MultiMatch };

// Even partition segment: 1-based character start and length.
struct Segment {
    int start, len;
};

// tau+1 disjoint covering segments; the first tau+1-k segments carry
// floor(len/(tau+1)) characters, the last k = len mod (tau+1) one more.
// Returns nullopt when len < tau+1 (short-record fallback applies).
std::optional<std::vector<Segment>> partition_even(int len, int tau);

// Start-position range (1-based, inclusive; empty when lo > hi) of the
// substrings selected for slot `slot` of length-l records. pi/li are the
// slot's segment start and length, s_len the probing string's length.
struct StartRange {
    int lo, hi;
    bool empty() const { return lo > hi; }
    int size() const { return empty() ? 0 : hi - lo + 1; }
};
StartRange select_range(Strategy st, int s_len, int l, int tau, int slot, int pi, int li);

// Per-slot substring start lists W(s, L_l^i), slot index 0-based in the
// outer vector. Requires l >= tau+1.
std::vector<std::vector<int>> select_substrings(int s_len, int l, int tau, Strategy st);

// Extension-based verification of a candidate whose slot-`slot` segment
// (r[pi, pi+li-1]) matches s[p, p+li-1]. Left parts are checked under
// tau_l = min(tau - ||r_r|-|s_r||, slot-1), right parts under
// tau_r = min(tau+1-slot, tau-d_l). Returns d_l + d_r on acceptance.
std::optional<int> extension_verify(std::u32string_view r, std::u32string_view s, int slot,
                                    int pi, int li, int p, int tau);

struct JoinPair {
    uint32_t a, b; // a < b for self-joins
    int ed;
    double eds; // 1 - ed/max(len); meaningful for join_eds
    bool operator<(const JoinPair& o) const { return a != o.a ? a < o.a : b < o.b; }
    bool operator==(const JoinPair& o) const { return a == o.a && b == o.b; }
};

struct JoinStats {
    long long probes = 0;     // inverted-list entries touched
    long long candidates = 0; // extension verifications attempted
    long long live_lengths = 0; // max simultaneously indexed lengths
};

struct JoinOptions {
    Strategy strategy = Strategy::MultiMatch;
    bool share_prefix = true;
    int threads = 1; // probe-side workers for the R-S join
};

std::vector<JoinPair> join_ed(const std::vector<std::u32string>& records, int tau,
                              const JoinOptions& opt = {}, JoinStats* stats = nullptr);
std::vector<JoinPair> join_ed(const std::vector<std::u32string>& r,
                              const std::vector<std::u32string>& s, int tau,
                              const JoinOptions& opt = {}, JoinStats* stats = nullptr);
std::vector<JoinPair> join_eds(const std::vector<std::u32string>& records, double delta,
                               const JoinOptions& opt = {}, JoinStats* stats = nullptr);

} // namespace simtol::passjoin
