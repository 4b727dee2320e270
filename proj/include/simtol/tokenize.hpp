#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace simtol {

// A q-gram (or word token) together with its 1-based start position: the
// character offset for q-grams, the token index for word tokens.
struct PositionalGram {
    std::u32string text;
    int pos = 0;

    bool operator==(const PositionalGram& o) const { return text == o.text && pos == o.pos; }
};

std::vector<PositionalGram> qgrams(std::u32string_view s, int q);
std::vector<PositionalGram> word_tokens(std::u32string_view s);

// Frequency-based total order over token texts. frequency = number of
// corpus records containing the token (document frequency); rank ascends by
// (frequency, text), so rank 1 is the rarest token. Tokens absent from the
// order have no rank and compare as rarer than every ranked token (ties
// between absent tokens break on text).
class GlobalOrder {
public:
    static GlobalOrder build(const std::vector<std::vector<std::u32string>>& corpus);

    std::optional<uint32_t> rank(const std::u32string& text) const;
    uint32_t frequency(const std::u32string& text) const;
    size_t distinct_tokens() const { return rank_.size(); }

    // Strict total order on token texts: (absent-first, rank, text).
    bool less(const std::u32string& a, const std::u32string& b) const;
    // Extends the order to positional grams with pos as the final tie-break.
    bool less(const PositionalGram& a, const PositionalGram& b) const;
    int compare(const std::u32string& a, const std::u32string& b) const;

private:
    struct U32Hash {
        size_t operator()(const std::u32string& s) const;
    };
    std::unordered_map<std::u32string, std::pair<uint32_t, uint32_t>, U32Hash> rank_; // text -> (rank, freq)
};

// All q-grams of the record sorted by (GlobalOrder, position).
std::vector<PositionalGram> ordered_grams(std::u32string_view record, int q, const GlobalOrder& order);

// UTF-8 <-> Unicode scalar value conversions used at the I/O boundary.
// Invalid bytes throw std::invalid_argument.
std::u32string decode_utf8(std::string_view bytes);
std::string encode_utf8(std::u32string_view s);

} // namespace simtol
