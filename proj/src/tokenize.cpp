#include "simtol/tokenize.hpp"

#include <algorithm>
#include <stdexcept>

namespace simtol {

namespace {
bool is_space(char32_t c) {
    return c == U' ' || c == U'\t' || c == U'\r' || c == U'\n' || c == U'\f' || c == U'\v';
}
} // namespace

std::vector<PositionalGram> qgrams(std::u32string_view s, int q) {
    std::vector<PositionalGram> out;
    if (q < 1 || (size_t)q > s.size())
        return out;
    out.reserve(s.size() - q + 1);
    for (size_t i = 0; i + q <= s.size(); ++i)
        out.push_back({std::u32string(s.substr(i, q)), (int)i + 1});
    return out;
}

std::vector<PositionalGram> word_tokens(std::u32string_view s) {
    std::vector<PositionalGram> out;
    size_t i = 0;
    int index = 0;
    while (i < s.size()) {
        while (i < s.size() && is_space(s[i]))
            ++i;
        if (i >= s.size())
            break;
        size_t j = i;
        while (j < s.size() && !is_space(s[j]))
            ++j;
        out.push_back({std::u32string(s.substr(i, j - i)), ++index});
        i = j;
    }
    return out;
}

size_t GlobalOrder::U32Hash::operator()(const std::u32string& s) const {
    // FNV-1a over the scalar values.
    uint64_t h = 1469598103934665603ull;
    for (char32_t c : s) {
        h ^= (uint64_t)c;
        h *= 1099511628211ull;
    }
    return (size_t)h;
}

GlobalOrder GlobalOrder::build(const std::vector<std::vector<std::u32string>>& corpus) {
    if (corpus.empty())
        throw std::invalid_argument("global order requires a non-empty corpus");
    GlobalOrder g;
    std::unordered_map<std::u32string, uint32_t, U32Hash> freq;
    std::vector<std::u32string> scratch;
    for (const auto& record : corpus) {
        scratch.assign(record.begin(), record.end());
        std::sort(scratch.begin(), scratch.end());
        scratch.erase(std::unique(scratch.begin(), scratch.end()), scratch.end());
        for (auto& t : scratch)
            ++freq[t];
    }
    std::vector<std::pair<uint32_t, const std::u32string*>> order;
    order.reserve(freq.size());
    for (const auto& [text, f] : freq)
        order.emplace_back(f, &text);
    std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first)
            return a.first < b.first;
        return *a.second < *b.second;
    });
    uint32_t next_rank = 1;
    for (const auto& [f, text] : order)
        g.rank_.emplace(*text, std::make_pair(next_rank++, f));
    return g;
}

std::optional<uint32_t> GlobalOrder::rank(const std::u32string& text) const {
    auto it = rank_.find(text);
    if (it == rank_.end())
        return std::nullopt;
    return it->second.first;
}

uint32_t GlobalOrder::frequency(const std::u32string& text) const {
    auto it = rank_.find(text);
    return it == rank_.end() ? 0 : it->second.second;
}

int GlobalOrder::compare(const std::u32string& a, const std::u32string& b) const {
    auto ra = rank(a), rb = rank(b);
    if (!ra && !rb)
        return a.compare(b) < 0 ? -1 : (a == b ? 0 : 1);
    if (!ra)
        return -1; // absent tokens are the rarest possible
    if (!rb)
        return 1;
    if (*ra != *rb)
        return *ra < *rb ? -1 : 1;
    return 0;
}

bool GlobalOrder::less(const std::u32string& a, const std::u32string& b) const {
    return compare(a, b) < 0;
}

bool GlobalOrder::less(const PositionalGram& a, const PositionalGram& b) const {
    int c = compare(a.text, b.text);
    if (c != 0)
        return c < 0;
    return a.pos < b.pos;
}

std::vector<PositionalGram> ordered_grams(std::u32string_view record, int q, const GlobalOrder& order) {
    auto grams = qgrams(record, q);
    std::sort(grams.begin(), grams.end(),
              [&](const PositionalGram& a, const PositionalGram& b) { return order.less(a, b); });
    return grams;
}

std::u32string decode_utf8(std::string_view bytes) {
    std::u32string out;
    out.reserve(bytes.size());
    size_t i = 0;
    while (i < bytes.size()) {
        unsigned char c = bytes[i];
        char32_t cp = 0;
        int extra = 0;
        if (c < 0x80) {
            cp = c;
        } else if ((c & 0xE0) == 0xC0) {
            cp = c & 0x1F;
            extra = 1;
        } else if ((c & 0xF0) == 0xE0) {
            cp = c & 0x0F;
            extra = 2;
        } else if ((c & 0xF8) == 0xF0) {
            cp = c & 0x07;
            extra = 3;
        } else {
            throw std::invalid_argument("invalid UTF-8 byte");
        }
        if (i + extra >= bytes.size())
            throw std::invalid_argument("truncated UTF-8 sequence");
        for (int k = 1; k <= extra; ++k) {
            unsigned char cc = bytes[i + k];
            if ((cc & 0xC0) != 0x80)
                throw std::invalid_argument("invalid UTF-8 continuation byte");
            cp = (cp << 6) | (cc & 0x3F);
        }
        out.push_back(cp);
        i += extra + 1;
    }
    return out;
}

std::string encode_utf8(std::u32string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char32_t cp : s) {
        if (cp < 0x80) {
            out.push_back((char)cp);
        } else if (cp < 0x800) {
            out.push_back((char)(0xC0 | (cp >> 6)));
            out.push_back((char)(0x80 | (cp & 0x3F)));
        } else if (cp < 0x10000) {
            out.push_back((char)(0xE0 | (cp >> 12)));
            out.push_back((char)(0x80 | ((cp >> 6) & 0x3F)));
            out.push_back((char)(0x80 | (cp & 0x3F)));
        } else {
            out.push_back((char)(0xF0 | (cp >> 18)));
            out.push_back((char)(0x80 | ((cp >> 12) & 0x3F)));
            out.push_back((char)(0x80 | ((cp >> 6) & 0x3F)));
            out.push_back((char)(0x80 | (cp & 0x3F)));
        }
    }
    return out;
}

} // namespace simtol
