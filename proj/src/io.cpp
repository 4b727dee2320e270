#include "simtol/io.hpp"

#include "simtol/tokenize.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace simtol::io {

namespace {
std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        lines.push_back(line);
    }
    return lines;
}
} // namespace

std::vector<std::u32string> read_string_file(const std::string& path) {
    auto lines = read_lines(path);
    std::vector<std::u32string> out;
    out.reserve(lines.size());
    for (size_t i = 0; i < lines.size(); ++i) {
        try {
            out.push_back(decode_utf8(lines[i]));
        } catch (const std::exception& e) {
            throw std::runtime_error(path + ":" + std::to_string(i + 1) + ": " + e.what());
        }
    }
    return out;
}

std::vector<std::vector<std::string>> read_set_file(const std::string& path,
                                                    std::vector<std::string>* warnings) {
    auto lines = read_lines(path);
    std::vector<std::vector<std::string>> out;
    out.reserve(lines.size());
    for (size_t i = 0; i < lines.size(); ++i) {
        std::vector<std::string> tokens;
        size_t pos = 0;
        const std::string& line = lines[i];
        while (pos < line.size()) {
            size_t sp = line.find(' ', pos);
            if (sp == std::string::npos)
                sp = line.size();
            if (sp > pos)
                tokens.emplace_back(line.substr(pos, sp - pos));
            pos = sp + 1;
        }
        std::vector<std::string> uniq = tokens;
        std::sort(uniq.begin(), uniq.end());
        uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
        if (uniq.size() != tokens.size() && warnings)
            warnings->push_back(path + ":" + std::to_string(i + 1) +
                                ": duplicate tokens collapsed");
        out.push_back(std::move(uniq));
    }
    return out;
}

std::string format_value(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

} // namespace simtol::io
