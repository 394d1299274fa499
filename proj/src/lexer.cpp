#include "mman/lexer.hpp"

#include <cctype>

namespace mman {

namespace {

constexpr std::size_t kBodyCap = 100;
constexpr std::size_t kNameCap = 50;

bool is_delimiter(char c) {
    switch (c) {
        case '.':
        case ',':
        case '"':
        case ';':
        case ')':
        case '(':
        case '!':
        case '{':
        case '}':
            return true;
        default:
            return std::isspace(static_cast<unsigned char>(c)) != 0;
    }
}

char lower(char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); }

}  // namespace

TokenSequence lex(const std::string& source_text) {
    TokenSequence out;
    std::string cur;
    auto flush = [&] {
        if (cur.empty()) return;
        if (out.tokens.size() < kBodyCap) {
            out.tokens.push_back(cur);
        } else {
            out.truncated = true;
        }
        cur.clear();
    };
    for (char c : source_text) {
        if (is_delimiter(c)) {
            flush();
        } else {
            cur.push_back(lower(c));
        }
    }
    flush();
    return out;
}

std::vector<std::string> split_identifier(const std::string& name) {
    std::vector<std::string> out;
    std::string cur;
    auto flush = [&] {
        if (!cur.empty() && out.size() < kNameCap) out.push_back(cur);
        cur.clear();
    };
    for (std::size_t i = 0; i < name.size(); ++i) {
        const char c = name[i];
        if (c == '_') {
            flush();
            continue;
        }
        if (i > 0 && std::islower(static_cast<unsigned char>(name[i - 1])) &&
            std::isupper(static_cast<unsigned char>(c))) {
            flush();
        }
        cur.push_back(lower(c));
    }
    flush();
    return out;
}

}  // namespace mman
