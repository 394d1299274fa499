#include "mman/description.hpp"

#include <cctype>
#include <sstream>

#include "mman/errors.hpp"

namespace mman {

namespace {

// Drops the /* */ markers and the decorative leading * of each line.
std::string strip_comment_markers(const std::string& block) {
    std::string text = block;
    if (auto open = text.find("/*"); open != std::string::npos) {
        std::size_t i = open + 2;
        while (i < text.size() && text[i] == '*') ++i;
        text.erase(0, i);
    }
    if (auto close = text.rfind("*/"); close != std::string::npos) {
        text.erase(close);
    }

    std::string out;
    std::istringstream lines(text);
    std::string line;
    while (std::getline(lines, line)) {
        std::size_t i = 0;
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        while (i < line.size() && line[i] == '*') ++i;
        if (i < line.size() && line[i] == ' ') ++i;
        if (!out.empty()) out.push_back(' ');
        out.append(line, i, std::string::npos);
    }
    return out;
}

std::string first_sentence(const std::string& text) {
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] != '.') continue;
        const bool at_end = i + 1 == text.size();
        if (at_end || std::isspace(static_cast<unsigned char>(text[i + 1]))) {
            return text.substr(0, i);
        }
    }
    return text;
}

}  // namespace

std::vector<std::string> extract_description(const std::string& comment_block, std::size_t cap) {
    const std::string sentence = first_sentence(strip_comment_markers(comment_block));

    std::vector<std::string> tokens;
    std::string cur;
    auto flush = [&] {
        if (!cur.empty() && tokens.size() < cap) tokens.push_back(cur);
        cur.clear();
    };
    for (char c : sentence) {
        if (std::isalnum(static_cast<unsigned char>(c))) {
            cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        } else {
            flush();
        }
    }
    flush();

    if (tokens.empty()) throw NoDescription();
    return tokens;
}

}  // namespace mman
