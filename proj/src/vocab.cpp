#include "mman/vocab.hpp"

#include <algorithm>
#include <fstream>

#include "mman/errors.hpp"

namespace mman {

namespace {

const std::string kPadToken = "<pad>";
const std::string kUnkToken = "<unk>";

}  // namespace

Vocabulary::Vocabulary() {
    tokens_ = {kPadToken, kUnkToken};
    index_[kPadToken] = kPad;
    index_[kUnkToken] = kUnk;
}

Vocabulary Vocabulary::build(const std::vector<std::vector<std::string>>& sequences, std::size_t cap) {
    if (cap < 2) throw Error("vocabulary cap must leave room for the reserved entries");
    std::map<std::string, std::size_t> counts;
    for (const auto& seq : sequences) {
        for (const auto& tok : seq) {
            if (tok.empty() || tok == kPadToken || tok == kUnkToken) continue;
            ++counts[tok];
        }
    }
    std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });

    Vocabulary v;
    for (const auto& [tok, count] : ranked) {
        (void)count;
        if (v.tokens_.size() >= cap) break;
        v.index_[tok] = static_cast<int>(v.tokens_.size());
        v.tokens_.push_back(tok);
    }
    return v;
}

int Vocabulary::index_of(const std::string& token) const {
    auto it = index_.find(token);
    return it == index_.end() ? kUnk : it->second;
}

const std::string& Vocabulary::token_at(int index) const {
    if (index < 0 || index >= size()) throw Error("vocabulary index out of range");
    return tokens_[static_cast<std::size_t>(index)];
}

std::vector<int> Vocabulary::map(const std::vector<std::string>& tokens) const {
    std::vector<int> ids;
    ids.reserve(tokens.size());
    for (const auto& tok : tokens) ids.push_back(index_of(tok));
    return ids;
}

void Vocabulary::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open vocabulary file for writing: " + path.string());
    for (int i = 0; i < size(); ++i) {
        out << i << '\t' << tokens_[static_cast<std::size_t>(i)] << '\n';
    }
    if (!out) throw Error("failed writing vocabulary file: " + path.string());
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open vocabulary file: " + path.string());
    Vocabulary v;
    v.tokens_.clear();
    v.index_.clear();
    std::string line;
    int expected = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos) throw Error("malformed vocabulary line: " + line);
        int idx = 0;
        try {
            idx = std::stoi(line.substr(0, tab));
        } catch (const std::exception&) {
            throw Error("malformed vocabulary index in line: " + line);
        }
        if (idx != expected) throw Error("vocabulary indices must be contiguous from 0");
        std::string tok = line.substr(tab + 1);
        v.index_[tok] = idx;
        v.tokens_.push_back(std::move(tok));
        ++expected;
    }
    if (v.tokens_.size() < 2 || v.tokens_[0] != kPadToken || v.tokens_[1] != kUnkToken) {
        throw Error("vocabulary file lacks the reserved pad/unk entries: " + path.string());
    }
    return v;
}

}  // namespace mman
