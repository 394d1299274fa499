#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace mman {

// Token table with two reserved rows. Built from training data only; lookups
// of unknown tokens fall back to UNK.
class Vocabulary {
public:
    static constexpr int kPad = 0;
    static constexpr int kUnk = 1;

    Vocabulary();

    // Most frequent tokens win; frequency ties resolve alphabetically. cap
    // bounds the total size including the two reserved entries.
    static Vocabulary build(const std::vector<std::vector<std::string>>& sequences, std::size_t cap);

    int index_of(const std::string& token) const;  // kUnk when absent
    const std::string& token_at(int index) const;
    int size() const { return static_cast<int>(tokens_.size()); }

    std::vector<int> map(const std::vector<std::string>& tokens) const;

    void save(const std::filesystem::path& path) const;
    static Vocabulary load(const std::filesystem::path& path);

private:
    std::vector<std::string> tokens_;
    std::map<std::string, int> index_;
};

}  // namespace mman
