#pragma once

#include <string>
#include <vector>

namespace mman {

struct TokenSequence {
    std::vector<std::string> tokens;
    bool truncated = false;
};

// Crude lexical split used for the token modality: runs between delimiters,
// lowercased, capped at 100. This is intentionally not a C tokenizer.
TokenSequence lex(const std::string& source_text);

// Subtokens of an identifier at underscores and lower-to-upper transitions,
// lowercased, capped at 50.
std::vector<std::string> split_identifier(const std::string& name);

}  // namespace mman
