#pragma once

#include <string>
#include <vector>

namespace mman {

// First sentence of a block comment as lowercase word tokens. Throws
// NoDescription when nothing survives the stripping.
std::vector<std::string> extract_description(const std::string& comment_block, std::size_t cap = 30);

}  // namespace mman
