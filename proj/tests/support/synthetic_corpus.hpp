#pragma once

#include <vector>

#include "mman/dataset.hpp"

namespace mman::test {

// 64 small utility functions spanning scalar math, digit tricks, array
// reductions, searches, in-place transforms, bit fiddling, geometry, and
// stateful scans. Every function parses, has a distinctive name and doc
// comment, and the set covers loops, branches, and early returns.
std::vector<mman::CorpusRecord> synthetic_corpus();

}  // namespace mman::test
