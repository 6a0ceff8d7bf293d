#pragma once

#include <string>
#include <vector>

#include "klnorm/types.hpp"

namespace klnorm::test {

// (22, 4 x 8): one hot symbol and eight cold ones.
inline std::vector<u64> cold8() { return {22, 4, 4, 4, 4, 4, 4, 4, 4}; }

inline u64 op(const NormReport& r, const std::string& key) {
  const auto it = r.op_counts.find(key);
  return it == r.op_counts.end() ? 0 : it->second;
}

}  // namespace klnorm::test
