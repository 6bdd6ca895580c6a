#pragma once

// One-pass reference for the consecutive-duplicate filter: counts records
// whose message differs from the record right before it. Test-only.

#include <cstddef>
#include <string>
#include <vector>

namespace oracle {

template <typename Range, typename MessageOf>
std::size_t count_survivors(const Range& records, MessageOf message_of) {
  std::size_t kept = 0;
  const std::string* prev = nullptr;
  for (const auto& r : records) {
    const std::string& m = message_of(r);
    if (prev == nullptr || *prev != m) ++kept;
    prev = &m;
  }
  return kept;
}

/// Number of maximal runs of `needle` of length >= 1.
template <typename Range, typename MessageOf>
std::size_t count_bursts(const Range& records, MessageOf message_of, const std::string& needle) {
  std::size_t bursts = 0;
  bool inside = false;
  for (const auto& r : records) {
    bool hit = message_of(r) == needle;
    if (hit && !inside) ++bursts;
    inside = hit;
  }
  return bursts;
}

}  // namespace oracle
