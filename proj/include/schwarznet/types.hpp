#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace schwarznet {

using Index = std::int32_t;
using VertexList = std::vector<Index>;

// Sentinel for unreachable vertices in BFS distances.
inline constexpr int kUnreachable = std::numeric_limits<int>::max();

// Malformed user input: bad ids, dimension mismatch, invalid config.
class input_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// A numerical premise is violated: non-PD block, infinite bandwidth,
// non-certifiable eigenvalue bound.
class numeric_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// The iteration is detected to diverge (spectral radius >= 1 likely).
class divergence_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace schwarznet
