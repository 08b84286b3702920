#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace pan {

using Rng = std::mt19937_64;

// Every random stream in a run is derived from one root seed. A stream is
// named ("init", "shuffle", "spatial_dropout", ...) and optionally indexed
// (epoch, batch), and its seed is splitmix64 over the root, an FNV-1a hash of
// the name, and the indices. Adding a stream never perturbs existing ones.
std::uint64_t derive_seed(std::uint64_t root, std::string_view stream,
                          std::uint64_t index0 = 0, std::uint64_t index1 = 0);

inline Rng make_rng(std::uint64_t root, std::string_view stream, std::uint64_t index0 = 0,
                    std::uint64_t index1 = 0) {
  return Rng(derive_seed(root, stream, index0, index1));
}

}  // namespace pan
