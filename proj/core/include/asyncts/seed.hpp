#pragma once

#include <cstdint>
#include <string_view>

namespace asyncts {

// Named sub-seeds. All randomness in a run is derived from the single
// configured seed so that every stream (init, per-client sampling, jitter)
// is reproducible and independent of the others.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream, std::uint64_t index = 0);

namespace streams {
inline constexpr std::string_view init = "init";
inline constexpr std::string_view client = "client";
inline constexpr std::string_view jitter = "jitter";
}  // namespace streams

}  // namespace asyncts
