#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace drsim {

using Rng = std::mt19937_64;

/// Derive an independent 64-bit seed for a named substream of a root seed.
/// Enabling one noise source must not perturb the draws of another, so every
/// consumer (per-server noise, sensor, channel) gets its own stream.
std::uint64_t derive_seed(std::uint64_t root, std::string_view stream);

Rng make_stream(std::uint64_t root, std::string_view stream);

} // namespace drsim
