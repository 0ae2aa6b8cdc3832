#pragma once

#include <array>
#include <cstddef>
#include <cstdint>

namespace sobolrob::rng {

// Philox 4x32-10 counter-based generator (Salmon et al., SC'11). A pure
// function of (counter, key), so any draw in any stream can be produced at
// random access. Sampling built on top of it is reproducible independent of
// evaluation order and thread count.
inline std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                               std::array<std::uint32_t, 2> key) {
  constexpr std::uint32_t kMul0 = 0xD2511F53u, kMul1 = 0xCD9E8D57u;
  constexpr std::uint32_t kWeyl0 = 0x9E3779B9u, kWeyl1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    const std::uint64_t p0 = std::uint64_t(kMul0) * ctr[0];
    const std::uint64_t p1 = std::uint64_t(kMul1) * ctr[2];
    ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
           static_cast<std::uint32_t>(p1),
           static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
           static_cast<std::uint32_t>(p0)};
  }
  return ctr;
}

// Stream layout. One run seed plus these ids determine every draw made
// anywhere in the library.
inline constexpr std::uint64_t kStreamSample = 0;             // X0 entries, index = row * p + col
inline constexpr std::uint64_t kStreamPickFreeze = 1;         // + column k (0-based), index = row
inline constexpr std::uint64_t kStreamSubsample = 1ull << 32; // + replicate id

// index-th uniform of the given stream, in the open interval (0,1).
inline double uniform01(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  const std::uint64_t block = index >> 1;
  const auto out = philox4x32({static_cast<std::uint32_t>(block),
                               static_cast<std::uint32_t>(block >> 32),
                               static_cast<std::uint32_t>(stream),
                               static_cast<std::uint32_t>(stream >> 32)},
                              {static_cast<std::uint32_t>(seed),
                               static_cast<std::uint32_t>(seed >> 32)});
  const std::size_t lane = index & 1;
  const std::uint64_t bits = (std::uint64_t(out[2 * lane + 1]) << 32) | out[2 * lane];
  // 53-bit mantissa offset by half an ulp: 0 and 1 are never produced.
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1p-53;
}

}  // namespace sobolrob::rng
