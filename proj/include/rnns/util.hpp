#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace rnns {

// splitmix64 finalizer. Every deterministic hash and random stream in the
// project is built from this one primitive so results are identical across
// platforms and runs.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Seeded byte-string hash: chains mix64 over the bytes, with the length
// folded in up front so prefixes do not collide trivially.
constexpr std::uint64_t hash_bytes(std::string_view bytes, std::uint64_t seed) {
  std::uint64_t h = mix64(seed ^ (0x9e3779b97f4a7c15ULL + bytes.size()));
  for (unsigned char c : bytes) h = mix64(h ^ c);
  return h;
}

// Deterministic RNG (splitmix64 stream).
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // uniform double in [0, 1)
  double next_unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // uniform double in [-1, 1)
  double next_signed_unit() { return 2.0 * next_unit() - 1.0; }

  // uniform integer in [0, n); Lemire reduction, n > 0
  std::uint64_t next_below(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next()) * n) >> 64);
  }

 private:
  std::uint64_t state_;
};

// Derives the per-sample random stream seed from the run seed.
constexpr std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t index) {
  return mix64(seed ^ mix64(index + 1));
}

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view content);

}  // namespace rnns
