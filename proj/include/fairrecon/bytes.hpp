#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace fairrecon {

using Bytes = std::vector<std::uint8_t>;

std::string to_hex(const Bytes& data);
Bytes from_hex(std::string_view hex);

/// SHA-256 digest (32 bytes).
Bytes sha256(const Bytes& data);

/// SHA-256 truncated to the first `out_bytes` bytes. Used for toy-parameter
/// commitments where collisions are expected and counted.
Bytes sha256_truncated(const Bytes& data, std::size_t out_bytes);

/// Seeded deterministic byte source. Every randomized artifact (dealer
/// outputs, keys, nonces) draws from one of these so runs are replayable.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t u64() { return eng_(); }

  std::uint64_t below(std::uint64_t bound) {
    return bound == 0 ? 0 : u64() % bound;
  }

  Bytes bytes(std::size_t n) {
    Bytes out(n);
    for (auto& b : out) b = static_cast<std::uint8_t>(u64() & 0xff);
    return out;
  }

 private:
  std::mt19937_64 eng_;
};

inline Bytes concat(const Bytes& a, const Bytes& b) {
  Bytes out;
  out.reserve(a.size() + b.size());
  out.insert(out.end(), a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

/// Appends a length-prefixed field; gives an unambiguous flat encoding for
/// digests over structured data.
void put_field(Bytes& out, const Bytes& field);
void put_u64(Bytes& out, std::uint64_t v);

}  // namespace fairrecon
