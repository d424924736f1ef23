#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <optional>
#include <vector>

#include "fairrecon/bytes.hpp"
#include "fairrecon/result.hpp"

namespace fairrecon::pubnmss {

using Field = boost::multiprecision::cpp_int;

/// 256-bit prime (the secp256k1 base field). Default modulus for the
/// threshold-2 sharing of the aggregator witness.
const Field& field_prime();

/// 17-bit Mersenne prime used by exhaustive toy-parameter tests.
const Field& toy_field_prime();

/// Commitment parameters. `randomness_bits` is the security parameter k;
/// `digest_bytes` selects the hash width (2 bytes gives the toy 16-bit hash
/// used for brute-force collision counting).
struct CommitParams {
  std::size_t randomness_bits = 128;
  std::size_t digest_bytes = 32;

  std::size_t randomness_bytes() const { return randomness_bits / 8; }
};

struct Tag {
  Bytes digest;
  bool operator==(const Tag&) const = default;
  std::string hex() const { return to_hex(digest); }
};

/// A share of the dealt secret plus its decommitment. Publishing a token is
/// what a claim witness consists of; anyone can check it against the tag.
struct TokenShare {
  Bytes share;
  Bytes randomness;
  bool operator==(const TokenShare&) const = default;
};

/// Degree-1 share of the aggregator witness w. `value` is the polynomial
/// evaluation at `index`; `decommitment` opens the public commitment c_i.
struct ThresholdShare {
  int index = 0;  // evaluation point, 1..n-2
  Field value;
  Bytes decommitment;
  bool operator==(const ThresholdShare&) const = default;
};

enum class ErrorCode {
  BadRandomnessLength,
  TooFewParties,
  MissingToken,
  InvalidToken,
  DuplicateIndex,
  InvalidShare,
  ComWMismatch,
};

struct Error {
  ErrorCode code;
  int index = -1;  // offending token/share index where applicable
};

const char* to_string(ErrorCode code);

/// Public verification state: everything any party needs to check published
/// witnesses. Serializing just this struct preserves all predicate decisions.
struct DealerPublic {
  std::vector<Tag> tags;               // tags[i-1] commits party i's token
  std::vector<Tag> share_commitments;  // c_i, empty unless dealt with extras
  Tag com_w;                           // commitment to w
  Bytes com_w_decommitment;            // d_w; published salt, w stays hidden
  CommitParams params;
  Field prime;
};

struct DealerOutput {
  int n = 0;
  std::vector<TokenShare> tokens;  // tokens[i-1] goes to party i
  Bytes secret;
  DealerPublic pub;

  // Present only when dealt with equalization extras. Shares and w are held
  // by the aggregator (party n-1); commitments live in `pub`.
  bool has_equiv_extras = false;
  std::vector<ThresholdShare> threshold_shares;  // S_1..S_{n-2}
  Bytes w;
};

struct DealerConfig {
  CommitParams commit;
  Field prime = field_prime();
  std::uint64_t seed = 1;
};

/// Hash commitment: digest of message || randomness. Binding and hiding are
/// the only properties exercised at runtime.
Result<Tag, Error> commit(const Bytes& message, const Bytes& randomness,
                          const CommitParams& params = {});

bool verify_token(const Tag& tag, const TokenShare& token,
                  const CommitParams& params = {});

/// n-of-n sharing of `secret` (XOR masking) with one tag per share. With
/// `with_equiv_extras`, additionally samples w uniformly from {0,1}^k and
/// deals degree-1 shares of it at evaluation points 1..n-2 over `prime`.
Result<DealerOutput, Error> deal_output(const Bytes& secret, int n,
                                        bool with_equiv_extras,
                                        const DealerConfig& config = {});

/// Rebuilds the secret from all n tokens, verifying each against its tag.
Result<Bytes, Error> reconstruct_output(const std::vector<TokenShare>& tokens,
                                        const std::vector<Tag>& tags,
                                        const CommitParams& params = {});

/// Interpolates w at 0 from two shares, checking both against their
/// commitments and the result against com_w.
Result<Bytes, Error> reconstruct_w(const ThresholdShare& a, const ThresholdShare& b,
                                   const std::vector<Tag>& share_commitments,
                                   const Tag& com_w, const Bytes& com_w_decommitment,
                                   const Field& prime, const CommitParams& params = {});

Bytes field_to_bytes(const Field& v, std::size_t width);
Field bytes_to_field(const Bytes& b);

}  // namespace fairrecon::pubnmss
