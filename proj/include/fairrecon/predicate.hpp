#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fairrecon/pubnmss.hpp"

namespace fairrecon::settlement {

using PartyId = int;  // 1-based

/// Compact view of which public items a witness carries: token bit (i-1) for
/// party i, share bit (i-1) for threshold share index i, plus w itself.
struct WitnessRef {
  std::uint32_t tokens = 0;
  std::uint32_t shares = 0;
  bool w = false;

  bool covers(const WitnessRef& need) const {
    return (tokens & need.tokens) == need.tokens &&
           (shares & need.shares) == need.shares && (w || !need.w);
  }
  WitnessRef& merge(const WitnessRef& other) {
    tokens |= other.tokens;
    shares |= other.shares;
    w = w || other.w;
    return *this;
  }
  bool operator==(const WitnessRef&) const = default;
};

inline std::uint32_t bit_of(PartyId p) { return 1u << (p - 1); }

/// Claim/refund condition attached to a deposit. Evaluation is deterministic
/// and total over candidate witnesses; context is the public dealer state.
struct Predicate {
  enum class Kind { TokenConjunction, SecretShare, WitnessW, Tautology };

  Kind kind = Kind::Tautology;
  std::vector<PartyId> token_parties;  // TokenConjunction
  int share_index = 0;                 // SecretShare

  static Predicate tokens(std::vector<PartyId> parties);
  static Predicate secret_share(int index);
  static Predicate witness_w();
  static Predicate tautology();

  WitnessRef required() const;
  std::string to_string() const;
  bool operator==(const Predicate&) const = default;
};

/// A published witness: the actual tokens/shares/value, as broadcast in a
/// claim or refund.
struct Witness {
  std::map<PartyId, pubnmss::TokenShare> tokens;
  std::map<int, pubnmss::ThresholdShare> shares;
  std::optional<Bytes> w_value;

  WitnessRef ref() const;
  Bytes canonical_bytes() const;
  std::string digest_hex() const;  // first 8 bytes of sha256, for traces
};

/// Public verification state plus a cache of already-verified items. The
/// cache makes repeated structural claims cheap: a published item whose bytes
/// match one verified earlier skips the hash.
class PredicateContext {
 public:
  explicit PredicateContext(const pubnmss::DealerPublic* pub) : pub_(pub) {}

  const pubnmss::DealerPublic& pub() const { return *pub_; }

  bool check_token(PartyId party, const pubnmss::TokenShare& token) const;
  bool check_share(int index, const pubnmss::ThresholdShare& share) const;
  bool check_w(const Bytes& w) const;

  /// Full evaluation: verifies every item the predicate demands.
  bool eval(const Predicate& pred, const Witness& witness) const;

 private:
  const pubnmss::DealerPublic* pub_;
  mutable std::vector<std::optional<pubnmss::TokenShare>> token_cache_;
  mutable std::vector<std::optional<pubnmss::ThresholdShare>> share_cache_;
  mutable std::optional<Bytes> w_cache_;
};

}  // namespace fairrecon::settlement
