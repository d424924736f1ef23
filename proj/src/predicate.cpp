#include "fairrecon/predicate.hpp"

#include <sstream>

namespace fairrecon::settlement {

Predicate Predicate::tokens(std::vector<PartyId> parties) {
  Predicate p;
  p.kind = Kind::TokenConjunction;
  p.token_parties = std::move(parties);
  return p;
}

Predicate Predicate::secret_share(int index) {
  Predicate p;
  p.kind = Kind::SecretShare;
  p.share_index = index;
  return p;
}

Predicate Predicate::witness_w() {
  Predicate p;
  p.kind = Kind::WitnessW;
  return p;
}

Predicate Predicate::tautology() { return Predicate{}; }

WitnessRef Predicate::required() const {
  WitnessRef ref;
  switch (kind) {
    case Kind::TokenConjunction:
      for (PartyId p : token_parties) ref.tokens |= bit_of(p);
      break;
    case Kind::SecretShare:
      ref.shares |= bit_of(share_index);
      break;
    case Kind::WitnessW:
      ref.w = true;
      break;
    case Kind::Tautology:
      break;
  }
  return ref;
}

std::string Predicate::to_string() const {
  switch (kind) {
    case Kind::TokenConjunction: {
      std::ostringstream os;
      for (std::size_t i = 0; i < token_parties.size(); ++i) {
        if (i) os << "&";
        os << "T" << token_parties[i];
      }
      return token_parties.empty() ? "true" : os.str();
    }
    case Kind::SecretShare:
      return "S" + std::to_string(share_index);
    case Kind::WitnessW:
      return "w";
    case Kind::Tautology:
      return "true";
  }
  return "?";
}

WitnessRef Witness::ref() const {
  WitnessRef r;
  for (const auto& [party, _] : tokens) r.tokens |= bit_of(party);
  for (const auto& [index, _] : shares) r.shares |= bit_of(index);
  r.w = w_value.has_value();
  return r;
}

Bytes Witness::canonical_bytes() const {
  Bytes buf;
  for (const auto& [party, token] : tokens) {
    put_u64(buf, 1);
    put_u64(buf, static_cast<std::uint64_t>(party));
    put_field(buf, token.share);
    put_field(buf, token.randomness);
  }
  for (const auto& [index, share] : shares) {
    put_u64(buf, 2);
    put_u64(buf, static_cast<std::uint64_t>(index));
    put_field(buf, pubnmss::field_to_bytes(share.value, 40));
    put_field(buf, share.decommitment);
  }
  if (w_value) {
    put_u64(buf, 3);
    put_field(buf, *w_value);
  }
  return buf;
}

std::string Witness::digest_hex() const {
  Bytes digest = sha256(canonical_bytes());
  digest.resize(8);
  return to_hex(digest);
}

bool PredicateContext::check_token(PartyId party, const pubnmss::TokenShare& token) const {
  const auto& tags = pub_->tags;
  if (party < 1 || party > static_cast<int>(tags.size())) return false;
  if (token_cache_.size() < tags.size()) token_cache_.resize(tags.size());
  auto& slot = token_cache_[party - 1];
  if (slot && *slot == token) return true;
  if (!pubnmss::verify_token(tags[party - 1], token, pub_->params)) return false;
  slot = token;
  return true;
}

bool PredicateContext::check_share(int index, const pubnmss::ThresholdShare& share) const {
  const auto& cs = pub_->share_commitments;
  if (index < 1 || index > static_cast<int>(cs.size()) || share.index != index) return false;
  if (share_cache_.size() < cs.size()) share_cache_.resize(cs.size());
  auto& slot = share_cache_[index - 1];
  if (slot && *slot == share) return true;
  const std::size_t width =
      static_cast<std::size_t>((boost::multiprecision::msb(pub_->prime) + 8) / 8);
  auto c = pubnmss::commit(pubnmss::field_to_bytes(share.value, width), share.decommitment,
                           pub_->params);
  if (!c.ok() || !(c.value() == cs[index - 1])) return false;
  slot = share;
  return true;
}

bool PredicateContext::check_w(const Bytes& w) const {
  if (w_cache_ && *w_cache_ == w) return true;
  auto c = pubnmss::commit(w, pub_->com_w_decommitment, pub_->params);
  if (!c.ok() || !(c.value() == pub_->com_w)) return false;
  w_cache_ = w;
  return true;
}

bool PredicateContext::eval(const Predicate& pred, const Witness& witness) const {
  switch (pred.kind) {
    case Predicate::Kind::Tautology:
      return true;
    case Predicate::Kind::TokenConjunction:
      for (PartyId p : pred.token_parties) {
        auto it = witness.tokens.find(p);
        if (it == witness.tokens.end() || !check_token(p, it->second)) return false;
      }
      return true;
    case Predicate::Kind::SecretShare: {
      auto it = witness.shares.find(pred.share_index);
      return it != witness.shares.end() && check_share(pred.share_index, it->second);
    }
    case Predicate::Kind::WitnessW:
      return witness.w_value && check_w(*witness.w_value);
  }
  return false;
}

}  // namespace fairrecon::settlement
