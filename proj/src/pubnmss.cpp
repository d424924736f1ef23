#include "fairrecon/pubnmss.hpp"

#include <algorithm>

namespace fairrecon::pubnmss {

const Field& field_prime() {
  // 2^256 - 2^32 - 977
  static const Field p = [] {
    Field v = Field(1) << 256;
    v -= Field(1) << 32;
    v -= 977;
    return v;
  }();
  return p;
}

const Field& toy_field_prime() {
  static const Field p = 131071;  // 2^17 - 1
  return p;
}

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::BadRandomnessLength: return "BadRandomnessLength";
    case ErrorCode::TooFewParties: return "TooFewParties";
    case ErrorCode::MissingToken: return "MissingToken";
    case ErrorCode::InvalidToken: return "InvalidToken";
    case ErrorCode::DuplicateIndex: return "DuplicateIndex";
    case ErrorCode::InvalidShare: return "InvalidShare";
    case ErrorCode::ComWMismatch: return "ComWMismatch";
  }
  return "?";
}

Result<Tag, Error> commit(const Bytes& message, const Bytes& randomness,
                          const CommitParams& params) {
  if (randomness.size() != params.randomness_bytes())
    return Error{ErrorCode::BadRandomnessLength};
  Bytes buf;
  put_field(buf, message);
  put_field(buf, randomness);
  return Tag{sha256_truncated(buf, params.digest_bytes)};
}

bool verify_token(const Tag& tag, const TokenShare& token, const CommitParams& params) {
  auto recomputed = commit(token.share, token.randomness, params);
  return recomputed.ok() && recomputed.value() == tag;
}

Bytes field_to_bytes(const Field& v, std::size_t width) {
  Bytes out(width, 0);
  Field x = v;
  for (std::size_t i = 0; i < width && x != 0; ++i) {
    out[width - 1 - i] = static_cast<std::uint8_t>(x & 0xff);
    x >>= 8;
  }
  return out;
}

Field bytes_to_field(const Bytes& b) {
  Field v = 0;
  for (auto byte : b) {
    v <<= 8;
    v += byte;
  }
  return v;
}

static Field mod_inverse(const Field& a, const Field& p) {
  return boost::multiprecision::powm(((a % p) + p) % p, p - 2, p);
}

Result<DealerOutput, Error> deal_output(const Bytes& secret, int n, bool with_equiv_extras,
                                        const DealerConfig& config) {
  if (n < 2) return Error{ErrorCode::TooFewParties};
  if (secret.empty()) return Error{ErrorCode::MissingToken};

  Rng rng(config.seed);
  DealerOutput out;
  out.n = n;
  out.secret = secret;
  out.pub.params = config.commit;
  out.pub.prime = config.prime;

  // n-of-n: n-1 uniform strings, last share is the masked secret.
  std::vector<Bytes> shares(n);
  Bytes running = secret;
  for (int i = 0; i < n - 1; ++i) {
    shares[i] = rng.bytes(secret.size());
    for (std::size_t k = 0; k < secret.size(); ++k) running[k] ^= shares[i][k];
  }
  shares[n - 1] = running;

  for (int i = 0; i < n; ++i) {
    TokenShare token{shares[i], rng.bytes(config.commit.randomness_bytes())};
    auto tag = commit(token.share, token.randomness, config.commit);
    if (!tag.ok()) return tag.error();
    out.tokens.push_back(std::move(token));
    out.pub.tags.push_back(tag.value());
  }

  if (with_equiv_extras) {
    out.has_equiv_extras = true;
    const std::size_t k_bytes = config.commit.randomness_bytes();
    out.w = rng.bytes(k_bytes);

    // Degree-1 polynomial through (0, w); evaluation points are 1..n-2.
    Field w_field = bytes_to_field(out.w) % config.prime;
    Field slope = bytes_to_field(rng.bytes((k_bytes * 2) + 8)) % config.prime;
    const std::size_t field_width =
        static_cast<std::size_t>((boost::multiprecision::msb(config.prime) + 8) / 8);

    for (int i = 1; i <= n - 2; ++i) {
      ThresholdShare share;
      share.index = i;
      share.value = (w_field + slope * i) % config.prime;
      share.decommitment = rng.bytes(k_bytes);
      auto c = commit(field_to_bytes(share.value, field_width), share.decommitment,
                      config.commit);
      if (!c.ok()) return c.error();
      out.pub.share_commitments.push_back(c.value());
      out.threshold_shares.push_back(std::move(share));
    }

    out.pub.com_w_decommitment = rng.bytes(k_bytes);
    auto cw = commit(out.w, out.pub.com_w_decommitment, config.commit);
    if (!cw.ok()) return cw.error();
    out.pub.com_w = cw.value();
  }
  return out;
}

Result<Bytes, Error> reconstruct_output(const std::vector<TokenShare>& tokens,
                                        const std::vector<Tag>& tags,
                                        const CommitParams& params) {
  if (tokens.size() != tags.size() || tokens.empty())
    return Error{ErrorCode::MissingToken};
  for (std::size_t i = 0; i < tokens.size(); ++i)
    if (!verify_token(tags[i], tokens[i], params))
      return Error{ErrorCode::InvalidToken, static_cast<int>(i + 1)};

  Bytes secret(tokens[0].share.size(), 0);
  for (const auto& t : tokens) {
    if (t.share.size() != secret.size()) return Error{ErrorCode::InvalidToken};
    for (std::size_t k = 0; k < secret.size(); ++k) secret[k] ^= t.share[k];
  }
  return secret;
}

Result<Bytes, Error> reconstruct_w(const ThresholdShare& a, const ThresholdShare& b,
                                   const std::vector<Tag>& share_commitments,
                                   const Tag& com_w, const Bytes& com_w_decommitment,
                                   const Field& prime, const CommitParams& params) {
  if (a.index == b.index) return Error{ErrorCode::DuplicateIndex};
  const std::size_t field_width =
      static_cast<std::size_t>((boost::multiprecision::msb(prime) + 8) / 8);
  for (const auto* s : {&a, &b}) {
    if (s->index < 1 || s->index > static_cast<int>(share_commitments.size()))
      return Error{ErrorCode::InvalidShare, s->index};
    auto c = commit(field_to_bytes(s->value, field_width), s->decommitment, params);
    if (!c.ok() || !(c.value() == share_commitments[s->index - 1]))
      return Error{ErrorCode::InvalidShare, s->index};
  }

  // Lagrange at 0: w = (j*s_i - i*s_j) / (j - i) mod p.
  Field i = a.index, j = b.index;
  Field num = ((j * a.value - i * b.value) % prime + prime) % prime;
  Field den = ((j - i) % prime + prime) % prime;
  Field w_field = num * mod_inverse(den, prime) % prime;

  Bytes w = field_to_bytes(w_field, params.randomness_bytes());
  // Values outside the k-bit embedding cannot come from a consistent dealer.
  if (bytes_to_field(w) != w_field) return Error{ErrorCode::ComWMismatch};
  auto check = commit(w, com_w_decommitment, params);
  if (!check.ok() || !(check.value() == com_w)) return Error{ErrorCode::ComWMismatch};
  return w;
}

}  // namespace fairrecon::pubnmss
