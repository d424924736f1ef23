#include <doctest.h>

#include <array>
#include <map>

#include "fairrecon/pubnmss.hpp"

using namespace fairrecon;
using namespace fairrecon::pubnmss;

TEST_CASE("commit is deterministic and salt-sensitive") {
  Rng rng(7);
  Bytes m = rng.bytes(9);
  Bytes r = rng.bytes(16);
  auto a = commit(m, r);
  auto b = commit(m, r);
  REQUIRE(a.ok());
  CHECK(a.value() == b.value());

  int agreements = 0;
  for (int i = 0; i < 1000; ++i) {
    Bytes r2 = rng.bytes(16);
    if (r2 == r) continue;
    if (commit(m, r2).value() == a.value()) ++agreements;
  }
  CHECK(agreements == 0);
}

TEST_CASE("commit rejects wrong randomness length") {
  auto res = commit({1, 2, 3}, Bytes(5, 0));
  REQUIRE_FALSE(res.ok());
  CHECK(res.error().code == ErrorCode::BadRandomnessLength);
}

TEST_CASE("verify_token accepts dealer pairs and rejects bit flips") {
  Rng rng(11);
  TokenShare token{rng.bytes(4), rng.bytes(16)};
  Tag tag = commit(token.share, token.randomness).value();
  CHECK(verify_token(tag, token));

  for (std::size_t byte = 0; byte < token.share.size(); ++byte) {
    for (int bit = 0; bit < 8; ++bit) {
      TokenShare flipped = token;
      flipped.share[byte] ^= static_cast<std::uint8_t>(1 << bit);
      CHECK_FALSE(verify_token(tag, flipped));
    }
  }
  TokenShare bad_salt = token;
  bad_salt.randomness[0] ^= 1;
  CHECK_FALSE(verify_token(tag, bad_salt));
}

TEST_CASE("toy 16-bit hash: exhaustive forgery scan finds only collisions") {
  CommitParams toy{.randomness_bits = 8, .digest_bytes = 2};
  TokenShare token{{0x5a}, {0xc3}};
  Tag tag = commit(token.share, token.randomness, toy).value();

  int accepted = 0;
  int collisions = 0;
  for (int sh = 0; sh < 256; ++sh) {
    for (int r = 0; r < 256; ++r) {
      TokenShare candidate{{static_cast<std::uint8_t>(sh)},
                           {static_cast<std::uint8_t>(r)}};
      if (!verify_token(tag, candidate, toy)) continue;
      ++accepted;
      if (!(candidate == token)) ++collisions;
    }
  }
  CHECK(accepted >= 1);  // the genuine pair
  MESSAGE("toy-hash collisions over 2^16 candidates: ", collisions);
  CHECK(accepted == collisions + 1);
}

TEST_CASE("deal and reconstruct round-trip") {
  Rng rng(3);
  Bytes secret = rng.bytes(16);
  auto dealt = deal_output(secret, 5, false, {.seed = 42});
  REQUIRE(dealt.ok());
  const auto& out = dealt.value();
  REQUIRE(out.tokens.size() == 5);
  REQUIRE(out.pub.tags.size() == 5);

  auto rec = reconstruct_output(out.tokens, out.pub.tags);
  REQUIRE(rec.ok());
  CHECK(rec.value() == secret);

  auto forged = out.tokens;
  forged[2].share[0] ^= 1;
  auto bad = reconstruct_output(forged, out.pub.tags);
  REQUIRE_FALSE(bad.ok());
  CHECK(bad.error().code == ErrorCode::InvalidToken);
  CHECK(bad.error().index == 3);

  CHECK_FALSE(deal_output(secret, 1, false, {}).ok());
  CHECK_FALSE(deal_output({}, 3, false, {}).ok());
}

// Every strict subset of tokens must be consistent with every possible
// secret, with a uniform completion count. Exhaustive for 8-bit secrets.
TEST_CASE("n-of-n privacy at toy parameters") {
  for (int n = 2; n <= 4; ++n) {
    CAPTURE(n);
    auto dealt = deal_output({0xb7}, n, false, {.commit = {.randomness_bits = 8}, .seed = 5});
    REQUIRE(dealt.ok());
    const auto& shares = dealt.value().tokens;

    for (std::uint32_t subset = 0; subset + 1 < (1u << n); ++subset) {
      std::uint8_t known_xor = 0;
      int missing = 0;
      for (int i = 0; i < n; ++i) {
        if (subset & (1u << i))
          known_xor ^= shares[i].share[0];
        else
          ++missing;
      }
      // Count completions reaching each candidate secret.
      std::array<std::uint64_t, 256> counts{};
      std::uint64_t total = 1ull << (8 * missing);
      for (std::uint64_t assign = 0; assign < total; ++assign) {
        std::uint8_t x = known_xor;
        for (int b = 0; b < missing; ++b)
          x ^= static_cast<std::uint8_t>((assign >> (8 * b)) & 0xff);
        ++counts[x];
      }
      for (int s = 0; s < 256; ++s) REQUIRE(counts[s] == total / 256);
    }
  }
}

TEST_CASE("threshold-2 sharing: dealing, pairs, and errors") {
  Rng rng(9);
  auto dealt = deal_output(rng.bytes(16), 5, true, {.seed = 77});
  REQUIRE(dealt.ok());
  const auto& out = dealt.value();
  REQUIRE(out.threshold_shares.size() == 3);  // n-2 shares at n=5
  REQUIRE(out.pub.share_commitments.size() == 3);

  auto w13 = reconstruct_w(out.threshold_shares[0], out.threshold_shares[2],
                           out.pub.share_commitments, out.pub.com_w,
                           out.pub.com_w_decommitment, out.pub.prime);
  REQUIRE(w13.ok());
  CHECK(w13.value() == out.w);

  auto dup = reconstruct_w(out.threshold_shares[1], out.threshold_shares[1],
                           out.pub.share_commitments, out.pub.com_w,
                           out.pub.com_w_decommitment, out.pub.prime);
  REQUIRE_FALSE(dup.ok());
  CHECK(dup.error().code == ErrorCode::DuplicateIndex);

  auto tampered = out.threshold_shares[0];
  tampered.value += 1;
  auto bad = reconstruct_w(tampered, out.threshold_shares[1], out.pub.share_commitments,
                           out.pub.com_w, out.pub.com_w_decommitment, out.pub.prime);
  REQUIRE_FALSE(bad.ok());
  CHECK(bad.error().code == ErrorCode::InvalidShare);

  Tag wrong_com = out.pub.com_w;
  wrong_com.digest[0] ^= 1;
  auto mism = reconstruct_w(out.threshold_shares[0], out.threshold_shares[1],
                            out.pub.share_commitments, wrong_com,
                            out.pub.com_w_decommitment, out.pub.prime);
  REQUIRE_FALSE(mism.ok());
  CHECK(mism.error().code == ErrorCode::ComWMismatch);
}

TEST_CASE("threshold-2: all pairs at n=6 agree") {
  auto dealt = deal_output(Bytes(16, 0x11), 6, true, {.seed = 123});
  REQUIRE(dealt.ok());
  const auto& out = dealt.value();
  REQUIRE(out.threshold_shares.size() == 4);
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) {
      auto w = reconstruct_w(out.threshold_shares[i], out.threshold_shares[j],
                             out.pub.share_commitments, out.pub.com_w,
                             out.pub.com_w_decommitment, out.pub.prime);
      REQUIRE(w.ok());
      CHECK(w.value() == out.w);
    }
}

// With a single share, every field value is still a possible witness: for
// each candidate there is exactly one degree-1 polynomial through it and the
// held share. Exhaustive over the 17-bit toy field.
TEST_CASE("threshold-2 privacy: one share leaves all candidates open") {
  DealerConfig cfg;
  cfg.commit.randomness_bits = 16;
  cfg.prime = toy_field_prime();
  cfg.seed = 31;
  auto dealt = deal_output(Bytes(4, 0x22), 6, true, cfg);
  REQUIRE(dealt.ok());
  const auto& share = dealt.value().threshold_shares[1];  // index 2

  const Field p = toy_field_prime();
  const Field inv_index = boost::multiprecision::powm(Field(share.index), p - 2, p);
  std::uint64_t consistent = 0;
  for (Field w = 0; w < p; ++w) {
    // slope solving share.value = w + slope * index
    Field slope = (((share.value - w) % p + p) % p) * inv_index % p;
    if ((w + slope * share.index) % p == share.value) ++consistent;
  }
  CHECK(consistent == static_cast<std::uint64_t>(p));
}

TEST_CASE("tags carry all public verification state") {
  auto dealt = deal_output(Bytes(8, 0x3c), 4, true, {.seed = 8});
  REQUIRE(dealt.ok());
  const auto& out = dealt.value();

  // Rebuild the public state from serialized tag bytes only.
  DealerPublic rebuilt;
  rebuilt.params = out.pub.params;
  rebuilt.prime = out.pub.prime;
  for (const auto& tag : out.pub.tags) rebuilt.tags.push_back(Tag{from_hex(tag.hex())});
  for (const auto& c : out.pub.share_commitments)
    rebuilt.share_commitments.push_back(Tag{from_hex(c.hex())});
  rebuilt.com_w = Tag{from_hex(out.pub.com_w.hex())};
  rebuilt.com_w_decommitment = out.pub.com_w_decommitment;

  for (int i = 0; i < 4; ++i) {
    CHECK(verify_token(rebuilt.tags[i], out.tokens[i]));
    TokenShare forged = out.tokens[i];
    forged.randomness[3] ^= 4;
    CHECK_FALSE(verify_token(rebuilt.tags[i], forged));
  }
}
