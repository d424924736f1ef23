#include <doctest.h>

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fairrecon/bitcoin.hpp"

using namespace fairrecon;
using namespace fairrecon::bitcoin;

namespace {

struct Env {
  pubnmss::DealerOutput dealer;
  settlement::PredicateContext pred_ctx;
  CrgParams params;

  explicit Env(int n = 5)
      : dealer(pubnmss::deal_output(Bytes(16, 0x2e), n, true, {.seed = 404}).expect("deal")),
        pred_ctx(&dealer.pub) {
    // The engine's equalizing step-3 parameterization: claim on the
    // aggregator-and-middle token pair, refund on the middle's share.
    params.amount = 4;
    params.claim_predicate = settlement::Predicate::tokens({n - 1, 1});
    params.refund_predicate = settlement::Predicate::secret_share(1);
    params.tau_claim = 4;
    params.tau_refund = 7;
  }

  Witness claim_witness() const {
    Witness w;
    for (auto p : params.claim_predicate.token_parties) w.tokens[p] = dealer.tokens[p - 1];
    return w;
  }
  Witness refund_witness() const {
    Witness w;
    w.shares[1] = dealer.threshold_shares[0];
    return w;
  }
};

struct Deposit {
  SigContext sigs;
  MiniChain chain;
  Rng rng;
  Bytes funding;

  explicit Deposit(const Env& env, std::uint64_t seed = 7)
      : chain(&sigs, &env.pred_ctx), rng(seed) {
    Rng copy(seed);
    SigContext scratch;
    funding = chain.fund(scratch.keygen(copy).pk, env.params.amount);
  }
};

}  // namespace

TEST_CASE("signature stand-in: only the key holder signs") {
  SigContext sigs;
  Rng rng(1);
  auto alice = sigs.keygen(rng);
  auto bob = sigs.keygen(rng);
  Bytes msg = {1, 2, 3};
  Bytes sig = sigs.sign(alice.sk, msg);
  CHECK(sigs.verify(alice.pk, msg, sig));
  CHECK_FALSE(sigs.verify(bob.pk, msg, sig));
  CHECK_FALSE(sigs.verify(alice.pk, Bytes{1, 2, 4}, sig));
  Bytes tampered = sig;
  tampered[0] ^= 1;
  CHECK_FALSE(sigs.verify(alice.pk, msg, tampered));
}

TEST_CASE("transaction ids and simplified forms") {
  Env env;
  Deposit dep(env);
  Txn txn;
  txn.prev_id = dep.funding;
  txn.amount = 4;
  txn.locktime = 3;
  txn.output_script = Script::check_sig(Bytes(32, 0xaa));

  Bytes simp_before = txn.simp();
  txn.input.signatures.push_back(Bytes(16, 1));
  CHECK(txn.simp() == simp_before);  // input script excluded
  Bytes id_with_input = txn.id();
  txn.input.signatures[0][0] ^= 1;
  CHECK(txn.id() != id_with_input);  // id covers the input script
  CHECK(txn.hex().size() > 0);
}

TEST_CASE("handshake completes and both counter-signatures verify") {
  Env env;
  Deposit dep(env);
  auto hs = crg_deposit_handshake(dep.chain, dep.sigs, dep.rng, dep.funding, env.params,
                                  env.params.refund_predicate)
                .expect("handshake");
  CHECK(dep.chain.is_spent(dep.funding));
  CHECK(dep.chain.unspent_amount(hs.txn_crg_id).value_or(0) == env.params.amount);
  CHECK(dep.sigs.verify(hs.sender_keys.pk, hs.simp_give, hs.sig_s_give));
  CHECK(dep.sigs.verify(hs.receiver_keys.pk, hs.simp_refund, hs.sig_r_refund));
  CHECK(hs.messages.size() == 8);  // steps 1, 3, 5, 7, 8, 11, 12, 13
  CHECK(hs.messages.back().label == "broadcast_txn_crg");
}

TEST_CASE("handshake aborts before broadcast on a bad counter-signature") {
  Env env;
  SUBCASE("receiver returns a bad refund signature") {
    Deposit dep(env);
    HandshakeFaults faults;
    faults.receiver_bad_sig = true;
    auto hs = crg_deposit_handshake(dep.chain, dep.sigs, dep.rng, dep.funding, env.params,
                                    env.params.refund_predicate, faults);
    REQUIRE_FALSE(hs.ok());
    CHECK(hs.error() == HandshakeError::SignatureInvalid);
    CHECK_FALSE(dep.chain.is_spent(dep.funding));  // no coins moved
  }
  SUBCASE("sender returns a bad give signature") {
    Deposit dep(env);
    HandshakeFaults faults;
    faults.sender_bad_sig = true;
    auto hs = crg_deposit_handshake(dep.chain, dep.sigs, dep.rng, dep.funding, env.params,
                                    env.params.refund_predicate, faults);
    REQUIRE_FALSE(hs.ok());
    CHECK(hs.error() == HandshakeError::SignatureInvalid);
    CHECK_FALSE(dep.chain.is_spent(dep.funding));
  }
  SUBCASE("refund predicates must agree") {
    Deposit dep(env);
    HandshakeFaults faults;
    faults.receiver_refund_predicate = settlement::Predicate::tautology();
    auto hs = crg_deposit_handshake(dep.chain, dep.sigs, dep.rng, dep.funding, env.params,
                                    env.params.refund_predicate, faults);
    REQUIRE_FALSE(hs.ok());
    CHECK(hs.error() == HandshakeError::PredicateMismatch);
  }
}

TEST_CASE("redeem paths and their guards") {
  Env env;
  SUBCASE("claim with a valid witness before the deadline") {
    Deposit dep(env);
    auto hs = crg_deposit_handshake(dep.chain, dep.sigs, dep.rng, dep.funding, env.params,
                                    env.params.refund_predicate)
                  .expect("handshake");
    auto claim = redeem_claim(dep.chain, hs, dep.sigs, env.claim_witness(), 2);
    REQUIRE(claim.ok());
    CHECK(dep.chain.is_spent(hs.txn_crg_id));
    CHECK(dep.chain.sole_key(claim.value().id()).value() == hs.receiver_keys.pk);

    auto again = redeem_refund(dep.chain, hs, dep.sigs, env.refund_witness(),
                               env.params.tau_claim + 1);
    REQUIRE_FALSE(again.ok());
    CHECK(again.error() == ChainError::AlreadySpent);
  }
  SUBCASE("refund waits for the claim window") {
    Deposit dep(env);
    auto hs = crg_deposit_handshake(dep.chain, dep.sigs, dep.rng, dep.funding, env.params,
                                    env.params.refund_predicate)
                  .expect("handshake");
    auto early = redeem_refund(dep.chain, hs, dep.sigs, env.refund_witness(),
                               env.params.tau_claim);
    REQUIRE_FALSE(early.ok());
    CHECK(early.error() == ChainError::Locktime);
    auto ok = redeem_refund(dep.chain, hs, dep.sigs, env.refund_witness(),
                            env.params.tau_claim + 1);
    REQUIRE(ok.ok());
    CHECK(dep.chain.sole_key(ok.value().id()).value() == hs.sender_keys.pk);
  }
  SUBCASE("refund needs the refund witness") {
    Deposit dep(env);
    auto hs = crg_deposit_handshake(dep.chain, dep.sigs, dep.rng, dep.funding, env.params,
                                    env.params.refund_predicate)
                  .expect("handshake");
    Witness junk;
    auto res = redeem_refund(dep.chain, hs, dep.sigs, junk, env.params.tau_claim + 1);
    REQUIRE_FALSE(res.ok());
    CHECK(res.error() == ChainError::ScriptFailed);
  }
  SUBCASE("give waits for the refund window and needs the preimage") {
    Deposit dep(env);
    auto hs = crg_deposit_handshake(dep.chain, dep.sigs, dep.rng, dep.funding, env.params,
                                    env.params.refund_predicate)
                  .expect("handshake");
    auto early = redeem_give(dep.chain, hs, dep.sigs, env.params.tau_refund);
    REQUIRE_FALSE(early.ok());
    CHECK(early.error() == ChainError::Locktime);

    // The sender holds sig_r but not lambda; the hash lock blocks it.
    Txn sender_grab = hs.txn_give_template;
    sender_grab.locktime = 0;
    sender_grab.input.signatures = {hs.sig_r_refund,
                                    dep.sigs.sign(hs.sender_keys.sk, sender_grab.simp())};
    auto blocked = dep.chain.submit(sender_grab, 1);
    REQUIRE_FALSE(blocked.ok());
    CHECK(blocked.error() == ChainError::ScriptFailed);

    auto given = redeem_give(dep.chain, hs, dep.sigs, env.params.tau_refund + 1);
    REQUIRE(given.ok());
    CHECK(dep.chain.sole_key(given.value().id()).value() == hs.receiver_keys.pk);
  }
}

TEST_CASE("handshake scripts match the golden fixture") {
  Env env;
  Deposit dep(env, /*seed=*/2024);
  auto hs = crg_deposit_handshake(dep.chain, dep.sigs, dep.rng, dep.funding, env.params,
                                  env.params.refund_predicate)
                .expect("handshake");

  nlohmann::json record;
  record["output_script"] = hs.txn_crg.output_script.to_string();
  record["txn_crg"] = hs.txn_crg.hex();
  auto& msgs = record["messages"] = nlohmann::json::array();
  for (const auto& m : hs.messages)
    msgs.push_back({{"step", m.step},
                    {"from", std::string(1, m.from)},
                    {"label", m.label},
                    {"payload", to_hex(m.payload)}});

  const std::string path = std::string(FAIRRECON_TEST_DATA_DIR) + "/crg_handshake_golden.json";
  std::ifstream in(path);
  if (!in) {
    std::ofstream out(path);
    out << record.dump(2) << "\n";
    FAIL("golden fixture was missing; wrote ", path, " - rerun the test");
  }
  nlohmann::json golden;
  in >> golden;
  CHECK(record == golden);
}

TEST_CASE("equivalence against the ideal claim-refund-or-give ledger") {
  Env env;
  auto report = equivalence_test(env.dealer, env.params, 11);
  for (const auto& d : report.mismatch_descriptions) MESSAGE(d);
  CHECK(report.behaviors >= 30);
  CHECK(report.mismatches == 0);
  CHECK(report.pass());
}

TEST_CASE("deleting any signature guard admits a steal") {
  Env env;
  CHECK(mutation_admits_steal(ScriptMutation::DropReceiverSig, env.dealer, 21));
  CHECK(mutation_admits_steal(ScriptMutation::DropSenderSigRefund, env.dealer, 22));
  CHECK(mutation_admits_steal(ScriptMutation::DropSenderSigGive, env.dealer, 23));
}
