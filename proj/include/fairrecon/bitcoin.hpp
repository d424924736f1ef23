#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fairrecon/bytes.hpp"
#include "fairrecon/predicate.hpp"
#include "fairrecon/result.hpp"
#include "fairrecon/settlement.hpp"

namespace fairrecon::bitcoin {

using settlement::CoinAmount;
using settlement::PartyId;
using settlement::Predicate;
using settlement::PredicateContext;
using settlement::Witness;

/// Ideal signature stand-in: keygen registers the key pair, signing is a
/// keyed digest, verification consults the registry. Only the secret-key
/// holder can produce an accepted signature; forgery is assumed impossible
/// rather than attacked.
class SigContext {
 public:
  struct Keypair {
    Bytes sk;
    Bytes pk;
  };

  Keypair keygen(Rng& rng);
  Bytes sign(const Bytes& sk, const Bytes& message) const;
  bool verify(const Bytes& pk, const Bytes& message, const Bytes& signature) const;

 private:
  std::map<Bytes, Bytes> sk_by_pk_;
};

/// Output-script combinator tree. Evaluation is structural over the input
/// witness and the simplified form of the spending transaction; CheckSig
/// verifies a signature over that simplified form.
struct Script {
  enum class Op { CheckSig, HashLock, UserPredicate, And, Or };

  Op op = Op::And;
  Bytes data;      // CheckSig: public key; HashLock: digest
  Predicate pred;  // UserPredicate
  std::vector<Script> children;

  static Script check_sig(Bytes pk);
  static Script hash_lock(Bytes digest);
  static Script user_predicate(Predicate pred);
  static Script all_of(std::vector<Script> children);
  static Script any_of(std::vector<Script> children);

  Bytes serialize() const;
  std::string to_string() const;
  bool operator==(const Script& other) const { return serialize() == other.serialize(); }
};

/// What a spender supplies: signatures (tried against every CheckSig), a
/// predicate witness, and an optional hash preimage.
struct InputWitness {
  std::vector<Bytes> signatures;
  Witness pred_witness;
  std::optional<Bytes> preimage;

  Bytes serialize() const;
};

bool eval_script(const Script& script, const InputWitness& input, const Bytes& spending_simp,
                 const SigContext& sigs, const PredicateContext& preds);

struct Txn {
  Bytes prev_id;
  CoinAmount amount = 0;
  InputWitness input;
  Script output_script;
  int locktime = 0;

  /// Digest over (prev_id, amount, input, output script, locktime).
  Bytes id() const;
  /// Simplified form: (prev_id, amount, output script, locktime). This is
  /// the payload counterparty signatures cover.
  Bytes simp() const;
  std::string hex() const;
};

enum class ChainError { Locktime, ScriptFailed, AlreadySpent, UnknownOutput, BadAmount };
const char* to_string(ChainError err);

/// Single-writer UTXO chain: an output is spent at most once; a transaction
/// with locktime l confirms earliest in round l + 1.
class MiniChain {
 public:
  MiniChain(const SigContext* sigs, const PredicateContext* preds)
      : sigs_(sigs), preds_(preds) {}

  /// Mints a fresh output guarded by CheckSig(pk).
  Bytes fund(const Bytes& pk, CoinAmount amount);

  Result<Bytes, ChainError> submit(const Txn& txn, int round);

  bool is_spent(const Bytes& output_id) const;
  std::optional<CoinAmount> unspent_amount(const Bytes& output_id) const;
  const Script* output_script(const Bytes& output_id) const;
  /// Identifies which key's CheckSig guards a plain pay-to-key output.
  std::optional<Bytes> sole_key(const Bytes& output_id) const;

 private:
  struct Output {
    Script script;
    CoinAmount amount;
    bool spent = false;
  };
  const SigContext* sigs_;
  const PredicateContext* preds_;
  std::map<Bytes, Output> outputs_;
  std::map<Bytes, Txn> confirmed_;
};

struct CrgParams {
  CoinAmount amount = 0;
  Predicate claim_predicate;
  Predicate refund_predicate;
  int tau_claim = 0;
  int tau_refund = 0;
};

struct HandshakeMessage {
  int step = 0;
  char from = 's';  // 's' or 'r'
  std::string label;
  Bytes payload;
};

enum class HandshakeError { SignatureInvalid, PredicateMismatch, Aborted };
const char* to_string(HandshakeError err);

/// Fault injection for the deposit handshake negative paths.
struct HandshakeFaults {
  bool sender_bad_sig = false;     // garbage sig_s at step 8, caught at step 9
  bool receiver_bad_sig = false;   // garbage sig_r at step 12, caught at step 13
  int abort_after_step = 0;        // 0 = none; party owning the next step stops
  std::optional<Predicate> receiver_refund_predicate;  // mismatch injection
};

struct HandshakeResult {
  Txn txn_crg;
  Bytes txn_crg_id;
  SigContext::Keypair sender_keys;
  SigContext::Keypair receiver_keys;
  Bytes lambda;    // receiver-side secret preimage
  Bytes h_lambda;  // public hash of lambda
  Bytes sig_s_give;    // sender's signature over simp(txn_give)
  Bytes sig_r_refund;  // receiver's signature over simp(txn_refund)
  Bytes simp_give;
  Bytes simp_refund;
  Txn txn_give_template;
  Txn txn_refund_template;
  CrgParams params;
  std::vector<HandshakeMessage> messages;
};

/// The 13-step deposit handshake: key and lambda setup, txn_CRG
/// construction, exchange of pre-signed give/refund forms with verification,
/// then broadcast. On fault paths no coins move.
Result<HandshakeResult, HandshakeError> crg_deposit_handshake(
    MiniChain& chain, SigContext& sigs, Rng& rng, const Bytes& funding_output,
    const CrgParams& params, const Predicate& expected_refund_predicate,
    const HandshakeFaults& faults = {});

Result<Txn, ChainError> redeem_claim(MiniChain& chain, const HandshakeResult& hs,
                                     const SigContext& sigs, const Witness& claim_witness,
                                     int round);
Result<Txn, ChainError> redeem_refund(MiniChain& chain, const HandshakeResult& hs,
                                      const SigContext& sigs, const Witness& refund_witness,
                                      int round);
Result<Txn, ChainError> redeem_give(MiniChain& chain, const HandshakeResult& hs,
                                    const SigContext& sigs, int round);

/// Outcome of one behavior pair in either world.
enum class CrgResolution { Claimed, Refunded, Given, NoDeposit, Stuck };
const char* to_string(CrgResolution r);

struct EquivalenceReport {
  int behaviors = 0;
  int mismatches = 0;
  std::vector<std::string> mismatch_descriptions;
  bool pass() const { return mismatches == 0 && behaviors >= 30; }
};

/// Drives the realization and the ideal claim-refund-or-give ledger through
/// the enumerated behavior space (handshake aborts, witness withholding,
/// early/late/invalid redeems) and compares final coin allocations.
EquivalenceReport equivalence_test(const pubnmss::DealerOutput& dealer,
                                   const CrgParams& params, std::uint64_t seed);

/// Script-mutation negative checks: deleting any one of the three CheckSig
/// guards admits a concrete stealing spend that the intact script rejects.
enum class ScriptMutation { DropReceiverSig, DropSenderSigRefund, DropSenderSigGive };
bool mutation_admits_steal(ScriptMutation mutation, const pubnmss::DealerOutput& dealer,
                           std::uint64_t seed);

}  // namespace fairrecon::bitcoin
