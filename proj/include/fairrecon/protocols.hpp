#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fairrecon/result.hpp"
#include "fairrecon/settlement.hpp"

namespace fairrecon::protocols {

using settlement::CoinAmount;
using settlement::PartyId;
using settlement::Predicate;

enum class VariantTag {
  Naive2,       // two crossed deposits, broken by design
  BK2,          // Bentov-Kumaresan two-party chain
  BKn,          // Bentov-Kumaresan ladder, 2n rounds
  Ours,         // constant-round aggregator protocol
  OursReduced,  // aggregator protocol with tiered middles, smaller deposit
  OursEquiv,    // aggregator protocol with refund-or-give equalization
  MergedTau34,  // Ours with the last two claim rounds merged; negative fixture
};

struct ProtocolVariant {
  VariantTag tag = VariantTag::Ours;
  int layers = 1;  // l, OursReduced only

  std::string name() const;
  static std::optional<ProtocolVariant> parse(const std::string& name);
};

/// One deposit the protocol instructs a party to make, in paper-transaction
/// order. Rounds are absolute: deposit groups first, then claim rounds.
struct DepositSpec {
  int ssid = 0;
  PartyId sender = 0;
  PartyId receiver = 0;
  CoinAmount amount = 0;
  Predicate claim_predicate;
  std::string claim_label;
  int claim_round = 0;
  std::optional<Predicate> refund_predicate;
  std::string refund_label;
  std::optional<int> refund_round;
  int deposit_group = 0;  // == deposit round
  bool is_aggregator_refundable = false;  // step-3 deposit in OursEquiv
  bool is_equalizer_extra = false;        // witness-w deposit in OursEquiv

  bool is_crg() const { return refund_predicate.has_value(); }
};

struct HonestAction {
  enum class Kind { Deposit, Claim, RefundOneAborted };
  int round = 0;
  PartyId party = 0;
  Kind kind = Kind::Deposit;
  int ssid = 0;  // 0 for RefundOneAborted (applies to the open refundable set)
};

struct DepositGraph {
  ProtocolVariant variant;
  int n = 0;
  CoinAmount q = 0;
  std::vector<DepositSpec> specs;
  int deposit_groups = 0;
  std::map<std::string, int> label_rounds;  // symbolic round label -> absolute
  int horizon = 0;                          // last deadline round

  const DepositSpec* find(int ssid) const;
  PartyId aggregator() const { return n - 1; }

  /// Per-round prescription that resolves every deposit when all parties
  /// follow it (claims at deadline rounds, plus the aggregator's
  /// single-refund rule for OursEquiv).
  std::vector<HonestAction> honest_schedule() const;
};

enum class BuildError { UnsupportedArity };

Result<DepositGraph, BuildError> build(const ProtocolVariant& variant, int n, CoinAmount q);

/// Number of deposit records = broadcasts = functionality invocations.
int call_count(const DepositGraph& graph);

/// Deposit-phase round groups plus claim/refund-deadline round groups.
int round_count(const DepositGraph& graph);

/// Total coins a party must lock during the deposit phase.
Result<CoinAmount, settlement::LedgerError> max_deposit(const DepositGraph& graph,
                                                        PartyId party);

/// Smallest x with (n-2)x > (n-3)(x+1); the middle-party deposit multiplier.
int minimal_refill_factor(int n);

/// Human-readable listing in arrow notation, one deposit per line.
std::string arrow_listing(const DepositGraph& graph);

}  // namespace fairrecon::protocols
