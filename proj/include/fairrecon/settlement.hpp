#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fairrecon/predicate.hpp"
#include "fairrecon/result.hpp"

namespace fairrecon::settlement {

using CoinAmount = std::uint64_t;

enum class DepositStatus { Open, Claimed, Refunded, Given };

/// One conditional transfer. Claim-or-refund records carry only the claim
/// terms; claim-refund-or-give records additionally carry refund terms and
/// fall through to a give once the refund window closes.
struct DepositRecord {
  int ssid = 0;
  PartyId sender = 0;
  PartyId receiver = 0;
  CoinAmount amount = 0;
  Predicate claim_predicate;
  int claim_deadline = 0;
  std::optional<Predicate> refund_predicate;
  std::optional<int> refund_deadline;
  DepositStatus status = DepositStatus::Open;

  bool is_crg() const { return refund_predicate.has_value(); }
};

enum class EventKind { Deposit, Claim, Refund, Give, AutoRefund };
const char* to_string(EventKind kind);

struct LedgerEvent {
  int seq = 0;
  int round = 0;
  EventKind kind = EventKind::Deposit;
  int ssid = 0;
  PartyId actor = 0;
  CoinAmount amount = 0;
  WitnessRef witness_ref;
  std::optional<Witness> witness;  // populated on the verifying API only
};

enum class LedgerError {
  InsufficientFunds,
  DuplicateSsid,
  DeadlineInPast,
  NotReceiver,
  PredicateFailed,
  DeadlinePassed,
  NotOpen,
  TooEarly,
  NotCrg,
  UnknownParty,
  UnknownSsid,
  NotSender,
  BadRound,
};

const char* to_string(LedgerError err);

/// Coin-conserving wallet ledger driven by a global round clock. Witnesses
/// published in round r are usable by honest parties from r+1 and by the
/// adversary from r itself; the ledger records publication rounds and leaves
/// the viewpoint choice to callers.
class Ledger {
 public:
  Ledger(int n, std::vector<CoinAmount> initial_wallets, const PredicateContext* ctx);

  int n() const { return n_; }
  int current_round() const { return round_; }

  /// Advances the clock. Rounds must be visited in increasing order.
  void begin_round(int round);

  /// Creates an Open record and debits the sender. The ssid is caller-chosen
  /// (protocol graphs use their transaction numbering); reuse of an
  /// (ssid, sender, receiver) triple is rejected.
  Result<int, LedgerError> open_deposit(int ssid, PartyId sender, PartyId receiver,
                                        CoinAmount amount, Predicate claim_predicate,
                                        int claim_deadline,
                                        std::optional<std::pair<Predicate, int>> refund_terms);

  /// Claim with a full witness: every demanded item is verified against the
  /// public commitments before the record resolves.
  Result<CoinAmount, LedgerError> claim(int ssid, PartyId claimer, const Witness& witness,
                                        int round);

  /// Claim with a pre-verified witness reference. Callers must pass items
  /// drawn from the dealer output (the simulator does); forged-witness paths
  /// go through the verifying overload.
  Result<CoinAmount, LedgerError> claim_ref(int ssid, PartyId claimer,
                                            const WitnessRef& witness_ref, int round);

  /// Refund. For a plain claim-or-refund record this is the timeout path and
  /// is valid exactly at claim_deadline + 1 (settle_expired also performs
  /// it). For claim-refund-or-give records the sender must act inside
  /// (claim_deadline, refund_deadline] and satisfy the refund predicate.
  Result<CoinAmount, LedgerError> refund(int ssid, PartyId sender,
                                         const std::optional<Witness>& witness, int round);

  Result<CoinAmount, LedgerError> refund_ref(int ssid, PartyId sender,
                                             const WitnessRef& witness_ref, int round);

  /// Give: a claim-refund-or-give record neither claimed nor refunded pays
  /// the receiver at refund_deadline + 1 with no witness.
  Result<CoinAmount, LedgerError> give(int ssid, int round);

  /// Resolves everything past its deadline: auto-refunds expired
  /// claim-or-refund records, gives expired claim-refund-or-give records.
  /// Idempotent within a round.
  std::vector<LedgerEvent> settle_expired(int round);

  Result<std::int64_t, LedgerError> net_balance(PartyId party) const;

  const DepositRecord* find(int ssid) const;
  const std::vector<LedgerEvent>& events() const { return events_; }
  const std::vector<CoinAmount>& wallets() const { return wallets_; }

  bool all_resolved() const;
  /// Sum of wallets plus open deposit amounts equals the initial supply.
  bool conservation_holds() const;

  WitnessRef public_items_before(int round) const;
  WitnessRef public_items_upto(int round) const;
  WitnessRef public_items_final() const;
  int open_count() const;

 private:
  DepositRecord* find_mut(int ssid);
  void publish(const WitnessRef& ref, int round);
  void append_event(EventKind kind, int ssid, PartyId actor, CoinAmount amount,
                    const WitnessRef& ref, std::optional<Witness> witness);
  Result<CoinAmount, LedgerError> apply_claim(DepositRecord& rec, PartyId claimer,
                                              const WitnessRef& ref, int round,
                                              std::optional<Witness> full);
  Result<CoinAmount, LedgerError> apply_refund(DepositRecord& rec, PartyId sender,
                                               const WitnessRef& ref, int round,
                                               std::optional<Witness> full, bool verified);

  int n_;
  int round_ = 0;
  std::vector<CoinAmount> wallets_;
  std::vector<CoinAmount> initial_;
  CoinAmount supply_ = 0;
  const PredicateContext* ctx_;
  std::vector<DepositRecord> records_;
  std::vector<LedgerEvent> events_;
  std::vector<int> token_pub_round_;  // per party, INT_MAX if never
  std::vector<int> share_pub_round_;  // per share index
  int w_pub_round_;
  int last_settled_round_ = -1;
};

}  // namespace fairrecon::settlement
