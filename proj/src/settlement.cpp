#include "fairrecon/settlement.hpp"

#include <algorithm>
#include <cassert>
#include <climits>

namespace fairrecon::settlement {

const char* to_string(EventKind kind) {
  switch (kind) {
    case EventKind::Deposit: return "deposit";
    case EventKind::Claim: return "claim";
    case EventKind::Refund: return "refund";
    case EventKind::Give: return "give";
    case EventKind::AutoRefund: return "autorefund";
  }
  return "?";
}

const char* to_string(LedgerError err) {
  switch (err) {
    case LedgerError::InsufficientFunds: return "InsufficientFunds";
    case LedgerError::DuplicateSsid: return "DuplicateSsid";
    case LedgerError::DeadlineInPast: return "DeadlineInPast";
    case LedgerError::NotReceiver: return "NotReceiver";
    case LedgerError::PredicateFailed: return "PredicateFailed";
    case LedgerError::DeadlinePassed: return "DeadlinePassed";
    case LedgerError::NotOpen: return "NotOpen";
    case LedgerError::TooEarly: return "TooEarly";
    case LedgerError::NotCrg: return "NotCrg";
    case LedgerError::UnknownParty: return "UnknownParty";
    case LedgerError::UnknownSsid: return "UnknownSsid";
    case LedgerError::NotSender: return "NotSender";
    case LedgerError::BadRound: return "BadRound";
  }
  return "?";
}

Ledger::Ledger(int n, std::vector<CoinAmount> initial_wallets, const PredicateContext* ctx)
    : n_(n),
      wallets_(std::move(initial_wallets)),
      ctx_(ctx),
      token_pub_round_(n, INT_MAX),
      share_pub_round_(n, INT_MAX),
      w_pub_round_(INT_MAX) {
  assert(static_cast<int>(wallets_.size()) == n);
  initial_ = wallets_;
  for (auto w : wallets_) supply_ += w;
}

void Ledger::begin_round(int round) {
  assert(round >= round_);
  round_ = round;
}

DepositRecord* Ledger::find_mut(int ssid) {
  for (auto& rec : records_)
    if (rec.ssid == ssid) return &rec;
  return nullptr;
}

const DepositRecord* Ledger::find(int ssid) const {
  for (const auto& rec : records_)
    if (rec.ssid == ssid) return &rec;
  return nullptr;
}

void Ledger::publish(const WitnessRef& ref, int round) {
  for (int i = 1; i <= n_; ++i)
    if (ref.tokens & bit_of(i)) token_pub_round_[i - 1] = std::min(token_pub_round_[i - 1], round);
  for (int i = 1; i <= n_; ++i)
    if (ref.shares & bit_of(i)) share_pub_round_[i - 1] = std::min(share_pub_round_[i - 1], round);
  if (ref.w) w_pub_round_ = std::min(w_pub_round_, round);
}

void Ledger::append_event(EventKind kind, int ssid, PartyId actor, CoinAmount amount,
                          const WitnessRef& ref, std::optional<Witness> witness) {
  LedgerEvent ev;
  ev.seq = static_cast<int>(events_.size());
  ev.round = round_;
  ev.kind = kind;
  ev.ssid = ssid;
  ev.actor = actor;
  ev.amount = amount;
  ev.witness_ref = ref;
  ev.witness = std::move(witness);
  events_.push_back(std::move(ev));
}

Result<int, LedgerError> Ledger::open_deposit(
    int ssid, PartyId sender, PartyId receiver, CoinAmount amount, Predicate claim_predicate,
    int claim_deadline, std::optional<std::pair<Predicate, int>> refund_terms) {
  if (sender < 1 || sender > n_ || receiver < 1 || receiver > n_)
    return LedgerError::UnknownParty;
  for (const auto& rec : records_)
    if (rec.ssid == ssid && rec.sender == sender && rec.receiver == receiver)
      return LedgerError::DuplicateSsid;
  if (round_ > claim_deadline) return LedgerError::DeadlineInPast;
  if (refund_terms && refund_terms->second <= claim_deadline)
    return LedgerError::DeadlineInPast;
  if (wallets_[sender - 1] < amount) return LedgerError::InsufficientFunds;

  wallets_[sender - 1] -= amount;
  DepositRecord rec;
  rec.ssid = ssid;
  rec.sender = sender;
  rec.receiver = receiver;
  rec.amount = amount;
  rec.claim_predicate = std::move(claim_predicate);
  rec.claim_deadline = claim_deadline;
  if (refund_terms) {
    rec.refund_predicate = std::move(refund_terms->first);
    rec.refund_deadline = refund_terms->second;
  }
  records_.push_back(std::move(rec));
  append_event(EventKind::Deposit, ssid, sender, amount, WitnessRef{}, std::nullopt);
  return ssid;
}

Result<CoinAmount, LedgerError> Ledger::apply_claim(DepositRecord& rec, PartyId claimer,
                                                    const WitnessRef& ref, int round,
                                                    std::optional<Witness> full) {
  rec.status = DepositStatus::Claimed;
  wallets_[rec.receiver - 1] += rec.amount;
  publish(ref, round);
  append_event(EventKind::Claim, rec.ssid, claimer, rec.amount, ref, std::move(full));
  return rec.amount;
}

Result<CoinAmount, LedgerError> Ledger::claim(int ssid, PartyId claimer, const Witness& witness,
                                              int round) {
  auto* rec = find_mut(ssid);
  if (!rec) return LedgerError::UnknownSsid;
  if (rec->status != DepositStatus::Open) return LedgerError::NotOpen;
  if (claimer != rec->receiver) return LedgerError::NotReceiver;
  if (round != round_) return LedgerError::BadRound;
  if (round > rec->claim_deadline) return LedgerError::DeadlinePassed;
  if (!ctx_->eval(rec->claim_predicate, witness)) return LedgerError::PredicateFailed;
  return apply_claim(*rec, claimer, witness.ref(), round, witness);
}

Result<CoinAmount, LedgerError> Ledger::claim_ref(int ssid, PartyId claimer,
                                                  const WitnessRef& witness_ref, int round) {
  auto* rec = find_mut(ssid);
  if (!rec) return LedgerError::UnknownSsid;
  if (rec->status != DepositStatus::Open) return LedgerError::NotOpen;
  if (claimer != rec->receiver) return LedgerError::NotReceiver;
  if (round != round_) return LedgerError::BadRound;
  if (round > rec->claim_deadline) return LedgerError::DeadlinePassed;
  if (!witness_ref.covers(rec->claim_predicate.required()))
    return LedgerError::PredicateFailed;
  return apply_claim(*rec, claimer, witness_ref, round, std::nullopt);
}

Result<CoinAmount, LedgerError> Ledger::apply_refund(DepositRecord& rec, PartyId sender,
                                                     const WitnessRef& ref, int round,
                                                     std::optional<Witness> full,
                                                     bool verified) {
  if (rec.status != DepositStatus::Open) return LedgerError::NotOpen;
  if (rec.is_crg()) {
    if (sender != rec.sender) return LedgerError::NotSender;
    if (round <= rec.claim_deadline) return LedgerError::TooEarly;
    if (round > *rec.refund_deadline) return LedgerError::DeadlinePassed;
    if (!verified) return LedgerError::PredicateFailed;
  } else {
    // Timeout path: valid once the claim window has closed.
    if (round <= rec.claim_deadline) return LedgerError::TooEarly;
  }
  rec.status = DepositStatus::Refunded;
  wallets_[rec.sender - 1] += rec.amount;
  publish(ref, round);
  append_event(EventKind::Refund, rec.ssid, sender, rec.amount, ref, std::move(full));
  return rec.amount;
}

Result<CoinAmount, LedgerError> Ledger::refund(int ssid, PartyId sender,
                                               const std::optional<Witness>& witness,
                                               int round) {
  auto* rec = find_mut(ssid);
  if (!rec) return LedgerError::UnknownSsid;
  if (round != round_) return LedgerError::BadRound;
  bool verified = true;
  WitnessRef ref;
  if (rec->is_crg()) {
    verified = witness && ctx_->eval(*rec->refund_predicate, *witness);
    if (witness) ref = witness->ref();
  }
  return apply_refund(*rec, sender, ref, round, witness, verified);
}

Result<CoinAmount, LedgerError> Ledger::refund_ref(int ssid, PartyId sender,
                                                   const WitnessRef& witness_ref, int round) {
  auto* rec = find_mut(ssid);
  if (!rec) return LedgerError::UnknownSsid;
  if (round != round_) return LedgerError::BadRound;
  bool verified = true;
  if (rec->is_crg()) verified = witness_ref.covers(rec->refund_predicate->required());
  return apply_refund(*rec, sender, witness_ref, round, std::nullopt, verified);
}

Result<CoinAmount, LedgerError> Ledger::give(int ssid, int round) {
  auto* rec = find_mut(ssid);
  if (!rec) return LedgerError::UnknownSsid;
  if (!rec->is_crg()) return LedgerError::NotCrg;
  if (rec->status != DepositStatus::Open) return LedgerError::NotOpen;
  if (round != round_) return LedgerError::BadRound;
  if (round <= *rec->refund_deadline) return LedgerError::TooEarly;
  rec->status = DepositStatus::Given;
  wallets_[rec->receiver - 1] += rec->amount;
  append_event(EventKind::Give, rec->ssid, rec->receiver, rec->amount, WitnessRef{},
               std::nullopt);
  return rec->amount;
}

std::vector<LedgerEvent> Ledger::settle_expired(int round) {
  assert(round == round_);
  std::vector<LedgerEvent> settled;
  if (last_settled_round_ == round) return settled;
  last_settled_round_ = round;
  for (auto& rec : records_) {
    if (rec.status != DepositStatus::Open) continue;
    if (!rec.is_crg() && rec.claim_deadline < round) {
      rec.status = DepositStatus::Refunded;
      wallets_[rec.sender - 1] += rec.amount;
      append_event(EventKind::AutoRefund, rec.ssid, rec.sender, rec.amount, WitnessRef{},
                   std::nullopt);
      settled.push_back(events_.back());
    } else if (rec.is_crg() && *rec.refund_deadline < round) {
      rec.status = DepositStatus::Given;
      wallets_[rec.receiver - 1] += rec.amount;
      append_event(EventKind::Give, rec.ssid, rec.receiver, rec.amount, WitnessRef{},
                   std::nullopt);
      settled.push_back(events_.back());
    }
  }
  return settled;
}

Result<std::int64_t, LedgerError> Ledger::net_balance(PartyId party) const {
  if (party < 1 || party > n_) return LedgerError::UnknownParty;
  return static_cast<std::int64_t>(wallets_[party - 1]) -
         static_cast<std::int64_t>(initial_[party - 1]);
}

bool Ledger::all_resolved() const {
  return std::all_of(records_.begin(), records_.end(),
                     [](const DepositRecord& r) { return r.status != DepositStatus::Open; });
}

int Ledger::open_count() const {
  int open = 0;
  for (const auto& rec : records_)
    if (rec.status == DepositStatus::Open) ++open;
  return open;
}

bool Ledger::conservation_holds() const {
  CoinAmount total = 0;
  for (auto w : wallets_) total += w;
  for (const auto& rec : records_)
    if (rec.status == DepositStatus::Open) total += rec.amount;
  return total == supply_;
}

WitnessRef Ledger::public_items_before(int round) const {
  WitnessRef ref;
  for (int i = 1; i <= n_; ++i) {
    if (token_pub_round_[i - 1] < round) ref.tokens |= bit_of(i);
    if (share_pub_round_[i - 1] < round) ref.shares |= bit_of(i);
  }
  ref.w = w_pub_round_ < round;
  return ref;
}

WitnessRef Ledger::public_items_upto(int round) const { return public_items_before(round + 1); }

WitnessRef Ledger::public_items_final() const { return public_items_before(INT_MAX); }

}  // namespace fairrecon::settlement
