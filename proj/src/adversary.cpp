#include "fairrecon/adversary.hpp"

#include <algorithm>
#include <bit>
#include <cassert>
#include <map>
#include <unordered_set>

#include <nlohmann/json.hpp>

namespace fairrecon::adversary {

using engine::ExecutionOutcome;
using protocols::DepositSpec;
using protocols::VariantTag;
using settlement::bit_of;
using settlement::Ledger;
using settlement::PredicateContext;
using settlement::WitnessRef;

const char* to_string(ActionKind kind) {
  switch (kind) {
    case ActionKind::FollowHonest: return "follow";
    case ActionKind::DepositSkip: return "skip";
    case ActionKind::ClaimNow: return "claim";
    case ActionKind::WithholdClaim: return "withhold";
    case ActionKind::RefundShare: return "refund";
    case ActionKind::ForgoRefund: return "forgo";
    case ActionKind::DeclineCrg: return "decline";
  }
  return "?";
}

static std::optional<ActionKind> action_from_string(const std::string& s) {
  if (s == "follow") return ActionKind::FollowHonest;
  if (s == "skip") return ActionKind::DepositSkip;
  if (s == "claim") return ActionKind::ClaimNow;
  if (s == "withhold") return ActionKind::WithholdClaim;
  if (s == "refund") return ActionKind::RefundShare;
  if (s == "forgo") return ActionKind::ForgoRefund;
  if (s == "decline") return ActionKind::DeclineCrg;
  return std::nullopt;
}

namespace {

// ---------------------------------------------------------------------------
// Simulator core. One round at a time: honest deposits and claims first, then
// adversary decisions, then expired-deposit settlement. All witness handling
// goes through compact item references; the items themselves always originate
// from the dealer output.
// ---------------------------------------------------------------------------

struct SimContext {
  const DepositGraph* graph = nullptr;
  const pubnmss::DealerOutput* dealer = nullptr;
  const PredicateContext* pred_ctx = nullptr;
  std::uint32_t corrupted_mask = 0;
  bool record_witnesses = false;

  std::vector<WitnessRef> claim_need;           // per spec index
  std::vector<WitnessRef> refund_need;          // per spec index
  std::vector<bool> intra;                      // both endpoints corrupted
  std::vector<bool> honest_deposit_after;       // by round: honest deposit later?
  std::uint32_t all_share_bits = 0;
  std::uint32_t honest_token_bits = 0;
  int crg_group = 0;        // deposit group carrying the refundable deposits
  int decline_ssid = 0;     // first refundable deposit with a corrupted receiver
  bool commitment = false;  // equalizing variant: accepted step-3 commits step 4

  // Adversary claim groups: deposits claimed in one round toward one receiver
  // with one witness move together. A group containing an honest-sender
  // deposit or a refundable deposit is a real choice; an all-internal
  // claim-or-refund group follows the honest prescription.
  std::vector<int> claim_group;        // per spec index; -1 if receiver honest
  std::vector<bool> group_branchable;  // per group id

  bool is_corrupted(PartyId p) const { return corrupted_mask & bit_of(p); }
};

SimContext make_context(const DepositGraph& graph, const std::set<PartyId>& corrupted,
                        const pubnmss::DealerOutput& dealer, const PredicateContext* ctx,
                        bool record_witnesses) {
  SimContext sc;
  sc.graph = &graph;
  sc.dealer = &dealer;
  sc.pred_ctx = ctx;
  sc.record_witnesses = record_witnesses;
  for (PartyId p : corrupted) sc.corrupted_mask |= bit_of(p);
  for (const auto& spec : graph.specs) {
    sc.claim_need.push_back(spec.claim_predicate.required());
    sc.refund_need.push_back(spec.refund_predicate ? spec.refund_predicate->required()
                                                   : WitnessRef{});
    sc.intra.push_back(sc.is_corrupted(spec.sender) && sc.is_corrupted(spec.receiver));
  }
  sc.honest_deposit_after.assign(graph.horizon + 2, false);
  for (const auto& spec : graph.specs)
    if (!sc.is_corrupted(spec.sender))
      for (int r = 0; r < spec.deposit_group; ++r) sc.honest_deposit_after[r] = true;
  for (int i = 1; i <= graph.n - 2; ++i) sc.all_share_bits |= bit_of(i);
  for (int i = 1; i <= graph.n; ++i)
    if (!sc.is_corrupted(i)) sc.honest_token_bits |= bit_of(i);
  sc.commitment = graph.variant.tag == VariantTag::OursEquiv;
  for (const auto& spec : graph.specs) {
    if (!spec.is_aggregator_refundable) continue;
    sc.crg_group = spec.deposit_group;
    if (sc.decline_ssid == 0 && sc.is_corrupted(spec.receiver) &&
        !sc.is_corrupted(spec.sender))
      sc.decline_ssid = spec.ssid;
  }

  sc.claim_group.assign(graph.specs.size(), -1);
  std::map<std::tuple<int, PartyId, std::uint32_t, std::uint32_t, bool>, int> group_ids;
  for (std::size_t i = 0; i < graph.specs.size(); ++i) {
    const auto& spec = graph.specs[i];
    if (!sc.is_corrupted(spec.receiver)) continue;
    const auto& need = sc.claim_need[i];
    auto key = std::make_tuple(spec.claim_round, spec.receiver, need.tokens, need.shares,
                               need.w);
    auto [it, inserted] = group_ids.emplace(key, static_cast<int>(sc.group_branchable.size()));
    if (inserted) sc.group_branchable.push_back(false);
    sc.claim_group[i] = it->second;
    if (!sc.intra[i] || spec.is_crg()) sc.group_branchable[it->second] = true;
  }
  return sc;
}

struct DepositQuery {
  const DepositSpec* spec;
  bool intra;
  int round;
};
struct ClaimQuery {
  const DepositSpec* spec;
  bool intra;
  WitnessRef publishes;
  int round;
  int group_id;
  bool branchable;
};
struct RefundQuery {
  const DepositSpec* spec;
  int round;
};

class Policy {
 public:
  virtual ~Policy() = default;
  virtual bool decide_deposit(const DepositQuery& q) = 0;
  virtual bool decide_claim(const ClaimQuery& q) = 0;
  virtual bool decide_refund(const RefundQuery& q) = 0;
  /// Whether a corrupted receiver refuses the CRG deposit handshake.
  virtual bool decide_decline(int /*ssid*/) { return false; }
  virtual void note_round(int) {}
};

settlement::Witness build_witness(const SimContext& sc, const WitnessRef& ref) {
  settlement::Witness w;
  const auto& dealer = *sc.dealer;
  for (int i = 1; i <= sc.graph->n; ++i)
    if (ref.tokens & bit_of(i)) w.tokens[i] = dealer.tokens[i - 1];
  for (const auto& share : dealer.threshold_shares)
    if (ref.shares & bit_of(share.index)) w.shares[share.index] = share;
  if (ref.w) w.w_value = dealer.w;
  return w;
}

struct RunResult {
  ExecutionOutcome outcome;
  std::uint64_t trace_hash = 0;
};

RunResult run_simulation(const SimContext& sc, Policy& policy) {
  const DepositGraph& graph = *sc.graph;
  const int n = graph.n;

  std::vector<settlement::CoinAmount> initial(n, 0);
  for (const auto& spec : graph.specs) initial[spec.sender - 1] += spec.amount;
  Ledger ledger(n, initial, sc.pred_ctx);

  std::uint64_t action_rounds = 0;
  bool conservation_ok = true;
  int opened = 0;
  int aggregator_refunds = 0;
  const PartyId aggregator = graph.aggregator();
  const bool equiv = graph.variant.tag == VariantTag::OursEquiv;
  int aggregator_refund_round = equiv ? graph.label_rounds.at("tau2p") : -1;

  auto do_claim = [&](const DepositSpec& spec, PartyId claimer, const WitnessRef& need,
                      int r) {
    if (sc.record_witnesses) {
      auto res = ledger.claim(spec.ssid, claimer, build_witness(sc, need), r);
      assert(res.ok());
      (void)res;
    } else {
      auto res = ledger.claim_ref(spec.ssid, claimer, need, r);
      assert(res.ok());
      (void)res;
    }
    action_rounds |= 1ull << r;
  };

  bool crg_declined = false;

  for (int r = 1; r <= graph.horizon + 1; ++r) {
    ledger.begin_round(r);
    policy.note_round(r);

    // Deposits scheduled this round. Honest senders withhold for good once
    // any earlier-round deposit is missing.
    if (r <= graph.deposit_groups) {
      bool missing_earlier = false;
      for (std::size_t i = 0; i < graph.specs.size() && !missing_earlier; ++i)
        if (graph.specs[i].deposit_group < r && !ledger.find(graph.specs[i].ssid))
          missing_earlier = true;

      // The refund-or-give deposits are a two-sided handshake: a corrupted
      // receiver may refuse, and the honest sender then places none of this
      // round's deposits. Acceptance commits the receiver to its own deposit
      // in the final round.
      if (r == sc.crg_group && sc.decline_ssid != 0 && !missing_earlier)
        crg_declined = policy.decide_decline(sc.decline_ssid);

      for (std::size_t i = 0; i < graph.specs.size(); ++i) {
        const auto& spec = graph.specs[i];
        if (spec.deposit_group != r) continue;
        bool make;
        if (!sc.is_corrupted(spec.sender))
          make = !missing_earlier && !(crg_declined && r == sc.crg_group);
        else if (sc.commitment && r == graph.deposit_groups && !missing_earlier)
          make = true;  // committed by the accepted handshake
        else
          make = policy.decide_deposit({&spec, sc.intra[i], r});
        if (make) {
          std::optional<std::pair<settlement::Predicate, int>> refund_terms;
          if (spec.refund_predicate)
            refund_terms = std::make_pair(*spec.refund_predicate, *spec.refund_round);
          auto res = ledger.open_deposit(spec.ssid, spec.sender, spec.receiver, spec.amount,
                                         spec.claim_predicate, spec.claim_round,
                                         refund_terms);
          assert(res.ok());
          (void)res;
          ++opened;
          action_rounds |= 1ull << r;
        }
      }
    }

    // Honest claims: witness items must have been public strictly before
    // this round (or be the party's own holdings). Claims of final-group
    // deposits open the whole cascade, so honest receivers take them only
    // over full collateral: a partial deposit phase means abort, and the
    // later recovery claims stay available.
    bool phase_complete = opened == static_cast<int>(graph.specs.size());
    WitnessRef public_before = ledger.public_items_before(r);
    for (std::size_t i = 0; i < graph.specs.size(); ++i) {
      const auto& spec = graph.specs[i];
      if (spec.claim_round != r || sc.is_corrupted(spec.receiver)) continue;
      if (spec.deposit_group == graph.deposit_groups && !phase_complete) continue;
      const auto* rec = ledger.find(spec.ssid);
      if (!rec || rec->status != settlement::DepositStatus::Open) continue;
      WitnessRef know = public_before;
      know.tokens |= bit_of(spec.receiver);
      if (spec.receiver == aggregator && sc.dealer->has_equiv_extras) {
        know.shares |= sc.all_share_bits;
        know.w = true;
      }
      if (std::popcount(know.shares) >= 2) know.w = true;
      if (know.covers(sc.claim_need[i])) do_claim(spec, spec.receiver, sc.claim_need[i], r);
    }

    // Honest aggregator refund rule: reveal exactly one share, for the
    // lowest-numbered still-open refundable deposit. Revealing two or more
    // would surrender the equalizer deposits; revealing none surrenders
    // every open step-3 deposit to a give.
    if (equiv && !sc.is_corrupted(aggregator) && r == aggregator_refund_round) {
      for (const auto& spec : graph.specs) {
        if (!spec.is_aggregator_refundable) continue;
        const auto* rec = ledger.find(spec.ssid);
        if (!rec || rec->status != settlement::DepositStatus::Open) continue;
        WitnessRef ref;
        ref.shares = bit_of(spec.receiver);  // S_i, indexed by the middle party
        if (sc.record_witnesses) {
          auto res =
              ledger.refund(spec.ssid, aggregator, build_witness(sc, ref), r);
          assert(res.ok());
          (void)res;
        } else {
          auto res = ledger.refund_ref(spec.ssid, aggregator, ref, r);
          assert(res.ok());
          (void)res;
        }
        action_rounds |= 1ull << r;
        break;
      }
    }

    // Adversary turn: the coalition sees this round's honest publications
    // immediately and pools corrupted parties' private holdings.
    WitnessRef coalition = ledger.public_items_upto(r);
    coalition.tokens |= sc.corrupted_mask;
    if (sc.is_corrupted(aggregator) && sc.dealer->has_equiv_extras) {
      coalition.shares |= sc.all_share_bits;
      coalition.w = true;
    }
    if (std::popcount(coalition.shares) >= 2) coalition.w = true;

    for (std::size_t i = 0; i < graph.specs.size(); ++i) {
      const auto& spec = graph.specs[i];
      if (spec.claim_round != r || !sc.is_corrupted(spec.receiver)) continue;
      const auto* rec = ledger.find(spec.ssid);
      if (!rec || rec->status != settlement::DepositStatus::Open) continue;
      if (!coalition.covers(sc.claim_need[i])) continue;
      int group = sc.claim_group[i];
      if (policy.decide_claim({&spec, sc.intra[i], sc.claim_need[i], r, group,
                               sc.group_branchable[group]}))
        do_claim(spec, spec.receiver, sc.claim_need[i], r);
    }

    for (std::size_t i = 0; i < graph.specs.size(); ++i) {
      const auto& spec = graph.specs[i];
      if (!spec.refund_round || *spec.refund_round != r) continue;
      if (!sc.is_corrupted(spec.sender)) continue;
      const auto* rec = ledger.find(spec.ssid);
      if (!rec || rec->status != settlement::DepositStatus::Open) continue;
      if (!coalition.covers(sc.refund_need[i])) continue;
      if (policy.decide_refund({&spec, r})) {
        if (sc.record_witnesses) {
          auto res = ledger.refund(spec.ssid, spec.sender,
                                   build_witness(sc, sc.refund_need[i]), r);
          assert(res.ok());
          (void)res;
        } else {
          auto res = ledger.refund_ref(spec.ssid, spec.sender, sc.refund_need[i], r);
          assert(res.ok());
          (void)res;
        }
        if (spec.is_aggregator_refundable && spec.sender == aggregator)
          ++aggregator_refunds;
        action_rounds |= 1ull << r;
      }
    }

    ledger.settle_expired(r);
    conservation_ok = conservation_ok && ledger.conservation_holds();
  }

  assert(ledger.all_resolved());

  RunResult result;
  ExecutionOutcome& out = result.outcome;
  out.net_balances.resize(n);
  for (int p = 1; p <= n; ++p) out.net_balances[p - 1] = ledger.net_balance(p).value();
  out.public_final = ledger.public_items_final();
  out.learned.adversary_learned =
      (out.public_final.tokens & sc.honest_token_bits) == sc.honest_token_bits;
  bool all_public = std::popcount(out.public_final.tokens) == n;
  out.learned.honest_learned.assign(n, all_public);
  out.rounds_used = std::popcount(action_rounds);
  out.calls_used = opened;
  out.trace = ledger.events();
  out.deposit_phase_complete = opened == static_cast<int>(graph.specs.size());
  out.aggregator_step3_refunds = aggregator_refunds;
  out.conservation_ok = conservation_ok;

  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](std::uint64_t v) {
    h ^= v;
    h *= 1099511628211ull;
  };
  for (const auto& ev : out.trace) {
    mix(static_cast<std::uint64_t>(ev.round));
    mix(static_cast<std::uint64_t>(ev.kind));
    mix(static_cast<std::uint64_t>(ev.ssid));
    mix(static_cast<std::uint64_t>(ev.actor));
  }
  result.trace_hash = h;
  return result;
}

// ---------------------------------------------------------------------------
// Policies.
// ---------------------------------------------------------------------------

/// Corrupted parties mirror the honest prescription using coalition
/// knowledge: deposits made, claims taken when assemblable, refunds per the
/// single-refund rule.
class FollowHonestPolicy : public Policy {
 public:
  bool decide_deposit(const DepositQuery&) override { return true; }
  bool decide_claim(const ClaimQuery&) override { return true; }
  bool decide_refund(const RefundQuery&) override { return !refunded_one_ && (refunded_one_ = true); }

 private:
  bool refunded_one_ = false;
};

class ReplayPolicy : public Policy {
 public:
  explicit ReplayPolicy(const AdversarySchedule& schedule) {
    // Deposit, claim, and refund decisions are separate slots; one ssid may
    // carry a claim override and a refund override at once.
    for (const auto& action : schedule.actions) {
      switch (action.kind) {
        case ActionKind::DepositSkip:
          deposit_skip_.insert(action.ssid);
          break;
        case ActionKind::WithholdClaim:
          claim_override_[action.ssid] = false;
          break;
        case ActionKind::ClaimNow:
          claim_override_[action.ssid] = true;
          break;
        case ActionKind::RefundShare:
          refund_override_[action.ssid] = true;
          break;
        case ActionKind::ForgoRefund:
          refund_override_[action.ssid] = false;
          break;
        case ActionKind::DeclineCrg:
          declined_.insert(action.ssid);
          break;
        case ActionKind::FollowHonest:
          break;
      }
    }
  }

  bool decide_deposit(const DepositQuery& q) override {
    return deposit_skip_.count(q.spec->ssid) == 0;
  }
  bool decide_decline(int ssid) override {
    return !declined_.empty() || declined_.count(ssid) > 0;
  }
  bool decide_claim(const ClaimQuery& q) override {
    auto it = claim_override_.find(q.spec->ssid);
    return it == claim_override_.end() ? true : it->second;
  }
  bool decide_refund(const RefundQuery& q) override {
    auto it = refund_override_.find(q.spec->ssid);
    if (it != refund_override_.end()) return it->second;
    return !refunded_one_ && (refunded_one_ = true);
  }

 private:
  std::set<int> deposit_skip_;
  std::set<int> declined_;
  std::map<int, bool> claim_override_;
  std::map<int, bool> refund_override_;
  bool refunded_one_ = false;
};

/// Replays a fixed choice prefix and records every choice point it passes.
/// Unfixed choices take option 0. Choice points:
///   - {make, skip} per corrupted-sender deposit with an honest receiver;
///   - one {make-all, skip-all} per round of coalition-internal deposits,
///     emitted only when an honest party still has deposits to make later
///     (otherwise the skips cannot change anything outside the coalition);
///   - {claim, withhold} per claim group: claims in one round that publish
///     the same witness toward the same receiver move together, which is
///     what makes exhaustive sweeps at n = 6 tractable;
///   - coalition-internal claim-or-refund claims follow the honest
///     prescription (they only shuffle coins inside the coalition);
///   - {refund, forgo} per refundable claim-refund-or-give deposit.
class EnumerationPolicy : public Policy {
 public:
  struct Taken {
    enum class Kind { MixedDeposit, IntraRound, ClaimGroup, Refund, CrgDecline };
    Kind kind;
    int id;  // ssid, round, or group id
    std::uint8_t option;
    std::vector<int> ssids;
  };

  EnumerationPolicy(const SimContext* sc, const std::vector<std::uint8_t>* prefix)
      : sc_(sc), prefix_(prefix) {}

  bool decide_deposit(const DepositQuery& q) override {
    if (!q.intra)
      return next(Taken::Kind::MixedDeposit, q.spec->ssid, {q.spec->ssid}) == 0;
    if (intra_round_choice_ < 0) {
      if (sc_->honest_deposit_after[q.round]) {
        intra_taken_index_ = static_cast<int>(taken_.size());
        intra_round_choice_ = next(Taken::Kind::IntraRound, q.round, {});
      } else {
        intra_taken_index_ = -1;
        intra_round_choice_ = 0;
      }
    }
    if (intra_round_choice_ == 1 && intra_taken_index_ >= 0)
      taken_[intra_taken_index_].ssids.push_back(q.spec->ssid);
    return intra_round_choice_ == 0;
  }

  bool decide_claim(const ClaimQuery& q) override {
    if (!q.branchable) return true;
    auto it = groups_.find(q.group_id);
    if (it == groups_.end()) {
      int taken_index = static_cast<int>(taken_.size());
      bool claim = next(Taken::Kind::ClaimGroup, q.group_id, {q.spec->ssid}) == 0;
      groups_.emplace(q.group_id, GroupState{claim, taken_index});
      return claim;
    }
    taken_[it->second.taken_index].ssids.push_back(q.spec->ssid);
    return it->second.claim;
  }

  bool decide_refund(const RefundQuery& q) override {
    return next(Taken::Kind::Refund, q.spec->ssid, {q.spec->ssid}) == 0;
  }

  bool decide_decline(int ssid) override {
    return next(Taken::Kind::CrgDecline, ssid, {ssid}) == 1;
  }

  void note_round(int) override {
    groups_.clear();
    intra_round_choice_ = -1;
    intra_taken_index_ = -1;
  }

  const std::vector<Taken>& taken() const { return taken_; }

 private:
  struct GroupState {
    bool claim;
    int taken_index;
  };

  std::uint8_t next(Taken::Kind kind, int id, std::vector<int> ssids) {
    std::uint8_t option = pos_ < prefix_->size() ? (*prefix_)[pos_] : 0;
    ++pos_;
    taken_.push_back({kind, id, option, std::move(ssids)});
    return option;
  }

  const SimContext* sc_;
  const std::vector<std::uint8_t>* prefix_;
  std::size_t pos_ = 0;
  std::vector<Taken> taken_;
  std::map<int, GroupState> groups_;
  int intra_round_choice_ = -1;
  int intra_taken_index_ = -1;
};

AdversarySchedule materialize(const std::set<PartyId>& corrupted,
                              const std::vector<EnumerationPolicy::Taken>& taken) {
  AdversarySchedule schedule;
  schedule.corrupted = corrupted;
  for (const auto& t : taken) {
    switch (t.kind) {
      case EnumerationPolicy::Taken::Kind::MixedDeposit:
      case EnumerationPolicy::Taken::Kind::IntraRound:
        if (t.option == 1)
          for (int ssid : t.ssids) schedule.actions.push_back({ssid, ActionKind::DepositSkip});
        break;
      case EnumerationPolicy::Taken::Kind::ClaimGroup:
        for (int ssid : t.ssids)
          schedule.actions.push_back(
              {ssid, t.option == 0 ? ActionKind::ClaimNow : ActionKind::WithholdClaim});
        break;
      case EnumerationPolicy::Taken::Kind::Refund:
        for (int ssid : t.ssids)
          schedule.actions.push_back(
              {ssid, t.option == 0 ? ActionKind::RefundShare : ActionKind::ForgoRefund});
        break;
      case EnumerationPolicy::Taken::Kind::CrgDecline:
        if (t.option == 1)
          for (int ssid : t.ssids) schedule.actions.push_back({ssid, ActionKind::DeclineCrg});
        break;
    }
  }
  std::sort(schedule.actions.begin(), schedule.actions.end(),
            [](const Action& a, const Action& b) {
              return a.ssid != b.ssid ? a.ssid < b.ssid
                                      : static_cast<int>(a.kind) < static_cast<int>(b.kind);
            });
  return schedule;
}

struct SharedPredicateContext {
  PredicateContext ctx;
  explicit SharedPredicateContext(const pubnmss::DealerOutput& dealer) : ctx(&dealer.pub) {}
};

void explore(const SimContext& sc, const std::set<PartyId>& corrupted,
             std::vector<std::uint8_t> prefix, std::unordered_set<std::uint64_t>& seen,
             const std::function<void(const AdversarySchedule&, const ExecutionOutcome&)>& visit,
             std::uint64_t& executed) {
  EnumerationPolicy policy(&sc, &prefix);
  RunResult result = run_simulation(sc, policy);
  ++executed;
  if (seen.insert(result.trace_hash).second)
    visit(materialize(corrupted, policy.taken()), result.outcome);

  const auto& taken = policy.taken();
  for (int p = static_cast<int>(taken.size()) - 1; p >= static_cast<int>(prefix.size());
       --p) {
    std::vector<std::uint8_t> next(p + 1);
    for (int i = 0; i < p; ++i) next[i] = taken[i].option;
    next[p] = 1;
    explore(sc, corrupted, std::move(next), seen, visit, executed);
  }
}

}  // namespace

Result<ExecutionOutcome, ExecError> execute(const DepositGraph& graph,
                                            const AdversarySchedule& schedule,
                                            const pubnmss::DealerOutput& dealer) {
  if (dealer.n != graph.n || graph.specs.empty()) return ExecError::BadGraph;
  for (PartyId p : schedule.corrupted)
    if (p < 1 || p > graph.n) return ExecError::MalformedSchedule;
  if (static_cast<int>(schedule.corrupted.size()) >= graph.n && !schedule.corrupted.empty())
    return ExecError::FullCorruption;

  auto corrupted_has = [&](PartyId p) { return schedule.corrupted.count(p) > 0; };
  for (const auto& action : schedule.actions) {
    const auto* spec = graph.find(action.ssid);
    if (!spec) return ExecError::MalformedSchedule;
    switch (action.kind) {
      case ActionKind::DepositSkip:
      case ActionKind::RefundShare:
      case ActionKind::ForgoRefund:
        if (!corrupted_has(spec->sender)) return ExecError::MalformedSchedule;
        if (action.kind != ActionKind::DepositSkip && !spec->is_crg())
          return ExecError::MalformedSchedule;
        break;
      case ActionKind::ClaimNow:
      case ActionKind::WithholdClaim:
        if (!corrupted_has(spec->receiver)) return ExecError::MalformedSchedule;
        break;
      case ActionKind::DeclineCrg:
        if (!corrupted_has(spec->receiver) || !spec->is_crg())
          return ExecError::MalformedSchedule;
        break;
      case ActionKind::FollowHonest:
        break;
    }
  }

  SharedPredicateContext shared(dealer);
  SimContext sc = make_context(graph, schedule.corrupted, dealer, &shared.ctx,
                               /*record_witnesses=*/true);
  ReplayPolicy policy(schedule);
  return run_simulation(sc, policy).outcome;
}

Result<std::uint64_t, ExecError> for_each_schedule(
    const DepositGraph& graph, const std::set<PartyId>& corrupted,
    const pubnmss::DealerOutput& dealer,
    const std::function<void(const AdversarySchedule&, const ExecutionOutcome&)>& visit) {
  if (static_cast<int>(corrupted.size()) >= graph.n) return ExecError::FullCorruption;
  for (PartyId p : corrupted)
    if (p < 1 || p > graph.n) return ExecError::MalformedSchedule;

  SharedPredicateContext shared(dealer);
  SimContext sc = make_context(graph, corrupted, dealer, &shared.ctx,
                               /*record_witnesses=*/false);
  std::unordered_set<std::uint64_t> seen;
  std::uint64_t executed = 0;
  explore(sc, corrupted, {}, seen, visit, executed);
  return executed;
}

Result<std::vector<AdversarySchedule>, ExecError> enumerate_schedules(
    const DepositGraph& graph, const std::set<PartyId>& corrupted,
    const pubnmss::DealerOutput& dealer) {
  std::vector<AdversarySchedule> schedules;
  auto res = for_each_schedule(graph, corrupted, dealer,
                               [&](const AdversarySchedule& s, const ExecutionOutcome&) {
                                 schedules.push_back(s);
                               });
  if (!res.ok()) return res.error();
  return schedules;
}

// ---------------------------------------------------------------------------
// Named fixtures and serialization.
// ---------------------------------------------------------------------------

std::vector<std::string> named_schedule_names() {
  return {"fig3_abort", "remark2", "naive2_steal", "equiv_double_refund"};
}

Result<AdversarySchedule, std::string> named_schedule(const std::string& name, int n) {
  AdversarySchedule s;
  s.name = name;
  if (name == "naive2_steal") {
    if (n != 2) return std::string("naive2_steal requires n = 2");
    s.corrupted = {2};
    s.actions = {{2, ActionKind::DepositSkip}, {1, ActionKind::ClaimNow}};
    return s;
  }
  if (name == "fig3_abort") {
    if (n < 3) return std::string("fig3_abort requires n >= 3");
    // Middle party 1 corrupted; it withholds its step-3 claim.
    auto graph = protocols::build({VariantTag::Ours}, n, 1);
    if (!graph.ok()) return std::string("fig3_abort: bad arity");
    s.corrupted = {1};
    for (const auto& spec : graph.value().specs)
      if (spec.sender == n - 1 && spec.receiver == 1 && !spec.is_equalizer_extra)
        s.actions.push_back({spec.ssid, ActionKind::WithholdClaim});
    return s;
  }
  if (name == "remark2") {
    if (n < 3) return std::string("remark2 requires n >= 3");
    auto graph = protocols::build({VariantTag::MergedTau34}, n, 1);
    if (!graph.ok()) return std::string("remark2: bad arity");
    for (int p = 1; p <= n - 1; ++p) s.corrupted.insert(p);
    for (const auto& spec : graph.value().specs) {
      if (spec.deposit_group >= 3) s.actions.push_back({spec.ssid, ActionKind::DepositSkip});
      if (spec.sender == n && spec.receiver == n - 1)
        s.actions.push_back({spec.ssid, ActionKind::ClaimNow});
    }
    return s;
  }
  if (name == "equiv_double_refund") {
    if (n < 5) return std::string("equiv_double_refund requires n >= 5");
    auto graph = protocols::build({VariantTag::OursEquiv}, n, 1);
    if (!graph.ok()) return std::string("equiv_double_refund: bad arity");
    s.corrupted = {1, 2, n - 1, n};
    for (const auto& spec : graph.value().specs) {
      if (spec.is_aggregator_refundable && (spec.receiver == 1 || spec.receiver == 2)) {
        s.actions.push_back({spec.ssid, ActionKind::WithholdClaim});
        s.actions.push_back({spec.ssid, ActionKind::RefundShare});
      }
      if (spec.receiver == n) s.actions.push_back({spec.ssid, ActionKind::WithholdClaim});
    }
    return s;
  }
  return std::string("unknown schedule: " + name);
}

std::string AdversarySchedule::to_json() const {
  nlohmann::json j;
  j["name"] = name;
  j["corrupted"] = std::vector<PartyId>(corrupted.begin(), corrupted.end());
  auto& acts = j["actions"] = nlohmann::json::array();
  for (const auto& a : actions)
    acts.push_back({{"ssid", a.ssid}, {"action", std::string(to_string(a.kind))}});
  return j.dump(2);
}

Result<AdversarySchedule, std::string> AdversarySchedule::from_json(const std::string& text) {
  try {
    auto j = nlohmann::json::parse(text);
    AdversarySchedule s;
    s.name = j.value("name", "");
    for (const auto& p : j.at("corrupted")) s.corrupted.insert(p.get<PartyId>());
    for (const auto& a : j.at("actions")) {
      auto kind = action_from_string(a.at("action").get<std::string>());
      if (!kind) return std::string("bad action kind");
      s.actions.push_back({a.at("ssid").get<int>(), *kind});
    }
    return s;
  } catch (const std::exception& e) {
    return std::string("schedule parse error: ") + e.what();
  }
}

}  // namespace fairrecon::adversary
