#pragma once

#include <cstdint>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "fairrecon/outcome.hpp"
#include "fairrecon/protocols.hpp"
#include "fairrecon/pubnmss.hpp"

namespace fairrecon::adversary {

using protocols::DepositGraph;
using settlement::PartyId;

enum class ActionKind {
  FollowHonest,   // default for anything not listed
  DepositSkip,    // corrupted sender withholds the deposit
  ClaimNow,       // claim at the prescribed round (explicit form of default)
  WithholdClaim,  // corrupted receiver never claims
  RefundShare,    // corrupted sender refunds a CRG deposit, revealing the share
  ForgoRefund,    // corrupted sender lets the CRG deposit fall to give
  DeclineCrg,     // corrupted receiver refuses the CRG deposit handshake; the
                  // honest sender then places none of its deposits that round
};

const char* to_string(ActionKind kind);

struct Action {
  int ssid = 0;
  ActionKind kind = ActionKind::FollowHonest;
  bool operator==(const Action&) const = default;
};

/// Corrupted set plus per-deposit overrides. Anything not overridden follows
/// the honest prescription, with coalition knowledge substituted for honest
/// knowledge when assembling witnesses.
struct AdversarySchedule {
  std::set<PartyId> corrupted;
  std::vector<Action> actions;
  std::string name;

  std::string to_json() const;
  static Result<AdversarySchedule, std::string> from_json(const std::string& text);
  bool operator==(const AdversarySchedule& other) const {
    return corrupted == other.corrupted && actions == other.actions;
  }
};

enum class ExecError { MalformedSchedule, FullCorruption, BadGraph };

/// Deterministic replay of one schedule: per round, honest actions first,
/// then adversary actions, then expired-deposit settlement.
Result<engine::ExecutionOutcome, ExecError> execute(const DepositGraph& graph,
                                                    const AdversarySchedule& schedule,
                                                    const pubnmss::DealerOutput& dealer);

/// Enumerates the bounded adversary action space for one corrupted set:
/// {make, skip} per corrupted-sender deposit, {claim, withhold} per
/// corrupted claim opportunity (grouped when several claims at one round
/// publish the same witness), {refund, forgo} per refundable CRG deposit.
/// Coalition-internal claim-or-refund deposits follow the honest
/// prescription; their variations only shuffle coins inside the coalition.
/// Results are deduplicated by induced trace.
Result<std::vector<AdversarySchedule>, ExecError> enumerate_schedules(
    const DepositGraph& graph, const std::set<PartyId>& corrupted,
    const pubnmss::DealerOutput& dealer);

/// Streaming form: invokes `visit` once per deduplicated schedule with its
/// outcome. Used by the audit driver to avoid materializing everything.
Result<std::uint64_t, ExecError> for_each_schedule(
    const DepositGraph& graph, const std::set<PartyId>& corrupted,
    const pubnmss::DealerOutput& dealer,
    const std::function<void(const AdversarySchedule&, const engine::ExecutionOutcome&)>& visit);

/// Built-in regression fixtures: "fig3_abort", "remark2", "naive2_steal",
/// "equiv_double_refund".
Result<AdversarySchedule, std::string> named_schedule(const std::string& name, int n);
std::vector<std::string> named_schedule_names();

}  // namespace fairrecon::adversary
