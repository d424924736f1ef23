#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fairrecon/adversary.hpp"
#include "fairrecon/outcome.hpp"
#include "fairrecon/protocols.hpp"

namespace fairrecon::engine {

using protocols::DepositGraph;
using protocols::ProtocolVariant;
using settlement::CoinAmount;
using settlement::PartyId;

struct CheckResult {
  bool pass = true;
  bool triggered = false;  // compensation trigger fired (B-style checks)
  PartyId offending = 0;
  std::string detail;
};

/// Condition (A): no honest party ends with a negative net balance.
CheckResult check_condition_a(const ExecutionOutcome& outcome,
                              const std::set<PartyId>& honest);

/// Condition (B*): when the adversary learned the output and some honest
/// party did not, every honest party nets at least q.
CheckResult check_condition_b_star(const ExecutionOutcome& outcome,
                                   const std::set<PartyId>& honest, CoinAmount q);

/// Condition (B): the (B*) trigger plus equal compensation across honest
/// parties.
CheckResult check_condition_b_equal(const ExecutionOutcome& outcome,
                                    const std::set<PartyId>& honest, CoinAmount q);

/// Which ideal-outcome message pattern the run matches. Reported
/// descriptively; pass/fail authority rests with the conditions above.
enum class Envelope { OutputToAll, ExtraToSubset, PenaltyToAllHonest, NoneDelivered };
const char* to_string(Envelope envelope);
Envelope classify_envelope(const ExecutionOutcome& outcome, const std::set<PartyId>& honest);

struct Verdict {
  CheckResult condition_a;
  CheckResult condition_b_star;
  CheckResult condition_b_equal;
  Envelope envelope = Envelope::NoneDelivered;
};

Verdict evaluate(const ExecutionOutcome& outcome, const std::set<PartyId>& honest,
                 CoinAmount q);

enum class EngineError { OutOfRange, BoundExceeded };

/// Aggregator compensation in the plain aggregator protocol with x middle
/// aborters: ((x-1)n + 2 - x) q. Asserts the algebraic identity with
/// ((n-2)^2 - (n-2-x)(n-1)) q.
Result<CoinAmount, EngineError> aggregator_compensation(int n, int x, CoinAmount q);

/// The voluntary redistribution suggestion for x >= 2 middle aborters: the
/// per-recipient transfer (n-2)xq / (n-1+x) as an exact rational plus its
/// floor and remainder, with the compensation-pool identity
/// (n-2)xq = ((x-1)n+2-x)q + (n-2-x)q checked alongside.
struct EqualizeSuggestion {
  std::uint64_t numerator = 0;    // (n-2) * x * q
  std::uint64_t denominator = 0;  // n-1+x
  std::uint64_t floor_units = 0;
  std::uint64_t remainder = 0;
  std::uint64_t pool = 0;              // total compensation (n-2)xq
  std::uint64_t aggregator_share = 0;  // ((x-1)n+2-x)q
  int claimer_count = 0;               // n-2-x
  bool pool_identity_ok = false;
};
Result<EqualizeSuggestion, EngineError> equalize_suggestion(int n, int x, CoinAmount q);

struct FailureRecord {
  std::string condition;  // "A", "B*", "B-equal", "equalization"
  std::vector<PartyId> corrupted;
  adversary::AdversarySchedule schedule;
  std::vector<std::int64_t> net_balances;
  PartyId offending = 0;
};

struct AuditOptions {
  int exhaustive_bound = 6;
  int jobs = 1;
  std::uint64_t dealer_seed = 1;
  int keep_failure_limit = 64;  // cap stored failure records
};

struct AuditReport {
  ProtocolVariant variant;
  int n = 0;
  CoinAmount q = 0;

  int honest_rounds = 0;
  int honest_calls = 0;
  int graph_rounds = 0;
  int graph_calls = 0;
  CoinAmount max_deposit_any = 0;
  PartyId max_deposit_party = 0;

  std::uint64_t corrupted_sets = 0;
  std::uint64_t schedules_executed = 0;

  std::vector<FailureRecord> a_failures;
  std::vector<FailureRecord> b_star_failures;
  std::vector<FailureRecord> b_equal_failures;
  std::uint64_t a_failure_count = 0;
  std::uint64_t b_star_failure_count = 0;
  std::uint64_t b_equal_failure_count = 0;

  // Equalization clause, OursEquiv only: over complete-deposit runs where
  // the corrupted aggregator refunded two or more step-3 deposits and the
  // compensation trigger fired, every honest party nets exactly n*q and the
  // aggregator nets at most 0.
  std::uint64_t double_refund_runs = 0;
  std::uint64_t equalization_violations = 0;
  std::vector<FailureRecord> equalization_failures;

  bool conservation_ok = true;
  bool honest_all_zero = true;

  std::string compensation_class() const {
    return b_equal_failure_count == 0 ? "equivalent" : "non-equivalent";
  }
};

/// Exhaustive audit over every corrupted set of size < n and every
/// enumerated schedule. Fans out over corrupted sets when jobs > 1; the
/// merged report is deterministic regardless of job count.
Result<AuditReport, EngineError> audit(const ProtocolVariant& variant, int n, CoinAmount q,
                                       const AuditOptions& options = {});

std::string render_report_text(const AuditReport& report);
std::string render_report_json(const AuditReport& report);

/// One-line JSON per ledger event; identical (config, seed) inputs produce
/// byte-identical output.
std::string trace_to_jsonl(const ExecutionOutcome& outcome);

}  // namespace fairrecon::engine
