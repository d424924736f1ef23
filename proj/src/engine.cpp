#include "fairrecon/engine.hpp"

#include <algorithm>
#include <cassert>
#include <atomic>
#include <bit>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

namespace fairrecon::engine {

using adversary::AdversarySchedule;
using protocols::VariantTag;

CheckResult check_condition_a(const ExecutionOutcome& outcome,
                              const std::set<PartyId>& honest) {
  CheckResult res;
  for (PartyId p : honest) {
    if (outcome.net(p) < 0) {
      res.pass = false;
      res.offending = p;
      res.detail = "honest P" + std::to_string(p) + " nets " +
                   std::to_string(outcome.net(p));
      return res;
    }
  }
  return res;
}

static bool compensation_trigger(const ExecutionOutcome& outcome,
                                 const std::set<PartyId>& honest) {
  if (!outcome.learned.adversary_learned) return false;
  for (PartyId p : honest)
    if (!outcome.learned.honest_learned[p - 1]) return true;
  return false;
}

CheckResult check_condition_b_star(const ExecutionOutcome& outcome,
                                   const std::set<PartyId>& honest, CoinAmount q) {
  CheckResult res;
  if (!compensation_trigger(outcome, honest)) return res;
  res.triggered = true;
  for (PartyId p : honest) {
    if (outcome.net(p) < static_cast<std::int64_t>(q)) {
      res.pass = false;
      res.offending = p;
      res.detail = "honest P" + std::to_string(p) + " compensated " +
                   std::to_string(outcome.net(p)) + " < q";
      return res;
    }
  }
  return res;
}

CheckResult check_condition_b_equal(const ExecutionOutcome& outcome,
                                    const std::set<PartyId>& honest, CoinAmount q) {
  CheckResult res = check_condition_b_star(outcome, honest, q);
  if (!res.triggered || !res.pass) return res;
  std::int64_t first = 0;
  bool have = false;
  for (PartyId p : honest) {
    if (!have) {
      first = outcome.net(p);
      have = true;
    } else if (outcome.net(p) != first) {
      res.pass = false;
      res.offending = p;
      res.detail = "honest compensations differ: " + std::to_string(first) + " vs " +
                   std::to_string(outcome.net(p));
      return res;
    }
  }
  return res;
}

const char* to_string(Envelope envelope) {
  switch (envelope) {
    case Envelope::OutputToAll: return "output-to-all";
    case Envelope::ExtraToSubset: return "extra-to-subset";
    case Envelope::PenaltyToAllHonest: return "penalty-to-all-honest";
    case Envelope::NoneDelivered: return "none-delivered";
  }
  return "?";
}

Envelope classify_envelope(const ExecutionOutcome& outcome, const std::set<PartyId>& honest) {
  bool all_learned = !honest.empty();
  for (PartyId p : honest) all_learned = all_learned && outcome.learned.honest_learned[p - 1];
  if (all_learned) return Envelope::OutputToAll;
  if (compensation_trigger(outcome, honest)) return Envelope::PenaltyToAllHonest;
  for (PartyId p : honest)
    if (outcome.net(p) > 0) return Envelope::ExtraToSubset;
  return Envelope::NoneDelivered;
}

Verdict evaluate(const ExecutionOutcome& outcome, const std::set<PartyId>& honest,
                 CoinAmount q) {
  Verdict v;
  v.condition_a = check_condition_a(outcome, honest);
  v.condition_b_star = check_condition_b_star(outcome, honest, q);
  v.condition_b_equal = check_condition_b_equal(outcome, honest, q);
  v.envelope = classify_envelope(outcome, honest);
  return v;
}

Result<CoinAmount, EngineError> aggregator_compensation(int n, int x, CoinAmount q) {
  if (n < 3 || x < 1 || x > n - 2) return EngineError::OutOfRange;
  std::int64_t direct = (static_cast<std::int64_t>(x - 1) * n + 2 - x);
  std::int64_t expanded = static_cast<std::int64_t>(n - 2) * (n - 2) -
                          static_cast<std::int64_t>(n - 2 - x) * (n - 1);
  assert(direct == expanded && direct >= 0);
  (void)expanded;
  return static_cast<CoinAmount>(direct) * q;
}

Result<EqualizeSuggestion, EngineError> equalize_suggestion(int n, int x, CoinAmount q) {
  if (n < 4 || x < 2 || x > n - 2) return EngineError::OutOfRange;
  EqualizeSuggestion s;
  s.numerator = static_cast<std::uint64_t>(n - 2) * x * q;
  s.denominator = static_cast<std::uint64_t>(n - 1 + x);
  s.floor_units = s.numerator / s.denominator;
  s.remainder = s.numerator % s.denominator;
  s.pool = static_cast<std::uint64_t>(n - 2) * x * q;
  s.aggregator_share = aggregator_compensation(n, x, q).value();
  s.claimer_count = n - 2 - x;
  s.pool_identity_ok =
      s.pool == s.aggregator_share + static_cast<std::uint64_t>(s.claimer_count) * q;
  return s;
}

// ---------------------------------------------------------------------------
// Exhaustive audit.
// ---------------------------------------------------------------------------

namespace {

std::set<PartyId> mask_to_set(std::uint32_t mask, int n) {
  std::set<PartyId> s;
  for (int p = 1; p <= n; ++p)
    if (mask & (1u << (p - 1))) s.insert(p);
  return s;
}

struct SetResult {
  std::uint64_t schedules = 0;
  std::vector<FailureRecord> a_failures, b_star_failures, b_equal_failures,
      equalization_failures;
  std::uint64_t a_count = 0, b_star_count = 0, b_equal_count = 0;
  std::uint64_t double_refund_runs = 0, equalization_violations = 0;
  bool conservation_ok = true;
};

}  // namespace

Result<AuditReport, EngineError> audit(const ProtocolVariant& variant, int n, CoinAmount q,
                                       const AuditOptions& options) {
  if (n > options.exhaustive_bound) return EngineError::BoundExceeded;
  auto graph_res = protocols::build(variant, n, q);
  if (!graph_res.ok()) return EngineError::OutOfRange;
  const auto& graph = graph_res.value();

  pubnmss::DealerConfig dealer_cfg;
  dealer_cfg.seed = options.dealer_seed;
  Rng secret_rng(options.dealer_seed ^ 0x5ec1a17ull);
  auto dealer = pubnmss::deal_output(secret_rng.bytes(16), n,
                                     variant.tag == VariantTag::OursEquiv, dealer_cfg)
                    .expect("dealer");

  AuditReport report;
  report.variant = variant;
  report.n = n;
  report.q = q;
  report.graph_rounds = protocols::round_count(graph);
  report.graph_calls = protocols::call_count(graph);
  for (PartyId p = 1; p <= n; ++p) {
    CoinAmount d = protocols::max_deposit(graph, p).value();
    if (d > report.max_deposit_any) {
      report.max_deposit_any = d;
      report.max_deposit_party = p;
    }
  }

  // Every corrupted set of size < n, the empty set included (the honest run).
  std::vector<std::uint32_t> masks;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask)
    if (std::popcount(mask) < n) masks.push_back(mask);
  report.corrupted_sets = masks.size();

  std::vector<SetResult> results(masks.size());
  const std::int64_t nq = static_cast<std::int64_t>(n) * static_cast<std::int64_t>(q);

  auto process = [&](std::size_t index) {
    std::uint32_t mask = masks[index];
    SetResult& slot = results[index];
    std::set<PartyId> corrupted = mask_to_set(mask, n);
    std::set<PartyId> honest;
    for (PartyId p = 1; p <= n; ++p)
      if (!corrupted.count(p)) honest.insert(p);
    bool aggregator_corrupted = corrupted.count(graph.aggregator()) > 0;

    auto visit = [&](const AdversarySchedule& schedule, const ExecutionOutcome& outcome) {
      ++slot.schedules;
      slot.conservation_ok = slot.conservation_ok && outcome.conservation_ok;
      std::int64_t sum = 0;
      for (auto b : outcome.net_balances) sum += b;
      slot.conservation_ok = slot.conservation_ok && sum == 0;

      auto record = [&](std::vector<FailureRecord>& where, std::uint64_t& counter,
                        const char* condition, PartyId offending) {
        ++counter;
        if (where.size() < 16) {
          FailureRecord f;
          f.condition = condition;
          f.corrupted.assign(corrupted.begin(), corrupted.end());
          f.schedule = schedule;
          f.net_balances = outcome.net_balances;
          f.offending = offending;
          where.push_back(std::move(f));
        }
      };

      auto a = check_condition_a(outcome, honest);
      if (!a.pass) record(slot.a_failures, slot.a_count, "A", a.offending);
      auto b_star = check_condition_b_star(outcome, honest, q);
      if (!b_star.pass) record(slot.b_star_failures, slot.b_star_count, "B*", b_star.offending);
      auto b_eq = check_condition_b_equal(outcome, honest, q);
      if (!b_eq.pass) record(slot.b_equal_failures, slot.b_equal_count, "B-equal", b_eq.offending);

      if (variant.tag == VariantTag::OursEquiv && aggregator_corrupted &&
          outcome.deposit_phase_complete && outcome.aggregator_step3_refunds >= 2 &&
          b_star.triggered) {
        ++slot.double_refund_runs;
        bool ok = outcome.net(graph.aggregator()) <= 0;
        for (PartyId p : honest) ok = ok && outcome.net(p) == nq;
        if (!ok)
          record(slot.equalization_failures, slot.equalization_violations, "equalization", 0);
      }
    };

    auto res = adversary::for_each_schedule(graph, corrupted, dealer, visit);
    (void)res;
  };

  int jobs = std::max(1, options.jobs);
  if (jobs == 1) {
    for (std::size_t i = 0; i < masks.size(); ++i) process(i);
  } else {
    std::vector<std::thread> workers;
    std::atomic<std::size_t> next{0};
    for (int j = 0; j < jobs; ++j)
      workers.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < masks.size(); i = next.fetch_add(1))
          process(i);
      });
    for (auto& w : workers) w.join();
  }

  // Deterministic merge in mask order.
  for (std::size_t i = 0; i < masks.size(); ++i) {
    auto& slot = results[i];
    report.schedules_executed += slot.schedules;
    report.a_failure_count += slot.a_count;
    report.b_star_failure_count += slot.b_star_count;
    report.b_equal_failure_count += slot.b_equal_count;
    report.double_refund_runs += slot.double_refund_runs;
    report.equalization_violations += slot.equalization_violations;
    report.conservation_ok = report.conservation_ok && slot.conservation_ok;
    auto take = [&](std::vector<FailureRecord>& into, std::vector<FailureRecord>& from) {
      for (auto& f : from)
        if (static_cast<int>(into.size()) < options.keep_failure_limit)
          into.push_back(std::move(f));
    };
    take(report.a_failures, slot.a_failures);
    take(report.b_star_failures, slot.b_star_failures);
    take(report.b_equal_failures, slot.b_equal_failures);
    take(report.equalization_failures, slot.equalization_failures);
  }

  // Honest-run counts come from the empty corrupted set.
  AdversarySchedule honest_schedule;
  auto honest_outcome = adversary::execute(graph, honest_schedule, dealer);
  if (honest_outcome.ok()) {
    report.honest_rounds = honest_outcome.value().rounds_used;
    report.honest_calls = honest_outcome.value().calls_used;
    for (auto b : honest_outcome.value().net_balances)
      report.honest_all_zero = report.honest_all_zero && b == 0;
  }
  return report;
}

std::string render_report_text(const AuditReport& report) {
  std::ostringstream os;
  os << "variant " << report.variant.name() << "  n=" << report.n << "  q=" << report.q
     << "\n";
  os << "  rounds: " << report.honest_rounds << " (graph slots " << report.graph_rounds
     << ")  calls: " << report.honest_calls << "  max deposit: " << report.max_deposit_any
     << " units by P" << report.max_deposit_party << "\n";
  os << "  corrupted sets: " << report.corrupted_sets
     << "  schedules: " << report.schedules_executed << "\n";
  os << "  failures  A: " << report.a_failure_count << "  B*: " << report.b_star_failure_count
     << "  B-equal: " << report.b_equal_failure_count << "  -> compensation "
     << report.compensation_class() << "\n";
  if (report.variant.tag == VariantTag::OursEquiv)
    os << "  double-refund runs: " << report.double_refund_runs
       << "  equalization violations: " << report.equalization_violations << "\n";
  os << "  conservation: " << (report.conservation_ok ? "ok" : "VIOLATED") << "\n";
  for (const auto& f : report.a_failures) {
    os << "  [A] corrupted={";
    for (std::size_t i = 0; i < f.corrupted.size(); ++i)
      os << (i ? "," : "") << f.corrupted[i];
    os << "} offending=P" << f.offending << " nets=[";
    for (std::size_t i = 0; i < f.net_balances.size(); ++i)
      os << (i ? "," : "") << f.net_balances[i];
    os << "]\n";
  }
  return os.str();
}

std::string render_report_json(const AuditReport& report) {
  nlohmann::json j;
  j["variant"] = report.variant.name();
  j["n"] = report.n;
  j["q"] = report.q;
  j["rounds_honest"] = report.honest_rounds;
  j["calls_honest"] = report.honest_calls;
  j["graph_rounds"] = report.graph_rounds;
  j["graph_calls"] = report.graph_calls;
  j["max_deposit"] = report.max_deposit_any;
  j["max_deposit_party"] = report.max_deposit_party;
  j["corrupted_sets"] = report.corrupted_sets;
  j["schedules"] = report.schedules_executed;
  j["failures"] = {{"A", report.a_failure_count},
                   {"B_star", report.b_star_failure_count},
                   {"B_equal", report.b_equal_failure_count}};
  j["compensation"] = report.compensation_class();
  j["double_refund_runs"] = report.double_refund_runs;
  j["equalization_violations"] = report.equalization_violations;
  j["conservation_ok"] = report.conservation_ok;
  j["honest_all_zero"] = report.honest_all_zero;
  return j.dump(2);
}

std::string trace_to_jsonl(const ExecutionOutcome& outcome) {
  std::ostringstream os;
  for (const auto& ev : outcome.trace) {
    nlohmann::json j;
    j["round"] = ev.round;
    j["kind"] = settlement::to_string(ev.kind);
    j["ssid"] = ev.ssid;
    j["actor"] = ev.actor;
    j["amount"] = ev.amount;
    if (ev.witness)
      j["witness"] = ev.witness->digest_hex();
    else
      j["witness"] = nullptr;
    os << j.dump() << "\n";
  }
  return os.str();
}

}  // namespace fairrecon::engine
