#include "fairrecon/protocols.hpp"

#include <algorithm>
#include <cassert>
#include <set>
#include <sstream>

namespace fairrecon::protocols {

std::string ProtocolVariant::name() const {
  switch (tag) {
    case VariantTag::Naive2: return "Naive2";
    case VariantTag::BK2: return "BK2";
    case VariantTag::BKn: return "BKn";
    case VariantTag::Ours: return "Ours";
    case VariantTag::OursReduced: return "OursReduced" + std::to_string(layers);
    case VariantTag::OursEquiv: return "OursEquiv";
    case VariantTag::MergedTau34: return "MergedTau34";
  }
  return "?";
}

std::optional<ProtocolVariant> ProtocolVariant::parse(const std::string& name) {
  if (name == "Naive2") return ProtocolVariant{VariantTag::Naive2};
  if (name == "BK2") return ProtocolVariant{VariantTag::BK2};
  if (name == "BKn") return ProtocolVariant{VariantTag::BKn};
  if (name == "Ours") return ProtocolVariant{VariantTag::Ours};
  if (name == "OursEquiv") return ProtocolVariant{VariantTag::OursEquiv};
  if (name == "MergedTau34") return ProtocolVariant{VariantTag::MergedTau34};
  if (name.rfind("OursReduced", 0) == 0) {
    int l = 1;
    if (name.size() > 11) {
      try {
        l = std::stoi(name.substr(11));
      } catch (...) {
        return std::nullopt;
      }
    }
    return ProtocolVariant{VariantTag::OursReduced, l};
  }
  return std::nullopt;
}

const DepositSpec* DepositGraph::find(int ssid) const {
  for (const auto& spec : specs)
    if (spec.ssid == ssid) return &spec;
  return nullptr;
}

namespace {

std::vector<PartyId> all_tokens(int upto) {
  std::vector<PartyId> v(upto);
  for (int i = 0; i < upto; ++i) v[i] = i + 1;
  return v;
}

struct Builder {
  DepositGraph graph;
  int next_ssid = 1;

  DepositSpec& add(PartyId sender, PartyId receiver, CoinAmount amount, Predicate pred,
                   std::string claim_label, int group) {
    DepositSpec spec;
    spec.ssid = next_ssid++;
    spec.sender = sender;
    spec.receiver = receiver;
    spec.amount = amount;
    spec.claim_predicate = std::move(pred);
    spec.claim_label = std::move(claim_label);
    spec.deposit_group = group;
    graph.specs.push_back(std::move(spec));
    return graph.specs.back();
  }

  /// Assigns absolute rounds: deposit groups occupy rounds 1..G, then claim
  /// labels in the given order. A label may alias an earlier one (the merged
  /// tau3/tau4 fixture).
  void finish(const std::vector<std::pair<std::string, std::string>>& labels) {
    int g = 0;
    for (const auto& spec : graph.specs) g = std::max(g, spec.deposit_group);
    graph.deposit_groups = g;
    int round = g;
    for (const auto& [label, alias_of] : labels) {
      if (!alias_of.empty())
        graph.label_rounds[label] = graph.label_rounds.at(alias_of);
      else
        graph.label_rounds[label] = ++round;
    }
    graph.horizon = 0;
    for (auto& spec : graph.specs) {
      spec.claim_round = graph.label_rounds.at(spec.claim_label);
      if (spec.refund_predicate) spec.refund_round = graph.label_rounds.at(spec.refund_label);
      graph.horizon = std::max(graph.horizon,
                               spec.refund_round ? *spec.refund_round : spec.claim_round);
    }
  }
};

DepositGraph build_naive2(CoinAmount q) {
  Builder b;
  b.add(1, 2, q, Predicate::tokens({2}), "tau1", 1);
  b.add(2, 1, q, Predicate::tokens({1}), "tau1", 2);
  b.finish({{"tau1", ""}});
  return std::move(b.graph);
}

DepositGraph build_bkn(int n, CoinAmount q) {
  Builder b;
  for (int i = 1; i <= n - 1; ++i)
    b.add(i, n, q, Predicate::tokens(all_tokens(n)), "tau" + std::to_string(n), 1);
  // Descending ladder: (n-k) -> (n-1-k) carrying (n-1-k)q on T_1..T_{n-1-k}.
  for (int k = 0; k <= n - 2; ++k) {
    int receiver = n - 1 - k;
    b.add(n - k, receiver, static_cast<CoinAmount>(receiver) * q,
          Predicate::tokens(all_tokens(receiver)), "tau" + std::to_string(receiver), 2 + k);
  }
  std::vector<std::pair<std::string, std::string>> labels;
  for (int j = 1; j <= n; ++j) labels.emplace_back("tau" + std::to_string(j), "");
  b.finish(labels);
  return std::move(b.graph);
}

DepositGraph build_ours(int n, CoinAmount q, bool equiv, bool merged_tau34) {
  Builder b;
  for (int i = 1; i <= n - 1; ++i)
    b.add(i, n, q, Predicate::tokens(all_tokens(n)), "tau4", 1);
  b.add(n, n - 1, static_cast<CoinAmount>(n - 1) * q, Predicate::tokens(all_tokens(n - 1)),
        "tau3", 2);
  for (int i = n - 2; i >= 1; --i) {
    auto& spec = b.add(n - 1, i, static_cast<CoinAmount>(n - 1) * q,
                       Predicate::tokens({n - 1, i}), "tau2", 3);
    if (equiv) {
      spec.refund_predicate = Predicate::secret_share(i);
      spec.refund_label = "tau2p";
      spec.is_aggregator_refundable = true;
    }
  }
  for (int i = n - 2; i >= 1; --i)
    b.add(i, n - 1, static_cast<CoinAmount>(n - 2) * q, Predicate::tokens({n - 1}), "tau1", 4);
  if (equiv) {
    // Equalizer deposits go out in the same round as the step-3 deposits.
    for (int i = 1; i <= n - 2; ++i) {
      auto& spec = b.add(n - 1, i, static_cast<CoinAmount>(n - 1) * q, Predicate::witness_w(),
                         "tau2pp", 3);
      spec.is_equalizer_extra = true;
    }
  }

  std::vector<std::pair<std::string, std::string>> labels;
  labels.emplace_back("tau1", "");
  labels.emplace_back("tau2", "");
  if (equiv) {
    labels.emplace_back("tau2p", "");
    labels.emplace_back("tau2pp", "");
  }
  labels.emplace_back("tau3", "");
  labels.emplace_back("tau4", merged_tau34 ? "tau3" : "");
  b.finish(labels);
  return std::move(b.graph);
}

// Tiered reduction: middles split into l+1 tiers of g = (n-2)/(l+1) parties
// forming g chains. The aggregator funds tier 1 at (n-1)q; tier k funds its
// tier-(k+1) partner at (n-1-k)q; the last tier deposits (n-l-2)q back to the
// aggregator. Tier direction alternates so the l=1 pairing is i <-> n-1-i.
struct TierMap {
  int g, l;
  PartyId member(int tier, int chain) const {
    int base = (tier - 1) * g;
    return base + (tier % 2 == 1 ? chain : g + 1 - chain);
  }
};

DepositGraph build_reduced(int n, CoinAmount q, int l) {
  const int g = (n - 2) / (l + 1);
  TierMap tiers{g, l};
  Builder b;
  const std::string last_tau = "tau" + std::to_string(l + 4);
  for (int i = 1; i <= n - 1; ++i)
    b.add(i, n, q, Predicate::tokens(all_tokens(n)), last_tau, 1);
  b.add(n, n - 1, static_cast<CoinAmount>(n - 1) * q, Predicate::tokens(all_tokens(n - 1)),
        "tau" + std::to_string(l + 3), 2);
  // Aggregator -> tier 1; witness chains through the tier-2 partner.
  for (int c = g; c >= 1; --c) {
    PartyId lower = tiers.member(1, c);
    std::vector<PartyId> need = {static_cast<PartyId>(n - 1)};
    if (l >= 1) need.push_back(tiers.member(2, c));
    need.push_back(lower);
    b.add(n - 1, lower, static_cast<CoinAmount>(n - 1) * q, Predicate::tokens(need),
          "tau" + std::to_string(l + 2), 3);
  }
  for (int k = 1; k <= l; ++k) {
    for (int c = g; c >= 1; --c) {
      PartyId from = tiers.member(k, c);
      PartyId to = tiers.member(k + 1, c);
      std::vector<PartyId> need = {static_cast<PartyId>(n - 1)};
      if (k + 1 <= l) need.push_back(tiers.member(k + 2, c));
      need.push_back(to);
      b.add(from, to, static_cast<CoinAmount>(n - 1 - k) * q, Predicate::tokens(need),
            "tau" + std::to_string(l + 2 - k), 3 + k);
    }
  }
  for (int c = g; c >= 1; --c)
    b.add(tiers.member(l + 1, c), n - 1, static_cast<CoinAmount>(n - l - 2) * q,
          Predicate::tokens({n - 1}), "tau1", 4 + l);

  std::vector<std::pair<std::string, std::string>> labels;
  for (int j = 1; j <= l + 4; ++j) labels.emplace_back("tau" + std::to_string(j), "");
  b.finish(labels);
  return std::move(b.graph);
}

}  // namespace

Result<DepositGraph, BuildError> build(const ProtocolVariant& variant, int n, CoinAmount q) {
  if (q < 1) return BuildError::UnsupportedArity;
  DepositGraph graph;
  switch (variant.tag) {
    case VariantTag::Naive2:
      if (n != 2) return BuildError::UnsupportedArity;
      graph = build_naive2(q);
      break;
    case VariantTag::BK2:
      if (n != 2) return BuildError::UnsupportedArity;
      graph = build_bkn(2, q);
      break;
    case VariantTag::BKn:
      if (n < 3) return BuildError::UnsupportedArity;
      graph = build_bkn(n, q);
      break;
    case VariantTag::Ours:
      if (n < 3) return BuildError::UnsupportedArity;
      graph = build_ours(n, q, false, false);
      break;
    case VariantTag::OursEquiv:
      if (n < 3) return BuildError::UnsupportedArity;
      graph = build_ours(n, q, true, false);
      break;
    case VariantTag::MergedTau34:
      if (n < 3) return BuildError::UnsupportedArity;
      graph = build_ours(n, q, false, true);
      break;
    case VariantTag::OursReduced: {
      int l = variant.layers;
      if (l < 1 || n < 2 * l + 4 || (n - 2) % (l + 1) != 0)
        return BuildError::UnsupportedArity;
      graph = build_reduced(n, q, l);
      break;
    }
  }
  graph.variant = variant;
  graph.n = n;
  graph.q = q;
  return graph;
}

int call_count(const DepositGraph& graph) { return static_cast<int>(graph.specs.size()); }

int round_count(const DepositGraph& graph) {
  std::set<int> deadline_rounds;
  for (const auto& spec : graph.specs) {
    deadline_rounds.insert(spec.claim_round);
    if (spec.refund_round) deadline_rounds.insert(*spec.refund_round);
  }
  return graph.deposit_groups + static_cast<int>(deadline_rounds.size());
}

Result<CoinAmount, settlement::LedgerError> max_deposit(const DepositGraph& graph,
                                                        PartyId party) {
  if (party < 1 || party > graph.n) return settlement::LedgerError::UnknownParty;
  CoinAmount total = 0;
  for (const auto& spec : graph.specs)
    if (spec.sender == party) total += spec.amount;
  return total;
}

int minimal_refill_factor(int n) {
  assert(n >= 3);
  // (n-2)x > (n-3)(x+1) simplifies to x > n-3.
  int x = 1;
  while (!(static_cast<long long>(n - 2) * x > static_cast<long long>(n - 3) * (x + 1))) ++x;
  return x;
}

std::vector<HonestAction> DepositGraph::honest_schedule() const {
  std::vector<HonestAction> plan;
  for (const auto& spec : specs)
    plan.push_back({spec.deposit_group, spec.sender, HonestAction::Kind::Deposit, spec.ssid});
  for (const auto& spec : specs)
    plan.push_back({spec.claim_round, spec.receiver, HonestAction::Kind::Claim, spec.ssid});
  if (variant.tag == VariantTag::OursEquiv) {
    int refund_round = label_rounds.at("tau2p");
    plan.push_back({refund_round, aggregator(), HonestAction::Kind::RefundOneAborted, 0});
  }
  std::stable_sort(plan.begin(), plan.end(), [](const HonestAction& a, const HonestAction& b) {
    return a.round < b.round;
  });
  return plan;
}

std::string arrow_listing(const DepositGraph& graph) {
  std::ostringstream os;
  os << graph.variant.name() << " n=" << graph.n << " q=" << graph.q << "\n";
  int group = 0;
  for (const auto& spec : graph.specs) {
    if (spec.deposit_group != group) {
      group = spec.deposit_group;
      os << "-- deposit round " << group << " --\n";
    }
    os << "(" << spec.ssid << ") P" << spec.sender << " --[" << spec.amount << ", "
       << spec.claim_label << "]{" << spec.claim_predicate.to_string() << "}--> P"
       << spec.receiver;
    if (spec.refund_predicate)
      os << "  refund[" << spec.refund_label << "]{" << spec.refund_predicate->to_string()
         << "}";
    os << "\n";
  }
  return os.str();
}

}  // namespace fairrecon::protocols
