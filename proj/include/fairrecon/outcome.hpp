#pragma once

#include <cstdint>
#include <vector>

#include "fairrecon/settlement.hpp"

namespace fairrecon::engine {

struct LearnedOutputFlag {
  /// True iff every honest party's token ended up in the public transcript;
  /// corrupted tokens are known to the coalition by definition.
  bool adversary_learned = false;
  /// Per party: all n tokens public by protocol end. Only meaningful for
  /// honest indices.
  std::vector<bool> honest_learned;
};

struct ExecutionOutcome {
  std::vector<std::int64_t> net_balances;  // index i-1 for party i
  LearnedOutputFlag learned;
  int rounds_used = 0;  // distinct rounds containing a party-initiated event
  int calls_used = 0;   // deposits actually opened
  std::vector<settlement::LedgerEvent> trace;

  settlement::WitnessRef public_final;
  bool deposit_phase_complete = false;
  int aggregator_step3_refunds = 0;  // refunds by party n-1 on step-3 deposits
  bool conservation_ok = true;

  std::int64_t net(settlement::PartyId p) const { return net_balances[p - 1]; }
};

}  // namespace fairrecon::engine
