// Acceptance suite: every criterion below runs exactly as stated, prints one
// verdict line, and the process exits nonzero if any fails.

#include <array>
#include <chrono>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "fairrecon/adversary.hpp"
#include "fairrecon/bitcoin.hpp"
#include "fairrecon/engine.hpp"
#include "fairrecon/protocols.hpp"

using namespace fairrecon;
using protocols::VariantTag;
using settlement::CoinAmount;

namespace {

int g_failures = 0;

void criterion(int id, bool pass, const std::string& what) {
  std::printf("criterion %2d: %s  %s\n", id, pass ? "PASS" : "FAIL", what.c_str());
  if (!pass) ++g_failures;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2fs", v);
  return buf;
}

}  // namespace

int main() {
  const CoinAmount q = 2;

  // 1. Exact round/broadcast counts for the ladder and aggregator protocols.
  {
    auto start = std::chrono::steady_clock::now();
    bool pass = true;
    for (int n = 3; n <= 10; ++n) {
      auto bkn = protocols::build({VariantTag::BKn}, n, q).expect("bkn");
      auto ours = protocols::build({VariantTag::Ours}, n, q).expect("ours");
      auto dealer =
          pubnmss::deal_output(Bytes(16, 0x31), n, false, {.seed = 1}).expect("dealer");
      auto run_bkn = adversary::execute(bkn, {}, dealer).expect("run");
      auto run_ours = adversary::execute(ours, {}, dealer).expect("run");
      pass = pass && run_bkn.rounds_used == 2 * n && run_bkn.calls_used == 2 * n - 2;
      pass = pass && run_ours.rounds_used == 8 && run_ours.calls_used == 3 * n - 4;
    }
    double elapsed = seconds_since(start);
    criterion(1, pass && elapsed < 1.0,
              "honest counts (2n, 2n-2) and (8, 3n-4) for n in 3..10, " + fmt(elapsed));
  }

  // 2. Exact deposit bounds.
  {
    bool pass = true;
    for (int n = 3; n <= 10; ++n) {
      auto bkn = protocols::build({VariantTag::BKn}, n, q).expect("bkn");
      pass = pass && protocols::max_deposit(bkn, n).value() ==
                         static_cast<CoinAmount>(n - 1) * q;
      auto ours = protocols::build({VariantTag::Ours}, n, q).expect("ours");
      pass = pass && protocols::max_deposit(ours, n - 1).value() ==
                         static_cast<CoinAmount>((n - 1) * (n - 2) + 1) * q;
    }
    for (int n : {6, 8, 10}) {
      auto red = protocols::build({VariantTag::OursReduced, 1}, n, q).expect("red");
      pass = pass && protocols::max_deposit(red, n - 1).value() ==
                         static_cast<CoinAmount>((n - 1) * (n - 2) / 2 + 1) * q;
    }
    criterion(2, pass, "max deposits (n-1)q, ((n-1)(n-2)+1)q, ((n-1)(n-2)/2+1)q");
  }

  // 3, 4, 6, 11. Exhaustive sweep over every corrupted set and schedule.
  std::map<std::string, engine::AuditReport> reports;
  double sweep_seconds = 0;
  {
    auto start = std::chrono::steady_clock::now();
    engine::AuditOptions options;
    options.jobs = 2;
    auto sweep = [&](VariantTag tag, int n, int layers = 1) {
      protocols::ProtocolVariant v{tag, layers};
      auto report = engine::audit(v, n, q, options).expect("audit");
      reports[v.name() + "/" + std::to_string(n)] = report;
    };
    sweep(VariantTag::BK2, 2);
    for (int n = 3; n <= 6; ++n) sweep(VariantTag::BKn, n);
    for (int n = 3; n <= 6; ++n) sweep(VariantTag::Ours, n);
    sweep(VariantTag::OursReduced, 6);
    for (int n = 3; n <= 6; ++n) sweep(VariantTag::OursEquiv, n);
    sweep_seconds = seconds_since(start);

    std::uint64_t a_failures = 0, b_star_failures = 0, schedules = 0;
    for (const auto& [key, report] : reports) {
      a_failures += report.a_failure_count;
      b_star_failures += report.b_star_failure_count;
      schedules += report.schedules_executed;
    }
    criterion(3, a_failures == 0 && sweep_seconds < 60.0,
              "condition (A) exhaustive, " + std::to_string(schedules) + " schedules, " +
                  fmt(sweep_seconds));
    criterion(4, b_star_failures == 0, "condition (B*) exhaustive over the same sweep");
  }

  // 5. The non-equivalence witness at n = 5 with two middle aborters.
  {
    const auto& report = reports.at("Ours/5");
    CoinAmount expected =
        engine::aggregator_compensation(5, 2, q).expect("compensation");
    bool witnessed = false;
    for (const auto& f : report.b_equal_failures) {
      bool aggregator_matches =
          f.net_balances[3] == static_cast<std::int64_t>(expected);
      bool others_q = true;
      std::set<settlement::PartyId> corrupted(f.corrupted.begin(), f.corrupted.end());
      for (int p = 1; p <= 5; ++p)
        if (!corrupted.count(p) && p != 4)
          others_q = others_q && f.net_balances[p - 1] == static_cast<std::int64_t>(q);
      if (aggregator_matches && others_q) witnessed = true;
    }
    criterion(5, report.b_equal_failure_count > 0 && witnessed,
              "aggregator protocol non-equivalence witness: P4 nets 5q, others q");
  }

  // 6. Equalization: clean (B-equal) plus the double-refund clause.
  {
    bool pass = true;
    for (int n : {5, 6}) {
      const auto& report = reports.at("OursEquiv/" + std::to_string(n));
      pass = pass && report.b_equal_failure_count == 0;
      pass = pass && report.double_refund_runs > 0 && report.equalization_violations == 0;
    }
    criterion(6, pass, "equalizing variant: (B-equal) clean; double refunds pay n*q each");
  }

  // 7. Negative fixtures.
  {
    auto naive = protocols::build({VariantTag::Naive2}, 2, q).expect("naive");
    auto naive_dealer =
        pubnmss::deal_output(Bytes(16, 0x32), 2, false, {.seed = 3}).expect("dealer");
    auto steal = adversary::named_schedule("naive2_steal", 2).expect("schedule");
    auto naive_run = adversary::execute(naive, steal, naive_dealer).expect("run");
    auto naive_verdict = engine::check_condition_a(naive_run, {1});
    bool naive_ok = naive_run.net(1) == -static_cast<std::int64_t>(q) &&
                    !naive_verdict.pass && naive_verdict.offending == 1;

    auto merged = protocols::build({VariantTag::MergedTau34}, 4, q).expect("merged");
    auto merged_dealer =
        pubnmss::deal_output(Bytes(16, 0x33), 4, false, {.seed = 4}).expect("dealer");
    auto remark2 = adversary::named_schedule("remark2", 4).expect("schedule");
    auto merged_run = adversary::execute(merged, remark2, merged_dealer).expect("run");
    auto merged_verdict = engine::check_condition_a(merged_run, {4});
    bool merged_ok = merged_run.net(4) < 0 && !merged_verdict.pass &&
                     merged_verdict.offending == 4;

    criterion(7, naive_ok && merged_ok,
              "naive steal costs honest P1 exactly q; merged rounds cost honest Pn");
  }

  // 8. Minimality of the refill factor, with a brute-force cross-check.
  {
    bool pass = true;
    for (int n = 3; n <= 20; ++n) {
      int got = protocols::minimal_refill_factor(n);
      pass = pass && got == n - 2;
      int scanned = 0;
      for (int x = 1; x <= 40 && scanned == 0; ++x)
        if ((n - 2) * x > (n - 3) * (x + 1)) scanned = x;
      pass = pass && scanned == got;
      if (n >= 4) {
        int below = n - 3;
        pass = pass && !((n - 2) * below > (n - 3) * (below + 1));
      }
    }
    criterion(8, pass, "minimal refill factor equals n-2 for n in 3..20");
  }

  // 9. Realization equivalence and signature necessity.
  {
    auto start = std::chrono::steady_clock::now();
    auto dealer =
        pubnmss::deal_output(Bytes(16, 0x2e), 5, true, {.seed = 404}).expect("dealer");
    bitcoin::CrgParams params;
    params.amount = q;
    params.claim_predicate = settlement::Predicate::tokens({4, 1});
    params.refund_predicate = settlement::Predicate::secret_share(1);
    params.tau_claim = 4;
    params.tau_refund = 7;
    auto report = bitcoin::equivalence_test(dealer, params, 11);
    bool mutations =
        bitcoin::mutation_admits_steal(bitcoin::ScriptMutation::DropReceiverSig, dealer, 1) &&
        bitcoin::mutation_admits_steal(bitcoin::ScriptMutation::DropSenderSigRefund, dealer,
                                       2) &&
        bitcoin::mutation_admits_steal(bitcoin::ScriptMutation::DropSenderSigGive, dealer, 3);
    double elapsed = seconds_since(start);
    criterion(9, report.pass() && mutations && elapsed < 5.0,
              "realization equivalence over " + std::to_string(report.behaviors) +
                  " behaviors; all three signature deletions steal, " + fmt(elapsed));
  }

  // 10. Sharing-scheme properties at toy parameters.
  {
    bool pass = true;

    // n-of-n privacy: uniform completion counts for every strict subset.
    for (int n = 2; n <= 4 && pass; ++n) {
      auto dealt = pubnmss::deal_output({0x9d}, n, false,
                                        {.commit = {.randomness_bits = 8}, .seed = 6})
                       .expect("deal");
      for (std::uint32_t subset = 0; subset + 1 < (1u << n) && pass; ++subset) {
        std::uint8_t known = 0;
        int missing = 0;
        for (int i = 0; i < n; ++i) {
          if (subset & (1u << i))
            known ^= dealt.tokens[i].share[0];
          else
            ++missing;
        }
        std::array<std::uint64_t, 256> counts{};
        std::uint64_t total = 1ull << (8 * missing);
        for (std::uint64_t assign = 0; assign < total; ++assign) {
          std::uint8_t x = known;
          for (int b = 0; b < missing; ++b)
            x ^= static_cast<std::uint8_t>((assign >> (8 * b)) & 0xff);
          ++counts[x];
        }
        for (int s = 0; s < 256; ++s) pass = pass && counts[s] == total / 256;
      }
    }

    // Threshold-2 pairwise consistency over all pairs at n = 6.
    auto dealt = pubnmss::deal_output(Bytes(16, 0x44), 6, true, {.seed = 7}).expect("deal");
    for (std::size_t i = 0; i < dealt.threshold_shares.size(); ++i)
      for (std::size_t j = i + 1; j < dealt.threshold_shares.size(); ++j) {
        auto w = pubnmss::reconstruct_w(dealt.threshold_shares[i], dealt.threshold_shares[j],
                                        dealt.pub.share_commitments, dealt.pub.com_w,
                                        dealt.pub.com_w_decommitment, dealt.pub.prime);
        pass = pass && w.ok() && w.value() == dealt.w;
      }

    // Dealer pairs verify; single-bit flips never do at full hash width.
    for (int i = 0; i < 6 && pass; ++i) {
      pass = pass && pubnmss::verify_token(dealt.pub.tags[i], dealt.tokens[i]);
      for (std::size_t byte = 0; byte < dealt.tokens[i].share.size() && pass; ++byte)
        for (int bit = 0; bit < 8 && pass; ++bit) {
          auto flipped = dealt.tokens[i];
          flipped.share[byte] ^= static_cast<std::uint8_t>(1 << bit);
          pass = pass && !pubnmss::verify_token(dealt.pub.tags[i], flipped);
        }
    }
    criterion(10, pass, "sharing privacy, pairwise reconstruction, and tag binding");
  }

  // 11. Conservation across every audited execution.
  {
    bool pass = !reports.empty();
    std::uint64_t runs = 0;
    for (const auto& [key, report] : reports) {
      pass = pass && report.conservation_ok;
      runs += report.schedules_executed;
    }
    criterion(11, pass,
              "wallets plus open deposits conserved over " + std::to_string(runs) +
                  " executions");
  }

  std::printf("%s\n", g_failures == 0 ? "acceptance: all criteria passed"
                                      : "acceptance: FAILURES PRESENT");
  return g_failures == 0 ? 0 : 1;
}
