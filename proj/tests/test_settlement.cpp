#include <doctest.h>

#include "fairrecon/settlement.hpp"

using namespace fairrecon;
using namespace fairrecon::settlement;

namespace {

struct Fixture {
  pubnmss::DealerOutput dealer;
  PredicateContext ctx;

  explicit Fixture(int n, bool equiv = false)
      : dealer(pubnmss::deal_output(Bytes(8, 0x42), n, equiv, {.seed = 17}).expect("deal")),
        ctx(&dealer.pub) {}

  Witness tokens_of(std::initializer_list<PartyId> parties) const {
    Witness w;
    for (PartyId p : parties) w.tokens[p] = dealer.tokens[p - 1];
    return w;
  }
  Witness share_of(int index) const {
    Witness w;
    w.shares[index] = dealer.threshold_shares[index - 1];
    return w;
  }
};

}  // namespace

TEST_CASE("open_deposit debits the sender and rejects bad requests") {
  Fixture fx(4);
  Ledger ledger(4, {5, 0, 0, 0}, &fx.ctx);
  ledger.begin_round(1);

  auto ssid = ledger.open_deposit(1, 1, 4, 5, Predicate::tokens({1, 2, 3, 4}), 8,
                                  std::nullopt);
  REQUIRE(ssid.ok());
  CHECK(ledger.wallets()[0] == 0);
  CHECK(ledger.net_balance(1).value() == -5);
  CHECK(ledger.find(1)->status == DepositStatus::Open);

  // Empty wallet now.
  auto broke = ledger.open_deposit(2, 1, 4, 1, Predicate::tokens({1}), 8, std::nullopt);
  REQUIRE_FALSE(broke.ok());
  CHECK(broke.error() == LedgerError::InsufficientFunds);

  auto dup = ledger.open_deposit(1, 1, 4, 0, Predicate::tokens({1}), 8, std::nullopt);
  REQUIRE_FALSE(dup.ok());
  CHECK(dup.error() == LedgerError::DuplicateSsid);

  ledger.begin_round(9);
  auto late = ledger.open_deposit(3, 2, 3, 0, Predicate::tokens({1}), 8, std::nullopt);
  REQUIRE_FALSE(late.ok());
  CHECK(late.error() == LedgerError::DeadlineInPast);

  // CRG refund deadline must sit strictly after the claim deadline.
  ledger.begin_round(9);
  auto bad_window = ledger.open_deposit(4, 2, 3, 0, Predicate::tokens({1}), 10,
                                        std::make_pair(Predicate::secret_share(1), 10));
  REQUIRE_FALSE(bad_window.ok());
  CHECK(bad_window.error() == LedgerError::DeadlineInPast);
}

TEST_CASE("claim pays the receiver and publishes the witness") {
  Fixture fx(4);
  Ledger ledger(4, {10, 10, 10, 10}, &fx.ctx);
  ledger.begin_round(1);
  ledger.open_deposit(1, 3, 2, 3, Predicate::tokens({3, 2}), 4, std::nullopt)
      .expect("open");

  ledger.begin_round(4);
  SUBCASE("wrong claimer") {
    auto res = ledger.claim(1, 1, fx.tokens_of({3, 2}), 4);
    REQUIRE_FALSE(res.ok());
    CHECK(res.error() == LedgerError::NotReceiver);
  }
  SUBCASE("forged token") {
    Witness w = fx.tokens_of({3, 2});
    w.tokens[3].share[0] ^= 1;
    auto res = ledger.claim(1, 2, w, 4);
    REQUIRE_FALSE(res.ok());
    CHECK(res.error() == LedgerError::PredicateFailed);
  }
  SUBCASE("missing token") {
    auto res = ledger.claim(1, 2, fx.tokens_of({2}), 4);
    REQUIRE_FALSE(res.ok());
    CHECK(res.error() == LedgerError::PredicateFailed);
  }
  SUBCASE("good claim") {
    auto res = ledger.claim(1, 2, fx.tokens_of({3, 2}), 4);
    REQUIRE(res.ok());
    CHECK(res.value() == 3);
    CHECK(ledger.net_balance(2).value() == 3);
    CHECK(ledger.net_balance(3).value() == -3);
    // Published this round: adversary view sees it now, honest view next round.
    CHECK(ledger.public_items_upto(4).tokens == (bit_of(2) | bit_of(3)));
    CHECK(ledger.public_items_before(4).tokens == 0u);
    CHECK(ledger.public_items_before(5).tokens == (bit_of(2) | bit_of(3)));

    auto again = ledger.claim(1, 2, fx.tokens_of({3, 2}), 4);
    REQUIRE_FALSE(again.ok());
    CHECK(again.error() == LedgerError::NotOpen);
  }
  SUBCASE("deadline passed") {
    ledger.begin_round(5);
    auto res = ledger.claim(1, 2, fx.tokens_of({3, 2}), 5);
    REQUIRE_FALSE(res.ok());
    CHECK(res.error() == LedgerError::DeadlinePassed);
  }
}

TEST_CASE("claim-or-refund timeout path") {
  Fixture fx(3);
  Ledger ledger(3, {4, 4, 4}, &fx.ctx);
  ledger.begin_round(1);
  ledger.open_deposit(1, 1, 3, 4, Predicate::tokens({1, 2, 3}), 2, std::nullopt)
      .expect("open");

  ledger.begin_round(2);
  auto early = ledger.refund(1, 1, std::nullopt, 2);
  REQUIRE_FALSE(early.ok());
  CHECK(early.error() == LedgerError::TooEarly);

  ledger.begin_round(3);
  auto events = ledger.settle_expired(3);
  REQUIRE(events.size() == 1);
  CHECK(events[0].kind == EventKind::AutoRefund);
  CHECK(ledger.net_balance(1).value() == 0);
  CHECK(ledger.settle_expired(3).empty());  // idempotent within the round
}

TEST_CASE("claim-refund-or-give lifecycle") {
  Fixture fx(5, /*equiv=*/true);
  Ledger ledger(5, {0, 0, 0, 20, 0}, &fx.ctx);
  ledger.begin_round(1);
  // Aggregator deposit to middle party 1: claim T4&T1 by round 3, refund S1
  // by round 5, give afterwards.
  ledger.open_deposit(1, 4, 1, 4, Predicate::tokens({4, 1}), 3,
                      std::make_pair(Predicate::secret_share(1), 5))
      .expect("open");
  ledger.open_deposit(2, 4, 2, 4, Predicate::tokens({4, 2}), 3,
                      std::make_pair(Predicate::secret_share(2), 5))
      .expect("open");

  SUBCASE("refund requires the window and the share") {
    ledger.begin_round(3);
    auto early = ledger.refund(1, 4, fx.share_of(1), 3);
    REQUIRE_FALSE(early.ok());
    CHECK(early.error() == LedgerError::TooEarly);

    ledger.begin_round(5);
    auto missing = ledger.refund(1, 4, std::nullopt, 5);
    REQUIRE_FALSE(missing.ok());
    CHECK(missing.error() == LedgerError::PredicateFailed);

    auto wrong_share = ledger.refund(1, 4, fx.share_of(2), 5);
    REQUIRE_FALSE(wrong_share.ok());
    CHECK(wrong_share.error() == LedgerError::PredicateFailed);

    auto good = ledger.refund(1, 4, fx.share_of(1), 5);
    REQUIRE(good.ok());
    CHECK(ledger.net_balance(4).value() == -4);  // one of two deposits back
    CHECK(ledger.public_items_upto(5).shares == bit_of(1));

    // The second deposit was not refunded; it resolves by give.
    ledger.begin_round(6);
    auto settled = ledger.settle_expired(6);
    REQUIRE(settled.size() == 1);
    CHECK(settled[0].kind == EventKind::Give);
    CHECK(ledger.net_balance(2).value() == 4);
  }

  SUBCASE("give requires the refund window to close") {
    ledger.begin_round(5);
    auto early = ledger.give(1, 5);
    REQUIRE_FALSE(early.ok());
    CHECK(early.error() == LedgerError::TooEarly);
    ledger.begin_round(6);
    auto good = ledger.give(1, 6);
    REQUIRE(good.ok());
    CHECK(ledger.net_balance(1).value() == 4);
  }

  SUBCASE("give on a plain claim-or-refund record") {
    ledger.begin_round(1);
    ledger.open_deposit(3, 4, 3, 1, Predicate::tokens({3}), 2, std::nullopt).expect("open");
    ledger.begin_round(3);
    auto res = ledger.give(3, 3);
    REQUIRE_FALSE(res.ok());
    CHECK(res.error() == LedgerError::NotCrg);
  }
}

TEST_CASE("conservation and single resolution hold across a mixed scenario") {
  Fixture fx(4);
  Ledger ledger(4, {10, 10, 10, 10}, &fx.ctx);
  ledger.begin_round(1);
  ledger.open_deposit(1, 1, 2, 3, Predicate::tokens({2}), 2, std::nullopt).expect("open");
  ledger.open_deposit(2, 2, 3, 5, Predicate::tokens({3}), 3, std::nullopt).expect("open");
  ledger.open_deposit(3, 3, 4, 2, Predicate::tokens({1, 2, 3, 4}), 4, std::nullopt)
      .expect("open");
  CHECK(ledger.conservation_holds());

  ledger.begin_round(2);
  ledger.claim(1, 2, fx.tokens_of({2}), 2).expect("claim");
  CHECK(ledger.conservation_holds());
  ledger.settle_expired(2);

  ledger.begin_round(3);
  ledger.settle_expired(3);  // deposit 2 unclaimed? deadline 3 still open
  CHECK(ledger.conservation_holds());

  ledger.begin_round(4);
  ledger.settle_expired(4);  // deposit 2 auto-refunds here
  CHECK(ledger.find(2)->status == DepositStatus::Refunded);

  ledger.begin_round(5);
  ledger.settle_expired(5);
  CHECK(ledger.all_resolved());
  CHECK(ledger.conservation_holds());

  std::int64_t net_sum = 0;
  for (int p = 1; p <= 4; ++p) net_sum += ledger.net_balance(p).value();
  CHECK(net_sum == 0);

  CHECK_FALSE(ledger.net_balance(9).ok());
}

TEST_CASE("witness publication is monotone") {
  Fixture fx(3);
  Ledger ledger(3, {5, 5, 5}, &fx.ctx);
  ledger.begin_round(1);
  ledger.open_deposit(1, 1, 2, 1, Predicate::tokens({2}), 1, std::nullopt).expect("open");
  ledger.claim(1, 2, fx.tokens_of({2}), 1).expect("claim");
  auto published = ledger.public_items_final().tokens;
  ledger.begin_round(2);
  ledger.settle_expired(2);
  ledger.begin_round(7);
  ledger.settle_expired(7);
  CHECK(ledger.public_items_final().tokens == published);
}
