#include <algorithm>
#include <vector>

#include "doctest.h"
#include "gabs/core/attention.hpp"
#include "gabs/core/rng.hpp"

using namespace gabs;

namespace {

// Random valid attention row: positive entries normalized to sum 1.
std::vector<double> random_row(SplitMix64& rng, int n) {
  std::vector<double> row(n);
  double sum = 0.0;
  for (double& x : row) {
    x = rng.uniform(1e-3, 1.0);
    sum += x;
  }
  for (double& x : row) x /= sum;
  return row;
}

}  // namespace

TEST_CASE("validate_distribution accepts normalized rows") {
  CHECK_NOTHROW(validate_distribution(std::vector<double>{1.0}));
  CHECK_NOTHROW(validate_distribution(std::vector<double>{0.5, 0.5}));
}

TEST_CASE("validate_distribution rejects bad rows") {
  CHECK_THROWS_AS(validate_distribution(std::vector<double>{}), InvalidInputError);
  CHECK_THROWS_AS(validate_distribution(std::vector<double>{-0.1, 1.1}), NegativeEntryError);
  try {
    validate_distribution(std::vector<double>{0.6, 0.5});
    FAIL("expected NotNormalizedError");
  } catch (const NotNormalizedError& e) {
    CHECK(e.sum() == doctest::Approx(1.1));
  }
}

TEST_CASE("accumulate_attention adds one row") {
  const AttentionLedger empty = AttentionLedger::zeros(2);
  const AttentionLedger one = accumulate_attention(empty, std::vector<double>{0.3, 0.7});
  CHECK(one.local[0] == doctest::Approx(0.3));
  CHECK(one.local[1] == doctest::Approx(0.7));
  CHECK(one.total == doctest::Approx(1.0));

  const AttentionLedger a = accumulate_attention(empty, std::vector<double>{1.0, 0.0});
  const AttentionLedger b = accumulate_attention(a, std::vector<double>{0.0, 1.0});
  CHECK(b.local[0] == doctest::Approx(1.0));
  CHECK(b.local[1] == doctest::Approx(1.0));
  CHECK(b.total == doctest::Approx(2.0));

  const AttentionLedger prior{{0.25, 0.75}, 1.0};
  const AttentionLedger next = accumulate_attention(prior, std::vector<double>{0.5, 0.5});
  CHECK(next.local[0] == doctest::Approx(0.75));
  CHECK(next.local[1] == doctest::Approx(1.25));
  CHECK(next.total == doctest::Approx(2.0));
}

TEST_CASE("accumulate_attention checks the row") {
  const AttentionLedger empty = AttentionLedger::zeros(2);
  CHECK_THROWS_AS(accumulate_attention(empty, std::vector<double>{0.3, 0.3, 0.4}),
                  LengthMismatchError);
  CHECK_THROWS_AS(accumulate_attention(empty, std::vector<double>{0.9, 0.3}), NotNormalizedError);
}

TEST_CASE("ledger total equals the row count") {
  SplitMix64 rng(41);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + static_cast<int>(rng.next() % 6);
    const int steps = 1 + static_cast<int>(rng.next() % 20);
    AttentionLedger ledger = AttentionLedger::zeros(n);
    for (int t = 0; t < steps; ++t) ledger = accumulate_attention(ledger, random_row(rng, n));
    CHECK(std::abs(ledger.total - steps) <= 1e-9);
    double sum = 0.0;
    for (double x : ledger.local) sum += x;
    CHECK(std::abs(sum - steps) <= 1e-6 * steps);
  }
}

TEST_CASE("accumulation is order independent") {
  SplitMix64 rng(42);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 3;
    std::vector<std::vector<double>> rows;
    for (int t = 0; t < 8; ++t) rows.push_back(random_row(rng, n));
    AttentionLedger forward = AttentionLedger::zeros(n);
    for (const auto& row : rows) forward = accumulate_attention(forward, row);
    std::reverse(rows.begin(), rows.end());
    AttentionLedger backward = AttentionLedger::zeros(n);
    for (const auto& row : rows) backward = accumulate_attention(backward, row);
    for (int i = 0; i < n; ++i) CHECK(std::abs(forward.local[i] - backward.local[i]) <= 1e-9);
    CHECK(forward.total == backward.total);
  }
}

TEST_CASE("global attention construction") {
  const GlobalAttention g = GlobalAttention::from_values({1.2, 0.8, 0.5});
  CHECK(g.optimal_length == doctest::Approx(2.5));
  CHECK_THROWS_AS(GlobalAttention::from_values({0.5, -0.1}), NegativeEntryError);
}

TEST_CASE("source document validation") {
  SourceDocument empty;
  CHECK_THROWS_AS(empty.validate(), InvalidInputError);
  SourceDocument ragged{{0, 1}, std::vector<std::vector<double>>{{1.0, 2.0}, {3.0}}};
  CHECK_THROWS_AS(ragged.validate(), DimensionMismatchError);
  SourceDocument short_features{{0, 1}, std::vector<std::vector<double>>{{1.0}}};
  CHECK_THROWS_AS(short_features.validate(), LengthMismatchError);
}
