// Copyright 2026 The caia Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "caia/attack.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "caia/errors.h"
#include "oracles.h"
#include "test_util.h"

namespace caia {
namespace {

using testing::Gender;
using testing::HairColor;
using testing::MakeTuple;
using testing::MapLogitSource;

TEST(RelativeAdvantageTest, WorkedHairColorTuple) {
  const auto adv = RelativeAdvantage(
      {{"black", 2.18}, {"blond", 1.50}, {"brown", 2.35}, {"gray", 0.90}},
      HairColor());
  ASSERT_EQ(adv.size(), 4u);
  EXPECT_EQ(adv[0], 0.0);
  EXPECT_EQ(adv[1], 0.0);
  EXPECT_NEAR(adv[2], 0.17, 1e-12);
  EXPECT_EQ(adv[3], 0.0);
}

TEST(RelativeAdvantageTest, TiedMaximumGivesZeros) {
  const AttributeSpace space("x", {"a", "b", "c", "d"});
  const auto adv =
      RelativeAdvantage({{"a", 1.0}, {"b", 1.0}, {"c", 1.0}, {"d", 1.0}}, space);
  EXPECT_EQ(adv, AdvantageVector(4, 0.0));
}

TEST(RelativeAdvantageTest, PartialTieAtTopGivesZeros) {
  const AttributeSpace space("x", {"a", "b", "c"});
  const auto adv = RelativeAdvantage({{"a", 3.0}, {"b", -1.0}, {"c", 3.0}}, space);
  EXPECT_EQ(adv, AdvantageVector(3, 0.0));
}

TEST(RelativeAdvantageTest, NegativeLogits) {
  const auto adv = RelativeAdvantage({{"female", -1.0}, {"male", -0.5}}, Gender());
  EXPECT_EQ(adv, (AdvantageVector{0.0, 0.5}));
}

TEST(RelativeAdvantageTest, MissingValueIsMalformed) {
  try {
    RelativeAdvantage({{"female", 1.0}}, Gender());
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kMalformedTuple);
    EXPECT_NE(std::string(e.what()).find("male"), std::string::npos);
  }
}

TEST(RelativeAdvantageTest, NonFiniteLogitIsMalformed) {
  try {
    RelativeAdvantage(
        {{"female", 1.0}, {"male", std::numeric_limits<double>::quiet_NaN()}},
        Gender());
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kMalformedTuple);
    EXPECT_NE(std::string(e.what()).find("'male'"), std::string::npos);
  }
  EXPECT_THROW(RelativeAdvantage({{"female", INFINITY}, {"male", 0.0}}, Gender()),
               Error);
}

// Random logits drawn partly from a coarse grid so ties occur often.
std::vector<double> RandomLogits(std::mt19937_64& gen, std::size_t k) {
  std::normal_distribution<double> normal(0.0, 3.0);
  std::uniform_int_distribution<int> coarse(-2, 2);
  const bool grid = gen() % 4 == 0;
  std::vector<double> x(k);
  for (auto& v : x) v = grid ? coarse(gen) : normal(gen);
  return x;
}

TEST(RelativeAdvantagePropertyTest, MatchesBruteForceBitwise) {
  std::mt19937_64 gen(20240517);
  for (std::size_t k : {2u, 3u, 4u, 8u}) {
    std::vector<double> out(k);
    for (int n = 0; n < 10000; ++n) {
      const auto logits = RandomLogits(gen, k);
      RelativeAdvantageInto(logits, out);
      const auto expected = oracles::BruteForceAdvantage(logits);
      for (std::size_t z = 0; z < k; ++z) {
        ASSERT_EQ(std::bit_cast<std::uint64_t>(out[z]),
                  std::bit_cast<std::uint64_t>(expected[z]))
            << "k=" << k << " case " << n << " z=" << z;
      }
    }
  }
}

TEST(RelativeAdvantagePropertyTest, SparseAndNonnegative) {
  std::mt19937_64 gen(7);
  std::vector<double> out(8);
  for (int n = 0; n < 5000; ++n) {
    RelativeAdvantageInto(RandomLogits(gen, 8), out);
    EXPECT_LE(std::count_if(out.begin(), out.end(), [](double v) { return v != 0.0; }),
              1);
    for (double v : out) EXPECT_GE(v, 0.0);
  }
}

TEST(RelativeAdvantagePropertyTest, ShiftInvariant) {
  std::mt19937_64 gen(11);
  std::vector<double> base(4), shifted_out(4);
  for (int n = 0; n < 2000; ++n) {
    // Dyadic values keep the shifted differences exact.
    std::uniform_int_distribution<int> q(-64, 64);
    std::vector<double> logits(4);
    for (auto& v : logits) v = q(gen) / 8.0;
    const double c = q(gen) / 4.0;
    std::vector<double> shifted = logits;
    for (auto& v : shifted) v += c;
    RelativeAdvantageInto(logits, base);
    RelativeAdvantageInto(shifted, shifted_out);
    EXPECT_EQ(base, shifted_out);
  }
}

TEST(AdvantageTableTest, AccumulateIsElementwiseSum) {
  AdvantageTable table(3, 4);
  table.Accumulate(0, std::vector<double>{0, 0, 0.17, 0});
  EXPECT_EQ(std::vector<double>(table.row(0).begin(), table.row(0).end()),
            (std::vector<double>{0, 0, 0.17, 0}));
  table.Accumulate(0, std::vector<double>{0.03, 0, 0, 0});
  EXPECT_EQ(std::vector<double>(table.row(0).begin(), table.row(0).end()),
            (std::vector<double>{0.03, 0, 0.17, 0}));
  EXPECT_EQ(table.row(1)[0], 0.0);
}

TEST(AdvantageTableTest, RepeatedAdditionIsExact) {
  AdvantageTable table(1, 2);
  for (int i = 0; i < 64; ++i) table.Accumulate(0, std::vector<double>{0.25, 0.0});
  EXPECT_EQ(table.row(0)[0], 16.0);
}

TEST(AdvantageTableTest, OutOfRangeClass) {
  AdvantageTable table(2, 2);
  try {
    table.Accumulate(2, std::vector<double>{1, 0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kIndex);
  }
}

AdvantageTable TableWithRow(std::vector<double> row) {
  AdvantageTable table(1, row.size());
  table.Accumulate(0, row);
  table.CountTuple();
  return table;
}

TEST(PredictTest, Argmax) {
  const auto p = Predict(TableWithRow({0.3, 0.1, 1.2, 0.0}), HairColor());
  ASSERT_EQ(p.size(), 1u);
  EXPECT_EQ(p[0].predicted_value, "brown");
  EXPECT_FALSE(p[0].tie);
}

TEST(PredictTest, AllZeroIsTieOnFirstValue) {
  const auto p = Predict(TableWithRow({0, 0, 0, 0}), HairColor());
  EXPECT_EQ(p[0].predicted_value, "black");
  EXPECT_TRUE(p[0].tie);
}

TEST(PredictTest, TwoWayTieLowestIndex) {
  const auto p = Predict(TableWithRow({5.0, 5.0}), Gender());
  EXPECT_EQ(p[0].predicted_value, "female");
  EXPECT_EQ(p[0].predicted_index, 0u);
  EXPECT_TRUE(p[0].tie);
}

TEST(PredictTest, EmptyTableIsEmptyAttackSet) {
  AdvantageTable table(3, 2);
  try {
    Predict(table, Gender());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kEmptyAttackSet);
  }
}

TEST(PredictPropertyTest, PermutationEquivariance) {
  std::mt19937_64 gen(3);
  const std::vector<std::string> labels = {"a", "b", "c", "d"};
  std::uniform_int_distribution<int> coarse(0, 3);
  for (int n = 0; n < 500; ++n) {
    std::vector<std::size_t> perm = {0, 1, 2, 3};
    std::shuffle(perm.begin(), perm.end(), gen);
    std::vector<std::string> permuted_labels(4);
    std::vector<double> totals(4), permuted(4);
    for (auto& t : totals) t = coarse(gen);
    for (std::size_t i = 0; i < 4; ++i) {
      permuted_labels[i] = labels[perm[i]];
      permuted[i] = totals[perm[i]];
    }
    const auto a = Predict(TableWithRow(totals), AttributeSpace("x", labels))[0];
    const auto b =
        Predict(TableWithRow(permuted), AttributeSpace("x", permuted_labels))[0];
    EXPECT_EQ(a.tie, b.tie);
    if (!a.tie) {
      EXPECT_EQ(a.predicted_value, b.predicted_value);
    }
    // Totals follow the labels.
    for (std::size_t i = 0; i < 4; ++i) {
      EXPECT_EQ(b.advantage_totals[i], a.advantage_totals[perm[i]]);
    }
  }
}

TEST(RunAttackTest, NoiseFreeSingleTuple) {
  const auto space = HairColor();
  // Class y carries value y % 4; its logit is 1 on that value's image.
  MapLogitSource source(8);
  for (std::size_t z = 0; z < 4; ++z) {
    std::vector<double> row(8, 0.0);
    for (std::size_t y = 0; y < 8; ++y) row[y] = y % 4 == z ? 1.0 : 0.0;
    source.Set("t0", space.value(z), row);
  }
  const std::vector<AttackTuple> set = {MakeTuple("t0", space)};
  const auto result = RunAttack(set, source, space);
  ASSERT_EQ(result.predictions.size(), 8u);
  for (const auto& p : result.predictions) {
    EXPECT_EQ(p.predicted_index, p.class_id % 4);
    EXPECT_FALSE(p.tie);
  }
}

TEST(RunAttackTest, QueriesEachImageOnce) {
  const auto space = Gender();
  MapLogitSource source(50);
  std::vector<AttackTuple> set;
  for (int t = 0; t < 3; ++t) {
    const std::string id = "t" + std::to_string(t);
    source.Set(id, "female", std::vector<double>(50, 1.0));
    source.Set(id, "male", std::vector<double>(50, 0.0));
    set.push_back(MakeTuple(id, space));
  }
  RunAttack(set, source, space);
  EXPECT_EQ(source.served(), 3u * 2u);
}

TEST(RunAttackTest, SampleLimitUsesFirstIdsInOrder) {
  const auto space = Gender();
  MapLogitSource source(1);
  std::vector<AttackTuple> set;
  // Inserted in descending order; t0 and t1 favor female, t2 favors male.
  for (int t = 2; t >= 0; --t) {
    const std::string id = "t" + std::to_string(t);
    source.Set(id, "female", {t == 2 ? 0.0 : 1.0});
    source.Set(id, "male", {t == 2 ? 5.0 : 0.0});
    set.push_back(MakeTuple(id, space));
  }
  AttackOptions opts;
  opts.sample_limit = 2;
  const auto result = RunAttack(set, source, space, opts);
  EXPECT_EQ(result.used_tuple_ids, (std::vector<std::string>{"t0", "t1"}));
  EXPECT_EQ(result.predictions[0].predicted_value, "female");
  EXPECT_EQ(result.predictions[0].advantage_totals[0], 2.0);

  opts.sample_limit = 0;
  EXPECT_THROW(RunAttack(set, source, space, opts), Error);
  opts.sample_limit = 4;
  EXPECT_THROW(RunAttack(set, source, space, opts), Error);
}

TEST(RunAttackTest, TupleWithMissingRowIsSkippedWhole) {
  const auto space = Gender();
  MapLogitSource source(1);
  source.Set("t0", "female", {3.0});
  source.Set("t0", "male", {0.0});
  source.Set("t1", "male", {100.0});  // female row missing
  const std::vector<AttackTuple> set = {MakeTuple("t0", space),
                                        MakeTuple("t1", space)};
  const auto result = RunAttack(set, source, space);
  ASSERT_EQ(result.skipped.size(), 1u);
  EXPECT_EQ(result.skipped[0].tuple_id, "t1");
  EXPECT_EQ(result.table.tuples_seen(), 1u);
  EXPECT_EQ(result.predictions[0].advantage_totals, (std::vector<double>{3.0, 0.0}));
}

TEST(RunAttackTest, AllSkippedIsEmptyAttackSet) {
  const auto space = Gender();
  MapLogitSource source(1);
  const std::vector<AttackTuple> set = {MakeTuple("t0", space)};
  try {
    RunAttack(set, source, space);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kEmptyAttackSet);
  }
  try {
    RunAttack({}, source, space);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kEmptyAttackSet);
  }
}

TEST(RunAttackTest, RowLengthMismatchIsProtocolError) {
  const auto space = Gender();
  MapLogitSource source(3);
  source.Set("t0", "female", {1.0, 2.0, 3.0});
  source.Set("t0", "male", {1.0, 2.0});
  const std::vector<AttackTuple> set = {MakeTuple("t0", space)};
  try {
    RunAttack(set, source, space);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kProtocol);
  }
}

TEST(RunAttackTest, RejectsMalformedAttackSets) {
  const auto space = Gender();
  MapLogitSource source(1);
  auto t = MakeTuple("t0", space);
  t.images.erase("male");
  const std::vector<AttackTuple> missing = {t};
  EXPECT_THROW(RunAttack(missing, source, space), Error);
  const std::vector<AttackTuple> dup = {MakeTuple("t0", space), MakeTuple("t0", space)};
  EXPECT_THROW(RunAttack(dup, source, space), Error);
}

TEST(RunAttackTest, DeterministicAcrossInputOrder) {
  const auto space = HairColor();
  std::mt19937_64 gen(5);
  std::normal_distribution<double> normal;
  MapLogitSource source(20);
  std::vector<AttackTuple> set;
  for (int t = 0; t < 30; ++t) {
    const std::string id = "t" + std::to_string(100 + t);
    for (const auto& v : space.values()) {
      std::vector<double> row(20);
      for (auto& x : row) x = normal(gen);
      source.Set(id, v, row);
    }
    set.push_back(MakeTuple(id, space));
  }
  const auto a = RunAttack(set, source, space);
  std::reverse(set.begin(), set.end());
  const auto b = RunAttack(set, source, space);
  EXPECT_EQ(a.table, b.table);
  EXPECT_EQ(a.predictions, b.predictions);
}

}  // namespace
}  // namespace caia
