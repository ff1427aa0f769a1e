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


#include <benchmark/benchmark.h>

#include <map>

#include "caia/attack.h"
#include "caia/simulator.h"

namespace caia {
namespace {

ScenarioConfig Config(std::size_t classes) {
  ScenarioConfig c;
  c.num_classes = classes;
  c.attribute = AttributeSpace("hair_color", {"black", "blond", "brown", "gray"});
  c.num_tuples = 100;
  c.seed = 1;
  return c;
}

class MemorySource : public LogitSource {
 public:
  explicit MemorySource(const Scenario& s) : num_classes_(s.num_classes()) {
    for (const auto& id : s.TupleIds()) {
      for (const auto& v : s.attribute().values()) rows_[{id, v}] = s.Logits(id, v);
    }
  }
  std::size_t num_classes() override { return num_classes_; }
  FetchResult Fetch(std::span<const LogitRequest> requests) override {
    FetchResult r;
    for (const auto& q : requests) r.rows.emplace_back(rows_.at({q.tuple_id, q.value}));
    return r;
  }

 private:
  std::size_t num_classes_;
  std::map<std::pair<std::string, std::string>, std::vector<double>> rows_;
};

void BM_RunAttackInMemory(benchmark::State& state) {
  const auto scenario = Scenario::Generate(Config(state.range(0)));
  MemorySource source(scenario);
  const auto set = scenario.AttackSet();
  for (auto _ : state) {
    benchmark::DoNotOptimize(RunAttack(set, source, scenario.attribute()));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * 100);
}
BENCHMARK(BM_RunAttackInMemory)->Arg(100)->Arg(500)->Unit(benchmark::kMillisecond);

void BM_RelativeAdvantage(benchmark::State& state) {
  std::vector<double> logits = {2.18, 1.50, 2.35, 0.90};
  std::vector<double> out(4);
  for (auto _ : state) {
    RelativeAdvantageInto(logits, out);
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_RelativeAdvantage);

void BM_SimulatorRow(benchmark::State& state) {
  const auto scenario = Scenario::Generate(Config(state.range(0)));
  std::vector<double> row(state.range(0));
  for (auto _ : state) {
    scenario.LogitsInto("t00042", 2, row);
    benchmark::DoNotOptimize(row.data());
  }
}
BENCHMARK(BM_SimulatorRow)->Arg(100)->Arg(1000);

}  // namespace
}  // namespace caia

BENCHMARK_MAIN();
