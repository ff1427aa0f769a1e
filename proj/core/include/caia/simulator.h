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

// Synthetic target model. Class y carries a hidden attribute value g(y); an
// attack image depicting value v of tuple t scores
//
//   logit[y] = b_y + mu * [v == g(y)] + d(t, v) + e(y, t, v)
//
// with b_y ~ N(0, base_std^2) per class, d ~ N(0, sigma_c^2) shared by every
// class (an editing artifact of that image), and e ~ N(0, sigma^2) i.i.d.
// All draws are keyed by (seed, indices), so any row can be recomputed in
// isolation and served without state.

#ifndef CAIA_SIMULATOR_H_
#define CAIA_SIMULATOR_H_

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "caia/attack.h"
#include "caia/attribute_space.h"
#include "caia/logit_source.h"

namespace caia {

// Name reported by a served simulator in /v1/metadata.
inline constexpr std::string_view kSimulatorModelName = "caia-sim/1";
// Image references of simulator attack sets: "sim:<tuple_id>/<value>".
inline constexpr std::string_view kSimulatorImageScheme = "sim:";

struct ScenarioConfig {
  std::size_t num_classes = 100;
  AttributeSpace attribute{"attribute", {"a", "b"}};
  double mu = 1.0;
  double sigma = 0.5;
  double sigma_c = 0.5;
  double base_std = 1.0;
  std::size_t num_tuples = 100;
  std::uint64_t seed = 0;
  // Synthetic attribute classifier: softmax(margin * onehot(v) + noise * N).
  double filter_margin = 3.0;
  double filter_noise = 1.0;
};

class Scenario {
 public:
  // Throws kConfiguration when num_classes is not a multiple of k, a scale is
  // negative, or num_tuples is zero.
  static Scenario Generate(ScenarioConfig config);

  const ScenarioConfig& config() const { return config_; }
  const AttributeSpace& attribute() const { return config_.attribute; }
  std::size_t num_classes() const { return config_.num_classes; }

  std::size_t TruthIndex(std::size_t class_id) const {
    return truth_.at(class_id);
  }
  const std::string& TruthValue(std::size_t class_id) const {
    return config_.attribute.value(truth_.at(class_id));
  }
  const std::vector<std::size_t>& truth() const { return truth_; }

  // Throws kDomain for a value outside the attribute space.
  std::vector<double> Logits(std::string_view tuple_id,
                             std::string_view value) const;
  void LogitsInto(std::string_view tuple_id, std::size_t value_index,
                  std::span<double> out) const;

  // Softmax scores of the synthetic attribute classifier for the image of
  // (tuple_id, value).
  std::vector<double> AttributeScores(std::string_view tuple_id,
                                      std::string_view value) const;

  // "t00000", "t00001", ... in ascending order.
  std::vector<std::string> TupleIds() const;
  // The scenario's attack set with "sim:" image references.
  std::vector<AttackTuple> AttackSet() const;

 private:
  explicit Scenario(ScenarioConfig config);

  ScenarioConfig config_;
  std::vector<std::size_t> truth_;
  std::vector<double> base_;
};

// Splits "<tuple_id>/<value>" at the last '/'. Accepts an optional "sim:"
// prefix. Returns nullopt on a malformed payload.
std::optional<std::pair<std::string, std::string>> ParseSimulatorPayload(
    std::string_view payload);

// In-process provider backed by a scenario. Image references are ignored;
// rows are keyed by (tuple_id, value).
class SimulatorLogitSource : public LogitSource {
 public:
  explicit SimulatorLogitSource(std::shared_ptr<const Scenario> scenario)
      : scenario_(std::move(scenario)) {}

  std::size_t num_classes() override { return scenario_->num_classes(); }
  FetchResult Fetch(std::span<const LogitRequest> requests) override;

 private:
  std::shared_ptr<const Scenario> scenario_;
};

// HTTP oracle over a scenario. Each image is base64 of the UTF-8 payload
// "<tuple_id>/<value>" rather than PNG bytes.
class SimulatorServer {
 public:
  explicit SimulatorServer(std::shared_ptr<const Scenario> scenario);
  ~SimulatorServer();
  SimulatorServer(const SimulatorServer&) = delete;
  SimulatorServer& operator=(const SimulatorServer&) = delete;

  // Port 0 picks a free port. Returns the bound port; throws kConfiguration
  // when the address cannot be bound.
  int Bind(const std::string& host, int port);
  // Serves on a background thread until Stop().
  void Start();
  // Serves on the calling thread until Stop() from another thread.
  void Serve();
  void Stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace caia

#endif  // CAIA_SIMULATOR_H_
