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


#include "caia/simulator.h"

#include <gtest/gtest.h>
#include <httplib.h>
#include <sodium.h>

#include <nlohmann/json.hpp>

#include "caia/attack.h"
#include "caia/errors.h"
#include "caia/oracle.h"

namespace caia {
namespace {

AttributeSpace HairColor() {
  return AttributeSpace("hair_color", {"black", "blond", "brown", "gray"});
}

ScenarioConfig Config(std::size_t classes, std::uint64_t seed) {
  ScenarioConfig c;
  c.num_classes = classes;
  c.attribute = HairColor();
  c.seed = seed;
  return c;
}

std::string Base64(const std::string& s) {
  std::string out(sodium_base64_ENCODED_LEN(s.size(), sodium_base64_VARIANT_ORIGINAL),
                  '\0');
  sodium_bin2base64(out.data(), out.size(),
                    reinterpret_cast<const unsigned char*>(s.data()), s.size(),
                    sodium_base64_VARIANT_ORIGINAL);
  out.resize(out.size() - 1);
  return out;
}

TEST(ScenarioTest, TruthIsBalanced) {
  for (std::uint64_t seed : {0u, 1u, 99u}) {
    const auto s = Scenario::Generate(Config(400, seed));
    std::vector<int> counts(4, 0);
    for (std::size_t y = 0; y < 400; ++y) ++counts[s.TruthIndex(y)];
    EXPECT_EQ(counts, (std::vector<int>{100, 100, 100, 100}));
  }
}

TEST(ScenarioTest, SameSeedSameEverything) {
  const auto a = Scenario::Generate(Config(100, 5));
  const auto b = Scenario::Generate(Config(100, 5));
  EXPECT_EQ(a.truth(), b.truth());
  EXPECT_EQ(a.Logits("t00003", "gray"), b.Logits("t00003", "gray"));
  EXPECT_EQ(a.AttributeScores("t00003", "gray"), b.AttributeScores("t00003", "gray"));
}

TEST(ScenarioTest, DifferentSeedsDiffer) {
  const auto base = Scenario::Generate(Config(100, 0));
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto other = Scenario::Generate(Config(100, seed));
    EXPECT_NE(base.truth(), other.truth()) << seed;
    EXPECT_NE(base.Logits("t00000", "black"), other.Logits("t00000", "black")) << seed;
  }
}

TEST(ScenarioTest, AllScalesZeroGivesZeroLogits) {
  auto c = Config(8, 3);
  c.mu = c.sigma = c.sigma_c = c.base_std = 0.0;
  const auto s = Scenario::Generate(c);
  const auto space = HairColor();
  for (const auto& v : space.values()) {
    EXPECT_EQ(s.Logits("t00000", v), std::vector<double>(8, 0.0));
  }
}

TEST(ScenarioTest, NoiseFreeSignalIsExact) {
  auto c = Config(8, 3);
  c.sigma = c.sigma_c = c.base_std = 0.0;
  const auto s = Scenario::Generate(c);
  const auto row = s.Logits("t00001", "brown");
  for (std::size_t y = 0; y < 8; ++y) {
    EXPECT_EQ(row[y], s.TruthValue(y) == "brown" ? 1.0 : 0.0);
  }
}

TEST(ScenarioTest, ConfounderIsSharedAcrossClasses) {
  auto c = Config(8, 3);
  c.mu = c.sigma = c.base_std = 0.0;
  c.sigma_c = 2.0;
  const auto s = Scenario::Generate(c);
  const auto row = s.Logits("t00002", "blond");
  for (double v : row) EXPECT_EQ(v, row[0]);
  EXPECT_NE(row[0], 0.0);
}

TEST(ScenarioTest, AttributeScoresAreSoftmax) {
  const auto s = Scenario::Generate(Config(8, 3));
  const auto space = HairColor();
  for (const auto& v : space.values()) {
    const auto p = s.AttributeScores("t00004", v);
    double sum = 0;
    for (double x : p) {
      EXPECT_GE(x, 0.0);
      sum += x;
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
  }
}

TEST(ScenarioTest, RejectsBadConfigs) {
  EXPECT_THROW(Scenario::Generate(Config(10, 0)), Error);
  EXPECT_THROW(Scenario::Generate(Config(0, 0)), Error);
  auto c = Config(8, 0);
  c.num_tuples = 0;
  EXPECT_THROW(Scenario::Generate(c), Error);
  c = Config(8, 0);
  c.sigma = -1;
  EXPECT_THROW(Scenario::Generate(c), Error);
  const auto s = Scenario::Generate(Config(8, 0));
  EXPECT_THROW(s.Logits("t00000", "red"), Error);
}

TEST(ScenarioTest, AttackSetUsesSimulatorReferences) {
  auto c = Config(8, 0);
  c.num_tuples = 3;
  const auto s = Scenario::Generate(c);
  EXPECT_EQ(s.TupleIds(), (std::vector<std::string>{"t00000", "t00001", "t00002"}));
  const auto set = s.AttackSet();
  ASSERT_EQ(set.size(), 3u);
  EXPECT_EQ(set[1].images.at("gray"), "sim:t00001/gray");
}

TEST(ParseSimulatorPayloadTest, SplitsAtLastSlash) {
  auto p = ParseSimulatorPayload("sim:a/b/gray");
  ASSERT_TRUE(p.has_value());
  EXPECT_EQ(p->first, "a/b");
  EXPECT_EQ(p->second, "gray");
  EXPECT_FALSE(ParseSimulatorPayload("noslash").has_value());
  EXPECT_FALSE(ParseSimulatorPayload("/gray").has_value());
  EXPECT_FALSE(ParseSimulatorPayload("t/").has_value());
}

class SimulatorServerTest : public ::testing::Test {
 protected:
  void SetUp() override {
    scenario_ = std::make_shared<const Scenario>(Scenario::Generate(Config(12, 4)));
    server_ = std::make_unique<SimulatorServer>(scenario_);
    port_ = server_->Bind("127.0.0.1", 0);
    server_->Start();
  }
  void TearDown() override { server_->Stop(); }

  httplib::Result Post(const std::string& path, const std::string& body,
                       const std::string& type = "application/json") {
    httplib::Client client("127.0.0.1", port_);
    return client.Post(path, body, type);
  }

  std::shared_ptr<const Scenario> scenario_;
  std::unique_ptr<SimulatorServer> server_;
  int port_ = 0;
};

TEST_F(SimulatorServerTest, Metadata) {
  httplib::Client client("127.0.0.1", port_);
  auto res = client.Get("/v1/metadata");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  const auto doc = nlohmann::json::parse(res->body);
  EXPECT_EQ(doc["num_classes"], 12);
  EXPECT_EQ(doc["name"], std::string(kSimulatorModelName));
  EXPECT_TRUE(doc["input_size"].is_array());
}

TEST_F(SimulatorServerTest, LogitsMatchScenario) {
  nlohmann::json req;
  req["images"] = {Base64("t00001/blond"), Base64("t00000/gray")};
  auto res = Post("/v1/logits", req.dump());
  ASSERT_TRUE(res);
  ASSERT_EQ(res->status, 200) << res->body;
  const auto doc = nlohmann::json::parse(res->body);
  EXPECT_EQ(doc["logits"][0].get<std::vector<double>>(),
            scenario_->Logits("t00001", "blond"));
  EXPECT_EQ(doc["logits"][1].get<std::vector<double>>(),
            scenario_->Logits("t00000", "gray"));
}

TEST_F(SimulatorServerTest, ErrorStatuses) {
  auto res = Post("/v1/logits", R"({"images":["@@@"]})");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 422);
  EXPECT_TRUE(nlohmann::json::parse(res->body).contains("error"));

  res = Post("/v1/logits", R"({"images":[")" + Base64("t0/red") + R"("]})");
  EXPECT_EQ(res->status, 422);

  res = Post("/v1/logits", "{not json");
  EXPECT_EQ(res->status, 400);

  res = Post("/v1/logits", R"({"pictures":[]})");
  EXPECT_EQ(res->status, 400);

  res = Post("/v1/logits", R"({"images":[]})", "text/plain");
  EXPECT_EQ(res->status, 400);

  res = Post("/v1/attribute_scores",
             R"({"attribute":"gender","values":["f","m"],"images":[]})");
  EXPECT_EQ(res->status, 400);
}

TEST_F(SimulatorServerTest, AttributeScores) {
  nlohmann::json req;
  req["attribute"] = "hair_color";
  req["values"] = {"black", "blond", "brown", "gray"};
  req["images"] = {Base64("t00002/brown")};
  auto res = Post("/v1/attribute_scores", req.dump());
  ASSERT_TRUE(res);
  ASSERT_EQ(res->status, 200) << res->body;
  EXPECT_EQ(nlohmann::json::parse(res->body)["scores"][0].get<std::vector<double>>(),
            scenario_->AttributeScores("t00002", "brown"));
}

TEST(SimulatorServerRestartTest, RestartedServerServesSameRows) {
  std::vector<std::vector<double>> rows[2];
  for (int round = 0; round < 2; ++round) {
    auto scenario = std::make_shared<const Scenario>(Scenario::Generate(Config(12, 9)));
    SimulatorServer server(scenario);
    const int port = server.Bind("127.0.0.1", 0);
    server.Start();
    OracleDescriptor d;
    d.kind = OracleKind::kHttp;
    d.locator = "http://127.0.0.1:" + std::to_string(port);
    const std::vector<LogitRequest> requests = {
        {"t00000", "black", "sim:t00000/black"}, {"t00001", "gray", "sim:t00001/gray"}};
    const auto batch = FetchLogits(d, requests);
    for (std::size_t i = 0; i < batch.size(); ++i) {
      rows[round].emplace_back(batch.row(i).begin(), batch.row(i).end());
    }
    server.Stop();
  }
  EXPECT_EQ(rows[0], rows[1]);
}

TEST(SimulatorServerBindTest, BusyPortIsConfigurationError) {
  auto scenario = std::make_shared<const Scenario>(Scenario::Generate(Config(4, 0)));
  SimulatorServer a(scenario), b(scenario);
  const int port = a.Bind("127.0.0.1", 0);
  try {
    b.Bind("127.0.0.1", port);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kConfiguration);
  }
}

}  // namespace
}  // namespace caia
