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

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "caia/counter_rng.h"
#include "caia/errors.h"
#include "wire.h"

namespace caia {
namespace {

// Stream tags separating the independent draws of one seed.
enum Stream : std::uint64_t {
  kTruthStream = 0,
  kBaseStream = 1,
  kConfounderStream = 2,
  kNoiseStream = 3,
  kAttributeStream = 4,
};

void CheckConfig(const ScenarioConfig& c) {
  const std::size_t k = c.attribute.size();
  if (c.num_classes < k || c.num_classes % k != 0) {
    throw Error(ErrorKind::kConfiguration,
                "num_classes " + std::to_string(c.num_classes) +
                    " is not a positive multiple of k = " + std::to_string(k));
  }
  if (c.num_tuples == 0) {
    throw Error(ErrorKind::kConfiguration, "num_tuples must be at least 1");
  }
  for (double s : {c.mu, c.sigma, c.sigma_c, c.base_std, c.filter_noise}) {
    if (!(s >= 0.0) || !std::isfinite(s)) {
      throw Error(ErrorKind::kConfiguration,
                  "mu, sigma, sigma_c, base_std and filter_noise must be "
                  "finite and nonnegative");
    }
  }
  if (!std::isfinite(c.filter_margin)) {
    throw Error(ErrorKind::kConfiguration, "filter_margin must be finite");
  }
}

double Scaled(double scale, std::uint64_t key) {
  return scale == 0.0 ? 0.0 : scale * rng::StandardNormal(key);
}

}  // namespace

Scenario::Scenario(ScenarioConfig config) : config_(std::move(config)) {}

Scenario Scenario::Generate(ScenarioConfig config) {
  CheckConfig(config);
  Scenario s(std::move(config));
  const auto& c = s.config_;
  const std::size_t k = c.attribute.size();
  const auto perm = rng::Permutation(c.num_classes, rng::Key({c.seed, kTruthStream}));
  s.truth_.resize(c.num_classes);
  for (std::size_t y = 0; y < c.num_classes; ++y) s.truth_[y] = perm[y] % k;
  s.base_.resize(c.num_classes);
  for (std::size_t y = 0; y < c.num_classes; ++y) {
    s.base_[y] = Scaled(c.base_std, rng::Key({c.seed, kBaseStream, y}));
  }
  return s;
}

void Scenario::LogitsInto(std::string_view tuple_id, std::size_t value_index,
                          std::span<double> out) const {
  if (value_index >= config_.attribute.size()) {
    throw Error(ErrorKind::kDomain, "value index out of range");
  }
  if (out.size() != config_.num_classes) {
    throw Error(ErrorKind::kShape, "output row has the wrong length");
  }
  const std::uint64_t seed = config_.seed;
  const std::uint64_t tuple = rng::HashString(tuple_id);
  const double confounder =
      Scaled(config_.sigma_c, rng::Key({seed, kConfounderStream, tuple, value_index}));
  for (std::size_t y = 0; y < config_.num_classes; ++y) {
    const double match = truth_[y] == value_index ? config_.mu : 0.0;
    const double noise =
        Scaled(config_.sigma, rng::Key({seed, kNoiseStream, y, tuple, value_index}));
    out[y] = base_[y] + match + confounder + noise;
  }
}

std::vector<double> Scenario::Logits(std::string_view tuple_id,
                                     std::string_view value) const {
  std::vector<double> out(config_.num_classes);
  LogitsInto(tuple_id, config_.attribute.IndexOrThrow(value), out);
  return out;
}

std::vector<double> Scenario::AttributeScores(std::string_view tuple_id,
                                              std::string_view value) const {
  const std::size_t z = config_.attribute.IndexOrThrow(value);
  const std::size_t k = config_.attribute.size();
  const std::uint64_t tuple = rng::HashString(tuple_id);
  std::vector<double> scores(k);
  for (std::size_t j = 0; j < k; ++j) {
    scores[j] = (j == z ? config_.filter_margin : 0.0) +
                Scaled(config_.filter_noise,
                       rng::Key({config_.seed, kAttributeStream, tuple, z, j}));
  }
  const double top = *std::max_element(scores.begin(), scores.end());
  double sum = 0.0;
  for (double& s : scores) {
    s = std::exp(s - top);
    sum += s;
  }
  for (double& s : scores) s /= sum;
  return scores;
}

std::vector<std::string> Scenario::TupleIds() const {
  std::vector<std::string> ids;
  ids.reserve(config_.num_tuples);
  char buf[32];
  for (std::size_t i = 0; i < config_.num_tuples; ++i) {
    std::snprintf(buf, sizeof(buf), "t%05zu", i);
    ids.emplace_back(buf);
  }
  return ids;
}

std::vector<AttackTuple> Scenario::AttackSet() const {
  std::vector<AttackTuple> tuples;
  for (auto& id : TupleIds()) {
    AttackTuple t;
    t.id = id;
    for (const auto& v : config_.attribute.values()) {
      t.images[v] = std::string(kSimulatorImageScheme) + id + "/" + v;
    }
    tuples.push_back(std::move(t));
  }
  return tuples;
}

std::optional<std::pair<std::string, std::string>> ParseSimulatorPayload(
    std::string_view payload) {
  if (payload.starts_with(kSimulatorImageScheme)) {
    payload.remove_prefix(kSimulatorImageScheme.size());
  }
  const auto slash = payload.rfind('/');
  if (slash == std::string_view::npos || slash == 0 ||
      slash + 1 == payload.size()) {
    return std::nullopt;
  }
  return std::make_pair(std::string(payload.substr(0, slash)),
                        std::string(payload.substr(slash + 1)));
}

FetchResult SimulatorLogitSource::Fetch(std::span<const LogitRequest> requests) {
  FetchResult result;
  result.rows.reserve(requests.size());
  for (const auto& r : requests) {
    result.rows.emplace_back(scenario_->Logits(r.tuple_id, r.value));
  }
  return result;
}

// ---------------------------------------------------------------------------
// Server

namespace {

using nlohmann::json;

struct HttpFailure {
  int status;
  std::string message;
};

void Reply(httplib::Response& res, int status, const std::string& body) {
  res.status = status;
  res.set_content(body, wire::kJsonContentType);
}

json ParseBody(const httplib::Request& req) {
  if (req.get_header_value("Content-Type").find(wire::kJsonContentType) ==
      std::string::npos) {
    throw HttpFailure{400, "content type must be application/json"};
  }
  json body = json::parse(req.body, nullptr, /*allow_exceptions=*/false);
  if (body.is_discarded() || !body.is_object()) {
    throw HttpFailure{400, "body is not a JSON object"};
  }
  auto it = body.find("images");
  if (it == body.end() || !it->is_array()) {
    throw HttpFailure{400, "missing 'images' array"};
  }
  for (const auto& img : *it) {
    if (!img.is_string()) throw HttpFailure{400, "images must be strings"};
  }
  return body;
}

std::pair<std::string, std::string> DecodeImage(const json& image,
                                                const AttributeSpace& space) {
  auto bytes = wire::Base64Decode(image.get<std::string>());
  if (!bytes) throw HttpFailure{422, "image is not valid base64"};
  auto key = ParseSimulatorPayload(*bytes);
  if (!key) {
    throw HttpFailure{422, "simulator images must encode '<tuple_id>/<value>'"};
  }
  if (!space.IndexOf(key->second)) {
    throw HttpFailure{422, "unknown attribute value '" + key->second + "'"};
  }
  return *key;
}

template <typename Handler>
void Guarded(httplib::Response& res, Handler&& handler) {
  try {
    handler();
  } catch (const HttpFailure& f) {
    Reply(res, f.status, wire::ErrorBody(f.message));
  } catch (const std::exception& e) {
    Reply(res, 500, wire::ErrorBody(e.what()));
  }
}

}  // namespace

struct SimulatorServer::Impl {
  std::shared_ptr<const Scenario> scenario;
  httplib::Server server;
  std::thread thread;
};

SimulatorServer::SimulatorServer(std::shared_ptr<const Scenario> scenario)
    : impl_(std::make_unique<Impl>()) {
  impl_->scenario = std::move(scenario);
  const Scenario* s = impl_->scenario.get();
  auto& server = impl_->server;
  // httplib defaults to SO_REUSEPORT, which would let a second server share a
  // busy port silently.
  server.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });

  server.Get(wire::kMetadataPath,
             [s](const httplib::Request&, httplib::Response& res) {
               json body = {{"num_classes", s->num_classes()},
                            {"name", kSimulatorModelName},
                            {"input_size", {0, 0}}};
               Reply(res, 200, body.dump());
             });

  server.Post(wire::kLogitsPath, [s](const httplib::Request& req,
                                     httplib::Response& res) {
    Guarded(res, [&] {
      const json body = ParseBody(req);
      json rows = json::array();
      std::vector<double> row(s->num_classes());
      for (const auto& image : body["images"]) {
        auto [tuple_id, value] = DecodeImage(image, s->attribute());
        s->LogitsInto(tuple_id, s->attribute().IndexOrThrow(value), row);
        rows.push_back(row);
      }
      Reply(res, 200, json{{"logits", std::move(rows)}}.dump());
    });
  });

  server.Post(wire::kAttributeScoresPath, [s](const httplib::Request& req,
                                              httplib::Response& res) {
    Guarded(res, [&] {
      const json body = ParseBody(req);
      const auto& space = s->attribute();
      auto values = body.value("values", json::array());
      std::vector<std::string> expected(space.values().begin(),
                                        space.values().end());
      if (body.value("attribute", std::string()) != space.name() ||
          !values.is_array() || values != json(expected)) {
        throw HttpFailure{400, "simulator only scores attribute '" +
                                   space.name() + "' in its configured order"};
      }
      json rows = json::array();
      for (const auto& image : body["images"]) {
        auto [tuple_id, value] = DecodeImage(image, space);
        rows.push_back(s->AttributeScores(tuple_id, value));
      }
      Reply(res, 200, json{{"scores", std::move(rows)}}.dump());
    });
  });
}

SimulatorServer::~SimulatorServer() { Stop(); }

int SimulatorServer::Bind(const std::string& host, int port) {
  int bound = -1;
  if (port == 0) {
    bound = impl_->server.bind_to_any_port(host);
  } else if (impl_->server.bind_to_port(host, port)) {
    bound = port;
  }
  if (bound < 0) {
    throw Error(ErrorKind::kConfiguration,
                "cannot bind " + host + ":" + std::to_string(port));
  }
  return bound;
}

void SimulatorServer::Start() {
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

void SimulatorServer::Serve() { impl_->server.listen_after_bind(); }

void SimulatorServer::Stop() {
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace caia
