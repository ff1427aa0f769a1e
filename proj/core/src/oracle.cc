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

#include "caia/oracle.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "caia/errors.h"
#include "caia/filter.h"
#include "caia/io.h"
#include "wire.h"

namespace caia {
namespace {

using nlohmann::json;

std::vector<double> ParseRow(const json& row, const std::string& context) {
  if (!row.is_array()) {
    throw Error(ErrorKind::kProtocol, context + ": row is not an array");
  }
  std::vector<double> out;
  out.reserve(row.size());
  for (const auto& v : row) {
    if (!v.is_number()) {
      throw Error(ErrorKind::kProtocol, context + ": non-numeric entry");
    }
    out.push_back(v.get<double>());
  }
  return out;
}

void CheckScoreRow(std::span<const double> row, std::size_t k,
                   const std::string& context) {
  try {
    CheckProbabilityVector(row, k, context);
  } catch (const Error& e) {
    throw Error(ErrorKind::kProtocol, e.what());
  }
}

std::shared_ptr<const Scenario> ScenarioFor(const OracleDescriptor& d) {
  if (d.scenario) return d.scenario;
  return std::make_shared<const Scenario>(
      Scenario::Generate(io::ReadScenarioConfig(d.locator)));
}

json ReadHeaderLine(const std::string& path, std::string_view format) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(ErrorKind::kConfiguration, path + ": missing header line");
  }
  json header = json::parse(line, nullptr, false);
  if (header.is_discarded() || !header.is_object() ||
      header.value("format", std::string()) != format) {
    throw Error(ErrorKind::kConfiguration,
                path + ": header must declare format " + std::string(format));
  }
  return header;
}

std::size_t HeaderClassCount(const json& header, const std::string& path) {
  auto it = header.find("num_classes");
  if (it == header.end() || !it->is_number_unsigned() ||
      it->get<std::size_t>() < 1) {
    throw Error(ErrorKind::kConfiguration,
                path + ": header lacks a positive num_classes");
  }
  return it->get<std::size_t>();
}

// --- HTTP plumbing ---------------------------------------------------------

class Endpoint {
 public:
  explicit Endpoint(const OracleDescriptor& d) : d_(d), client_(d.locator) {
    if (!client_.is_valid()) {
      throw Error(ErrorKind::kConfiguration, "invalid oracle URL " + d.locator);
    }
    client_.set_connection_timeout(std::chrono::seconds(5));
    client_.set_read_timeout(std::chrono::seconds(120));
    client_.set_write_timeout(std::chrono::seconds(120));
  }

  json Get(const std::string& path) {
    return Call(path, [&] { return client_.Get(path); });
  }

  json Post(const std::string& path, const json& body) {
    const std::string payload = body.dump();
    return Call(path, [&] {
      return client_.Post(path, payload, wire::kJsonContentType);
    });
  }

 private:
  template <typename Send>
  json Call(const std::string& path, Send&& send) {
    std::string last_failure;
    for (int attempt = 0; attempt <= d_.retries; ++attempt) {
      if (attempt > 0) {
        std::this_thread::sleep_for(d_.backoff_base * (1 << (attempt - 1)));
      }
      httplib::Result res = send();
      if (!res) {
        last_failure = httplib::to_string(res.error());
        continue;
      }
      if (res->status >= 500) {
        last_failure = "HTTP " + std::to_string(res->status) + " " + res->body;
        continue;
      }
      if (res->status != 200) {
        throw Error(ErrorKind::kProtocol, d_.locator + path + " answered HTTP " +
                                              std::to_string(res->status) + ": " +
                                              res->body);
      }
      json doc = json::parse(res->body, nullptr, false);
      if (doc.is_discarded() || !doc.is_object()) {
        throw Error(ErrorKind::kProtocol,
                    d_.locator + path + " returned a body that is not a JSON object");
      }
      return doc;
    }
    throw Error(ErrorKind::kTransport, d_.locator + path + " failed after " +
                                           std::to_string(d_.retries) +
                                           " retries: " + last_failure);
  }

  const OracleDescriptor& d_;
  httplib::Client client_;
};

OracleMetadata ParseMetadata(const json& doc, const std::string& where) {
  auto it = doc.find("num_classes");
  if (it == doc.end() || !it->is_number_unsigned() || it->get<std::size_t>() < 1) {
    throw Error(ErrorKind::kConfiguration, where + ": metadata lacks num_classes");
  }
  OracleMetadata m;
  m.num_classes = it->get<std::size_t>();
  m.model_name = doc.value("name", std::string());
  auto size = doc.find("input_size");
  if (size != doc.end() && size->is_array() && size->size() == 2 &&
      (*size)[0].is_number_integer() && (*size)[1].is_number_integer()) {
    m.input_size = {(*size)[0].get<int>(), (*size)[1].get<int>()};
  }
  return m;
}

}  // namespace

std::string_view OracleKindName(OracleKind kind) {
  switch (kind) {
    case OracleKind::kFile:
      return "file";
    case OracleKind::kHttp:
      return "http";
    case OracleKind::kSimulator:
      return "simulator";
  }
  return "unknown";
}

OracleKind ParseOracleKind(std::string_view name) {
  if (name == "file") return OracleKind::kFile;
  if (name == "http") return OracleKind::kHttp;
  if (name == "simulator") return OracleKind::kSimulator;
  throw Error(ErrorKind::kConfiguration,
              "unknown oracle kind '" + std::string(name) + "'");
}

void ValidateDescriptor(const OracleDescriptor& d) {
  if (d.batch_size < 1) {
    throw Error(ErrorKind::kConfiguration, "batch_size must be at least 1");
  }
  if (d.max_in_flight < 1) {
    throw Error(ErrorKind::kConfiguration, "max_in_flight must be at least 1");
  }
  if (d.retries < 0) {
    throw Error(ErrorKind::kConfiguration, "retries must be nonnegative");
  }
  if (d.locator.empty() && !(d.kind == OracleKind::kSimulator && d.scenario)) {
    throw Error(ErrorKind::kConfiguration, "oracle locator is empty");
  }
}

OracleMetadata Metadata(OracleDescriptor& descriptor) {
  ValidateDescriptor(descriptor);
  OracleMetadata m;
  switch (descriptor.kind) {
    case OracleKind::kFile: {
      json header = ReadHeaderLine(descriptor.locator, kLogitFileFormat);
      m.num_classes = HeaderClassCount(header, descriptor.locator);
      m.model_name = std::filesystem::path(descriptor.locator).filename().string();
      break;
    }
    case OracleKind::kHttp:
      m = ParseMetadata(Endpoint(descriptor).Get(wire::kMetadataPath),
                        descriptor.locator);
      break;
    case OracleKind::kSimulator:
      m.num_classes = ScenarioFor(descriptor)->num_classes();
      m.model_name = std::string(kSimulatorModelName);
      break;
  }
  if (descriptor.num_classes != 0 && descriptor.num_classes != m.num_classes) {
    throw Error(ErrorKind::kProtocol,
                "oracle reports " + std::to_string(m.num_classes) +
                    " classes, expected " +
                    std::to_string(descriptor.num_classes));
  }
  descriptor.num_classes = m.num_classes;
  return m;
}

std::unique_ptr<LogitSource> MakeLogitSource(const OracleDescriptor& descriptor) {
  ValidateDescriptor(descriptor);
  std::unique_ptr<LogitSource> source;
  switch (descriptor.kind) {
    case OracleKind::kFile:
      source = std::make_unique<FileLogitSource>(descriptor.locator);
      break;
    case OracleKind::kHttp:
      source = std::make_unique<HttpLogitSource>(descriptor);
      break;
    case OracleKind::kSimulator:
      source = std::make_unique<SimulatorLogitSource>(ScenarioFor(descriptor));
      break;
  }
  if (descriptor.num_classes != 0 &&
      source->num_classes() != descriptor.num_classes) {
    throw Error(ErrorKind::kProtocol,
                "oracle reports " + std::to_string(source->num_classes()) +
                    " classes, expected " +
                    std::to_string(descriptor.num_classes));
  }
  return source;
}

LogitBatch FetchLogits(const OracleDescriptor& descriptor,
                       std::span<const LogitRequest> requests) {
  if (requests.empty()) {
    throw Error(ErrorKind::kConfiguration, "no logit requests");
  }
  auto source = MakeLogitSource(descriptor);
  return FetchLogits(*source, requests);
}

std::vector<std::vector<double>> FetchAttributeScores(
    const OracleDescriptor& descriptor, const AttributeSpace& attribute,
    std::span<const std::string> images) {
  ValidateDescriptor(descriptor);
  if (images.empty()) {
    throw Error(ErrorKind::kConfiguration, "no attribute score requests");
  }
  std::vector<std::vector<double>> rows;
  switch (descriptor.kind) {
    case OracleKind::kFile: {
      const std::string& path = descriptor.locator;
      json header = ReadHeaderLine(path, kScoreFileFormat);
      AttributeSpace declared = io::AttributeFromJson(io::Json{
          {"name", header.value("attribute", std::string())},
          {"values", header.value("values", json::array())}});
      if (!declared.SameSpace(attribute)) {
        throw Error(ErrorKind::kConfiguration,
                    path + ": scores are for a different attribute space");
      }
      std::map<std::string, std::vector<double>> by_image;
      std::ifstream in(path);
      std::string line;
      std::getline(in, line);
      for (std::size_t n = 2; std::getline(in, line); ++n) {
        if (line.empty()) continue;
        json rec = json::parse(line, nullptr, false);
        const std::string where = path + ":" + std::to_string(n);
        if (rec.is_discarded() || !rec.contains("image") ||
            !rec["image"].is_string() || !rec.contains("scores")) {
          throw Error(ErrorKind::kProtocol, where + ": malformed score record");
        }
        by_image[rec["image"].get<std::string>()] = ParseRow(rec["scores"], where);
      }
      std::string missing;
      for (const auto& img : images) {
        auto it = by_image.find(img);
        if (it == by_image.end()) {
          missing += (missing.empty() ? "" : ", ") + img;
          continue;
        }
        rows.push_back(it->second);
      }
      if (!missing.empty()) {
        throw Error(ErrorKind::kMissingRecord, "no scores for " + missing);
      }
      break;
    }
    case OracleKind::kHttp:
      rows = HttpLogitSource(descriptor).FetchScores(attribute, images);
      break;
    case OracleKind::kSimulator: {
      auto scenario = ScenarioFor(descriptor);
      if (!scenario->attribute().SameSpace(attribute)) {
        throw Error(ErrorKind::kConfiguration,
                    "simulator scores a different attribute space");
      }
      for (const auto& img : images) {
        auto key = ParseSimulatorPayload(img);
        if (!key) {
          throw Error(ErrorKind::kDomain,
                      "'" + img + "' is not a simulator image reference");
        }
        rows.push_back(scenario->AttributeScores(key->first, key->second));
      }
      break;
    }
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CheckScoreRow(rows[i], attribute.size(), "scores for " + images[i]);
  }
  return rows;
}

// --- file provider ---------------------------------------------------------

void WriteLogitFile(const std::string& path, std::size_t num_classes,
                    std::span<const LogitRecord> records) {
  std::ostringstream out;
  out << json{{"format", kLogitFileFormat}, {"num_classes", num_classes}}.dump()
      << '\n';
  for (const auto& r : records) {
    CheckLogitRow(r.logits, num_classes, r.tuple_id + "/" + r.value);
    io::Json line;
    line["tuple_id"] = r.tuple_id;
    line["value"] = r.value;
    line["logits"] = r.logits;
    out << line.dump() << '\n';
  }
  io::WriteFile(path, out.str());
}

void WriteScoreFile(
    const std::string& path, const AttributeSpace& attribute,
    std::span<const std::pair<std::string, std::vector<double>>> records) {
  std::ostringstream out;
  io::Json header;
  header["format"] = kScoreFileFormat;
  header["attribute"] = attribute.name();
  header["values"] = std::vector<std::string>(attribute.values().begin(),
                                              attribute.values().end());
  out << header.dump() << '\n';
  for (const auto& [image, scores] : records) {
    io::Json line;
    line["image"] = image;
    line["scores"] = scores;
    out << line.dump() << '\n';
  }
  io::WriteFile(path, out.str());
}

FileLogitSource::FileLogitSource(const std::string& path) {
  json header = ReadHeaderLine(path, kLogitFileFormat);
  num_classes_ = HeaderClassCount(header, path);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  for (std::size_t n = 2; std::getline(in, line); ++n) {
    if (line.empty()) continue;
    const std::string where = path + ":" + std::to_string(n);
    json rec = json::parse(line, nullptr, false);
    if (rec.is_discarded() || !rec.is_object() || !rec.contains("tuple_id") ||
        !rec["tuple_id"].is_string() || !rec.contains("value") ||
        !rec["value"].is_string() || !rec.contains("logits")) {
      throw Error(ErrorKind::kProtocol, where + ": malformed logit record");
    }
    auto row = ParseRow(rec["logits"], where);
    CheckLogitRow(row, num_classes_, where);
    auto key = std::make_pair(rec["tuple_id"].get<std::string>(),
                              rec["value"].get<std::string>());
    if (!rows_.emplace(key, std::move(row)).second) {
      throw Error(ErrorKind::kProtocol, where + ": duplicate record for " +
                                            key.first + "/" + key.second);
    }
  }
}

FetchResult FileLogitSource::Fetch(std::span<const LogitRequest> requests) {
  FetchResult result;
  result.rows.reserve(requests.size());
  std::string missing;
  for (const auto& r : requests) {
    auto it = rows_.find({r.tuple_id, r.value});
    if (it == rows_.end()) {
      result.rows.emplace_back(std::nullopt);
      missing += (missing.empty() ? "" : ", ") + r.tuple_id + "/" + r.value;
    } else {
      result.rows.emplace_back(it->second);
    }
  }
  if (!missing.empty()) {
    result.failures.emplace_back(ErrorKind::kMissingRecord,
                                 "no logits for " + missing);
  }
  return result;
}

// --- HTTP provider ---------------------------------------------------------

HttpLogitSource::HttpLogitSource(OracleDescriptor descriptor)
    : descriptor_(std::move(descriptor)) {
  ValidateDescriptor(descriptor_);
  metadata_ = ParseMetadata(Endpoint(descriptor_).Get(wire::kMetadataPath),
                            descriptor_.locator);
  simulator_mode_ = metadata_.model_name == kSimulatorModelName;
}

HttpLogitSource::~HttpLogitSource() = default;

std::string HttpLogitSource::EncodeImageRef(const std::string& image) const {
  if (simulator_mode_) {
    std::string_view payload = image;
    if (payload.starts_with(kSimulatorImageScheme)) {
      payload.remove_prefix(kSimulatorImageScheme.size());
    }
    return wire::Base64Encode(payload);
  }
  std::filesystem::path path(image);
  if (path.is_relative() && !descriptor_.image_root.empty()) {
    path = std::filesystem::path(descriptor_.image_root) / path;
  }
  return wire::Base64Encode(io::ReadFile(path.string()));
}

std::string HttpLogitSource::EncodeImage(std::string_view tuple_id,
                                         std::string_view value,
                                         const std::string& image) const {
  if (simulator_mode_) {
    return wire::Base64Encode(std::string(tuple_id) + "/" + std::string(value));
  }
  return EncodeImageRef(image);
}

FetchResult HttpLogitSource::Fetch(std::span<const LogitRequest> requests) {
  FetchResult result;
  result.rows.assign(requests.size(), std::nullopt);

  // Images that cannot be read are failed rows, not a failed call.
  std::vector<std::size_t> pending;
  std::vector<std::string> encoded(requests.size());
  std::string unreadable;
  for (std::size_t i = 0; i < requests.size(); ++i) {
    try {
      encoded[i] = EncodeImage(requests[i].tuple_id, requests[i].value,
                               requests[i].image);
      pending.push_back(i);
    } catch (const Error& e) {
      unreadable += (unreadable.empty() ? "" : "; ") + std::string(e.what());
    }
  }
  if (!unreadable.empty()) result.failures.emplace_back(ErrorKind::kIo, unreadable);

  const std::size_t batch = descriptor_.batch_size;
  const std::size_t num_batches = (pending.size() + batch - 1) / batch;
  std::vector<std::optional<Error>> batch_failure(num_batches);
  std::vector<std::exception_ptr> batch_fatal(num_batches);
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    Endpoint endpoint(descriptor_);
    for (std::size_t b = next++; b < num_batches; b = next++) {
      const std::size_t begin = b * batch;
      const std::size_t end = std::min(begin + batch, pending.size());
      try {
        json images = json::array();
        for (std::size_t j = begin; j < end; ++j) {
          images.push_back(encoded[pending[j]]);
        }
        json reply = endpoint.Post(wire::kLogitsPath, json{{"images", images}});
        auto it = reply.find("logits");
        if (it == reply.end() || !it->is_array() || it->size() != end - begin) {
          throw Error(ErrorKind::kProtocol,
                      "logits response does not have one row per image");
        }
        for (std::size_t j = begin; j < end; ++j) {
          const auto& req = requests[pending[j]];
          const std::string context = req.tuple_id + "/" + req.value;
          auto row = ParseRow((*it)[j - begin], context);
          CheckLogitRow(row, metadata_.num_classes, context);
          result.rows[pending[j]] = std::move(row);
        }
      } catch (const Error& e) {
        if (e.kind() == ErrorKind::kTransport) {
          batch_failure[b] = e;
        } else {
          batch_fatal[b] = std::current_exception();
        }
      } catch (...) {
        batch_fatal[b] = std::current_exception();
      }
    }
  };

  const std::size_t threads = std::min(descriptor_.max_in_flight, num_batches);
  if (threads <= 1) {
    if (num_batches > 0) worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (auto& fatal : batch_fatal) {
    if (fatal) std::rethrow_exception(fatal);
  }
  for (auto& f : batch_failure) {
    if (f) result.failures.push_back(*f);
  }
  return result;
}

std::vector<std::vector<double>> HttpLogitSource::FetchScores(
    const AttributeSpace& attribute, std::span<const std::string> images) {
  if (images.empty()) {
    throw Error(ErrorKind::kConfiguration, "no attribute score requests");
  }
  Endpoint endpoint(descriptor_);
  std::vector<std::vector<double>> rows;
  const std::vector<std::string> values(attribute.values().begin(),
                                        attribute.values().end());
  for (std::size_t begin = 0; begin < images.size();
       begin += descriptor_.batch_size) {
    const std::size_t end = std::min(begin + descriptor_.batch_size, images.size());
    json encoded = json::array();
    for (std::size_t i = begin; i < end; ++i) {
      encoded.push_back(EncodeImageRef(images[i]));
    }
    json reply = endpoint.Post(
        wire::kAttributeScoresPath,
        json{{"attribute", attribute.name()}, {"values", values}, {"images", encoded}});
    auto it = reply.find("scores");
    if (it == reply.end() || !it->is_array() || it->size() != end - begin) {
      throw Error(ErrorKind::kProtocol,
                  "scores response does not have one row per image");
    }
    for (std::size_t i = begin; i < end; ++i) {
      auto row = ParseRow((*it)[i - begin], images[i]);
      CheckScoreRow(row, attribute.size(), "scores for " + images[i]);
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

// --- caching ---------------------------------------------------------------

FetchResult CachingLogitSource::Fetch(std::span<const LogitRequest> requests) {
  FetchResult result;
  result.rows.assign(requests.size(), std::nullopt);
  std::vector<std::size_t> misses;
  {
    std::lock_guard<std::mutex> lock(mu_);
    for (std::size_t i = 0; i < requests.size(); ++i) {
      auto it = cache_.find({requests[i].tuple_id, requests[i].value});
      if (it == cache_.end()) {
        misses.push_back(i);
      } else {
        result.rows[i] = it->second;
      }
    }
  }
  if (misses.empty()) return result;

  std::vector<LogitRequest> uncached;
  uncached.reserve(misses.size());
  for (std::size_t i : misses) uncached.push_back(requests[i]);
  FetchResult fresh = inner_.Fetch(uncached);
  if (fresh.rows.size() != uncached.size()) {
    throw Error(ErrorKind::kProtocol, "provider returned the wrong row count");
  }
  std::lock_guard<std::mutex> lock(mu_);
  for (std::size_t j = 0; j < misses.size(); ++j) {
    if (!fresh.rows[j]) continue;
    cache_[{uncached[j].tuple_id, uncached[j].value}] = *fresh.rows[j];
    result.rows[misses[j]] = std::move(fresh.rows[j]);
  }
  result.failures = std::move(fresh.failures);
  return result;
}

}  // namespace caia
