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

// Black-box access to the target model and the attribute classifier.
//
// Three providers share one contract: a JSON Lines logit file, a remote HTTP
// oracle, and the in-process simulator. For the same underlying model they
// return identical rows in request order.

#ifndef CAIA_ORACLE_H_
#define CAIA_ORACLE_H_

#include <chrono>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "caia/attribute_space.h"
#include "caia/logit_source.h"
#include "caia/simulator.h"

namespace caia {

inline constexpr std::string_view kLogitFileFormat = "caia-logits/1";
inline constexpr std::string_view kScoreFileFormat = "caia-scores/1";

enum class OracleKind { kFile, kHttp, kSimulator };

std::string_view OracleKindName(OracleKind kind);
// Throws kConfiguration for anything but "file", "http" or "simulator".
OracleKind ParseOracleKind(std::string_view name);

struct OracleDescriptor {
  OracleKind kind = OracleKind::kFile;
  // File path, base URL ("http://host:port") or scenario config path.
  std::string locator;
  // Filled in by Metadata(); 0 means not yet known.
  std::size_t num_classes = 0;
  std::size_t batch_size = 32;
  std::size_t max_in_flight = 4;
  // Relative image references resolve against this directory.
  std::string image_root;
  int retries = 3;
  std::chrono::milliseconds backoff_base{100};
  // Overrides `locator` for the simulator kind.
  std::shared_ptr<const Scenario> scenario;
};

struct OracleMetadata {
  std::size_t num_classes = 0;
  std::string model_name;
  std::pair<int, int> input_size{0, 0};
};

// Throws kConfiguration when the descriptor itself is invalid.
void ValidateDescriptor(const OracleDescriptor& descriptor);

// Queries metadata and caches num_classes into the descriptor. Throws
// kConfiguration when none is available and kProtocol when it disagrees with
// a previously cached class count.
OracleMetadata Metadata(OracleDescriptor& descriptor);

std::unique_ptr<LogitSource> MakeLogitSource(const OracleDescriptor& descriptor);

// Convenience wrapper over MakeLogitSource + FetchLogits.
LogitBatch FetchLogits(const OracleDescriptor& descriptor,
                       std::span<const LogitRequest> requests);

// Attribute classifier softmax rows, one per image reference, each of length
// k and summing to one within 1e-6 (otherwise kProtocol).
std::vector<std::vector<double>> FetchAttributeScores(
    const OracleDescriptor& descriptor, const AttributeSpace& attribute,
    std::span<const std::string> images);

// ---------------------------------------------------------------------------
// Logit files: a header line {"format":"caia-logits/1","num_classes":N}
// followed by one {"tuple_id","value","logits"} object per line.

struct LogitRecord {
  std::string tuple_id;
  std::string value;
  std::vector<double> logits;
};

void WriteLogitFile(const std::string& path, std::size_t num_classes,
                    std::span<const LogitRecord> records);

class FileLogitSource : public LogitSource {
 public:
  // Throws kIo when unreadable, kConfiguration on a missing or foreign
  // header, kProtocol on a malformed record.
  explicit FileLogitSource(const std::string& path);

  std::size_t num_classes() override { return num_classes_; }
  // Missing keys yield nullopt rows plus one kMissingRecord failure listing
  // every missing key.
  FetchResult Fetch(std::span<const LogitRequest> requests) override;

 private:
  std::size_t num_classes_ = 0;
  std::map<std::pair<std::string, std::string>, std::vector<double>> rows_;
};

// Score files: header {"format":"caia-scores/1","attribute":name,"values":[...]}
// then {"image": ref, "scores": [...]} per line.
void WriteScoreFile(const std::string& path, const AttributeSpace& attribute,
                    std::span<const std::pair<std::string, std::vector<double>>>
                        records);

// ---------------------------------------------------------------------------
// HTTP oracle client.

class HttpLogitSource : public LogitSource {
 public:
  // Reads /v1/metadata immediately. Transport failures after all retries
  // throw kTransport.
  explicit HttpLogitSource(OracleDescriptor descriptor);
  ~HttpLogitSource() override;

  std::size_t num_classes() override { return metadata_.num_classes; }
  const OracleMetadata& metadata() const { return metadata_; }

  // Splits requests into batches of `batch_size`, keeps at most
  // `max_in_flight` batches outstanding, and reassembles rows in request
  // order. A batch that still fails after the retries yields nullopt rows and
  // one kTransport failure; malformed responses throw kProtocol.
  FetchResult Fetch(std::span<const LogitRequest> requests) override;

  std::vector<std::vector<double>> FetchScores(
      const AttributeSpace& attribute, std::span<const std::string> images);

 private:
  std::string EncodeImage(std::string_view tuple_id, std::string_view value,
                          const std::string& image) const;
  std::string EncodeImageRef(const std::string& image) const;

  OracleDescriptor descriptor_;
  OracleMetadata metadata_;
  bool simulator_mode_ = false;
};

// Memoizes rows by (tuple_id, value). Used when the same images are scored
// repeatedly, e.g. by ablations.
class CachingLogitSource : public LogitSource {
 public:
  explicit CachingLogitSource(LogitSource& inner) : inner_(inner) {}

  std::size_t num_classes() override { return inner_.num_classes(); }
  FetchResult Fetch(std::span<const LogitRequest> requests) override;

 private:
  LogitSource& inner_;
  std::mutex mu_;
  std::map<std::pair<std::string, std::string>, std::vector<double>> cache_;
};

}  // namespace caia

#endif  // CAIA_ORACLE_H_
