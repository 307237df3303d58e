#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "topictrace/corpus.hpp"
#include "topictrace/graph.hpp"
#include "topictrace/hdp.hpp"

namespace topictrace::io {

using nlohmann::json;
namespace fs = std::filesystem;

// Topic probabilities below this are left out of model files; readers spread
// the missing mass uniformly over the omitted terms.
inline constexpr double kPhiElisionThreshold = 1e-6;

// Little-endian binary layout:
//   "TTCORPUS" u32 version, u32+bytes config JSON,
//   u32 n_terms, per term: u32+bytes text, u64 count,
//   u64 n_docs, per doc: u32+bytes id, i32 year, u8 month, u8 day, u32 n, u32[n] tokens
void write_corpus_bin(const fs::path& path, const EncodedCorpus& corpus, const json& config);
EncodedCorpus read_corpus_bin(const fs::path& path);

std::string vocab_csv(const Vocabulary& vocab, const json& config);
Vocabulary read_vocab_csv(const fs::path& path);

json model_to_json(const EpochModel& model, std::size_t vocab_size, const json& config);
EpochModel model_from_json(const json& j);
std::string model_file_name(int epoch_index);
// All epoch model files of a directory, in epoch order.
std::vector<EpochModel> read_models(const fs::path& dir);

json graph_to_json(const TemporalGraph& graph, const json& config);
TemporalGraph graph_from_json(const json& j);

std::string events_csv(std::span<const TopicEvent> events, const json& config);
std::vector<TopicEvent> read_events_csv(const fs::path& path);
std::string rates_csv(std::span<const EventRates> rates, const json& config);
std::string cdf_csv(const EmpiricalCDF& cdf, const json& config);
std::string lifespans_csv(std::span<const LifespanRecord> records, const json& config);

// "# config: {...}" provenance line that heads every CSV output.
std::string provenance_line(const json& config);

void write_text(const fs::path& path, const std::string& content);
std::string read_text(const fs::path& path);
json read_json(const fs::path& path);
void write_json(const fs::path& path, const json& j);

}  // namespace topictrace::io
