#pragma once
// JSON-lines dataset I/O. One object per line; a malformed line is an
// error carrying its 1-based line number, never silently skipped.
//
// Schemas:
//   preference_pairs: {"prompt": s, "chosen": s, "rejected": s}
//   scored_samples:   {"prompt_id": s, "response": s, "confidence": n,
//                      "quality": n, "correct": b}   (correct optional on read)
//   qa_items:         {"prompt_id": s, "question": s, "gold_answer": s,
//                      "ambiguity": n}

#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "conqord/types.hpp"

namespace conqord {

// Wire form of a preference pair: token sequences as space-joined strings.
struct PreferencePairRecord {
    std::string prompt;
    std::string chosen;
    std::string rejected;
};

// Wire form of a scored sample (prompt tokens are not part of the schema).
struct ScoredSampleRecord {
    std::string prompt_id;
    std::string response;
    double confidence = 0.0;
    double quality = 0.0;
    std::optional<bool> correct;
};

using Record = std::variant<PreferencePairRecord, ScoredSampleRecord, QaItem>;

RecordKind kind_of(const Record& record);

// Generic surface: homogeneous records in, manifest out. `kind` is required
// when records is empty and must agree with every record otherwise.
DatasetManifest write_records(const std::vector<Record>& records,
                              const std::filesystem::path& path,
                              std::optional<RecordKind> kind = std::nullopt);
std::vector<Record> read_records(const DatasetManifest& manifest);

// Typed conveniences used by the pipeline.
DatasetManifest write_preference_pairs(const std::vector<PreferencePairRecord>& records,
                                       const std::filesystem::path& path);
DatasetManifest write_scored_samples(const std::vector<ScoredSampleRecord>& records,
                                     const std::filesystem::path& path);
DatasetManifest write_qa_items(const std::vector<QaItem>& records,
                               const std::filesystem::path& path);
std::vector<PreferencePairRecord> read_preference_pairs(const std::filesystem::path& path);
std::vector<ScoredSampleRecord> read_scored_samples(const std::filesystem::path& path);
std::vector<QaItem> read_qa_items(const std::filesystem::path& path);

// Conversions between wire records and in-memory types.
PreferencePairRecord to_record(const PreferencePair& pair);
PreferencePair from_record(const PreferencePairRecord& record);
ScoredSampleRecord to_record(const ScoredSample& sample);
ScoredSample from_record(const ScoredSampleRecord& record);

}  // namespace conqord
