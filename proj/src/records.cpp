#include "conqord/records.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace conqord {

using nlohmann::json;

const char* record_kind_name(RecordKind kind) {
    switch (kind) {
        case RecordKind::preference_pairs: return "preference_pairs";
        case RecordKind::scored_samples: return "scored_samples";
        case RecordKind::qa_items: return "qa_items";
    }
    return "unknown";
}

std::string tokens_to_string(const TokenSeq& tokens) {
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i) out += ' ';
        out += std::to_string(tokens[i]);
    }
    return out;
}

TokenSeq tokens_from_string(const std::string& text) {
    TokenSeq tokens;
    std::istringstream in(text);
    std::string word;
    while (in >> word) {
        std::size_t used = 0;
        int value = std::stoi(word, &used);
        if (used != word.size()) {
            throw std::invalid_argument("tokens_from_string: bad token '" + word + "'");
        }
        tokens.push_back(value);
    }
    return tokens;
}

RecordKind kind_of(const Record& record) {
    if (std::holds_alternative<PreferencePairRecord>(record)) return RecordKind::preference_pairs;
    if (std::holds_alternative<ScoredSampleRecord>(record)) return RecordKind::scored_samples;
    return RecordKind::qa_items;
}

namespace {

json to_json(const PreferencePairRecord& r) {
    return json{{"prompt", r.prompt}, {"chosen", r.chosen}, {"rejected", r.rejected}};
}

json to_json(const ScoredSampleRecord& r) {
    json j{{"prompt_id", r.prompt_id},
           {"response", r.response},
           {"confidence", r.confidence},
           {"quality", r.quality}};
    if (r.correct.has_value()) j["correct"] = *r.correct;
    return j;
}

json to_json(const QaItem& r) {
    return json{{"prompt_id", r.prompt_id},
                {"question", r.question},
                {"gold_answer", r.gold_answer},
                {"ambiguity", r.ambiguity}};
}

json record_to_json(const Record& r) {
    return std::visit([](const auto& rec) { return to_json(rec); }, r);
}

json require(const json& j, const char* field, std::size_t line) {
    if (!j.contains(field)) {
        throw RecordError(line, "line " + std::to_string(line) + ": missing field '" +
                                    field + "'");
    }
    return j.at(field);
}

PreferencePairRecord parse_preference_pair(const json& j, std::size_t line) {
    PreferencePairRecord r;
    r.prompt = require(j, "prompt", line).get<std::string>();
    r.chosen = require(j, "chosen", line).get<std::string>();
    r.rejected = require(j, "rejected", line).get<std::string>();
    return r;
}

ScoredSampleRecord parse_scored_sample(const json& j, std::size_t line) {
    ScoredSampleRecord r;
    r.prompt_id = require(j, "prompt_id", line).get<std::string>();
    r.response = require(j, "response", line).get<std::string>();
    r.confidence = require(j, "confidence", line).get<double>();
    r.quality = require(j, "quality", line).get<double>();
    if (j.contains("correct")) r.correct = j.at("correct").get<bool>();
    if (!(r.confidence >= 0.0 && r.confidence <= 1.0)) {
        throw RecordError(line, "line " + std::to_string(line) +
                                    ": confidence outside [0,1]");
    }
    return r;
}

QaItem parse_qa_item(const json& j, std::size_t line) {
    QaItem r;
    r.prompt_id = require(j, "prompt_id", line).get<std::string>();
    r.question = require(j, "question", line).get<std::string>();
    r.gold_answer = require(j, "gold_answer", line).get<std::string>();
    r.ambiguity = require(j, "ambiguity", line).get<double>();
    return r;
}

Record parse_record(RecordKind kind, const std::string& text, std::size_t line) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw RecordError(line, "line " + std::to_string(line) + ": " + e.what());
    }
    try {
        switch (kind) {
            case RecordKind::preference_pairs: return parse_preference_pair(j, line);
            case RecordKind::scored_samples: return parse_scored_sample(j, line);
            case RecordKind::qa_items: return parse_qa_item(j, line);
        }
    } catch (const json::exception& e) {
        throw RecordError(line, "line " + std::to_string(line) + ": " + e.what());
    }
    throw RecordError(line, "unknown record kind");
}

std::vector<Record> read_all(const std::filesystem::path& path, RecordKind kind) {
    std::ifstream in(path);
    if (!in) throw RecordError(0, "cannot open " + path.string());
    std::vector<Record> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        records.push_back(parse_record(kind, line, line_no));
    }
    return records;
}

DatasetManifest write_all(const std::vector<Record>& records,
                          const std::filesystem::path& path, RecordKind kind) {
    for (const Record& r : records) {
        if (kind_of(r) != kind) {
            throw std::invalid_argument("write_records: mixed record kinds");
        }
    }
    std::ofstream out(path);
    if (!out) throw RecordError(0, "cannot open " + path.string() + " for writing");
    for (const Record& r : records) {
        out << record_to_json(r).dump() << '\n';
    }
    out.flush();
    if (!out) throw RecordError(0, "write failed: " + path.string());
    return DatasetManifest{path, kind, records.size()};
}

template <typename T>
std::vector<T> unwrap(std::vector<Record> records) {
    std::vector<T> out;
    out.reserve(records.size());
    for (Record& r : records) out.push_back(std::move(std::get<T>(r)));
    return out;
}

template <typename T>
std::vector<Record> wrap(const std::vector<T>& records) {
    return std::vector<Record>(records.begin(), records.end());
}

}  // namespace

DatasetManifest write_records(const std::vector<Record>& records,
                              const std::filesystem::path& path,
                              std::optional<RecordKind> kind) {
    if (!kind.has_value()) {
        if (records.empty()) {
            throw std::invalid_argument("write_records: empty input needs an explicit kind");
        }
        kind = kind_of(records.front());
    }
    return write_all(records, path, *kind);
}

std::vector<Record> read_records(const DatasetManifest& manifest) {
    std::vector<Record> records = read_all(manifest.path, manifest.record_kind);
    if (records.size() != manifest.count) {
        throw RecordError(0, manifest.path.string() + ": manifest count " +
                                 std::to_string(manifest.count) + " but file holds " +
                                 std::to_string(records.size()) + " records");
    }
    return records;
}

DatasetManifest write_preference_pairs(const std::vector<PreferencePairRecord>& records,
                                       const std::filesystem::path& path) {
    return write_all(wrap(records), path, RecordKind::preference_pairs);
}

DatasetManifest write_scored_samples(const std::vector<ScoredSampleRecord>& records,
                                     const std::filesystem::path& path) {
    return write_all(wrap(records), path, RecordKind::scored_samples);
}

DatasetManifest write_qa_items(const std::vector<QaItem>& records,
                               const std::filesystem::path& path) {
    return write_all(wrap(records), path, RecordKind::qa_items);
}

std::vector<PreferencePairRecord> read_preference_pairs(const std::filesystem::path& path) {
    return unwrap<PreferencePairRecord>(read_all(path, RecordKind::preference_pairs));
}

std::vector<ScoredSampleRecord> read_scored_samples(const std::filesystem::path& path) {
    return unwrap<ScoredSampleRecord>(read_all(path, RecordKind::scored_samples));
}

std::vector<QaItem> read_qa_items(const std::filesystem::path& path) {
    return unwrap<QaItem>(read_all(path, RecordKind::qa_items));
}

PreferencePairRecord to_record(const PreferencePair& pair) {
    return PreferencePairRecord{tokens_to_string(pair.prompt_tokens),
                                tokens_to_string(pair.chosen_tokens),
                                tokens_to_string(pair.rejected_tokens)};
}

PreferencePair from_record(const PreferencePairRecord& record) {
    return PreferencePair{tokens_from_string(record.prompt),
                          tokens_from_string(record.chosen),
                          tokens_from_string(record.rejected)};
}

ScoredSampleRecord to_record(const ScoredSample& sample) {
    return ScoredSampleRecord{sample.prompt_id, tokens_to_string(sample.response_tokens),
                              sample.confidence, sample.quality, sample.correct};
}

ScoredSample from_record(const ScoredSampleRecord& record) {
    ScoredSample s;
    s.prompt_id = record.prompt_id;
    s.response_tokens = tokens_from_string(record.response);
    s.confidence = record.confidence;
    s.quality = record.quality;
    s.correct = record.correct;
    return s;
}

}  // namespace conqord
