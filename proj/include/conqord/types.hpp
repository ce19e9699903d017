#pragma once
// Domain types shared across the library.
//
// Tokens are opaque small-integer symbols; the environment defines which
// ranges act as answer, confidence and end-of-sequence tokens.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace conqord {

using Token = int;
using TokenSeq = std::vector<Token>;

// One prompt/response/verbalized-confidence triple with its quality score
// and gold correctness; the unit of calibration.
struct ScoredSample {
    std::string prompt_id;
    TokenSeq prompt_tokens;
    TokenSeq response_tokens;
    double confidence = 0.0;      // verbalized confidence in [0,1]
    double quality = 0.0;         // reward-model score, unbounded
    std::optional<bool> correct;  // gold correctness, set by env judge or offline ratings
};

// Prompt with a high-quality and a low-quality response; the training unit
// for the quality reward model.
struct PreferencePair {
    TokenSeq prompt_tokens;
    TokenSeq chosen_tokens;    // high-quality response
    TokenSeq rejected_tokens;  // low-quality response
};

struct VerbalizedOutput {
    std::string answer_text;
    double confidence = 0.0;
};

enum class RecordKind { preference_pairs, scored_samples, qa_items };

const char* record_kind_name(RecordKind kind);

struct DatasetManifest {
    std::filesystem::path path;
    RecordKind record_kind = RecordKind::scored_samples;
    std::size_t count = 0;
};

// Environment description record: one prompt with its gold answer and the
// probability that the gold is resampled to the alternate candidate.
struct QaItem {
    std::string prompt_id;
    std::string question;
    std::string gold_answer;
    double ambiguity = 0.0;
};

enum class ParseErrorKind { missing_confidence, out_of_range, missing_answer };

class ParseError : public std::runtime_error {
public:
    ParseError(ParseErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}
    ParseErrorKind kind() const { return kind_; }

private:
    ParseErrorKind kind_;
};

// I/O failure on a record file; line is 1-based, 0 when not line-specific.
class RecordError : public std::runtime_error {
public:
    RecordError(std::size_t line, const std::string& what)
        : std::runtime_error(what), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_ = 0;
};

// Space-joined rendering of a token sequence ("3 17 2"); the string form
// used by every JSONL schema.
std::string tokens_to_string(const TokenSeq& tokens);
TokenSeq tokens_from_string(const std::string& text);

}  // namespace conqord
