#pragma once
// Verbalized-QA text formats: the `### Question/Answer/Confidence` prompt
// template and its parser.

#include <string>

#include "conqord/types.hpp"

namespace conqord {

// Renders `### Question: {q}.\n### Answer: {a}.\n### Confidence: {c}.`
// with the confidence printed to one decimal digit. Throws
// std::out_of_range when confidence is outside [0,1].
std::string format_prompt(const std::string& question, const std::string& answer,
                          double confidence);

// Extracts the answer segment after `### Answer:` and the first real number
// after the first `### Confidence:` marker. A trailing period is tolerated
// on both. Throws ParseError with kind missing_answer, missing_confidence
// or out_of_range.
VerbalizedOutput parse_confidence(const std::string& text);

}  // namespace conqord
