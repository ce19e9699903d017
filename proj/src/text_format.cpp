#include "conqord/text_format.hpp"

#include <cstdio>
#include <cstdlib>
#include <stdexcept>

namespace conqord {

namespace {

constexpr const char* kAnswerMarker = "### Answer:";
constexpr const char* kConfidenceMarker = "### Confidence:";

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace

std::string format_prompt(const std::string& question, const std::string& answer,
                          double confidence) {
    if (!(confidence >= 0.0 && confidence <= 1.0)) {
        throw std::out_of_range("format_prompt: confidence must lie in [0,1]");
    }
    char conf[16];
    std::snprintf(conf, sizeof(conf), "%.1f", confidence);
    std::string out;
    out.reserve(question.size() + answer.size() + 64);
    out += "### Question: ";
    out += question;
    out += ".\n### Answer: ";
    out += answer;
    out += ".\n### Confidence: ";
    out += conf;
    out += ".";
    return out;
}

VerbalizedOutput parse_confidence(const std::string& text) {
    std::size_t apos = text.find(kAnswerMarker);
    if (apos == std::string::npos) {
        throw ParseError(ParseErrorKind::missing_answer,
                         "parse_confidence: no '### Answer:' marker");
    }
    std::size_t astart = apos + std::string(kAnswerMarker).size();
    std::size_t aend = text.find('\n', astart);
    if (aend == std::string::npos) aend = text.size();
    std::string answer = trim(text.substr(astart, aend - astart));
    if (!answer.empty() && answer.back() == '.') answer.pop_back();
    answer = trim(answer);

    std::size_t cpos = text.find(kConfidenceMarker);
    if (cpos == std::string::npos) {
        throw ParseError(ParseErrorKind::missing_confidence,
                         "parse_confidence: no '### Confidence:' marker");
    }
    std::size_t cstart = cpos + std::string(kConfidenceMarker).size();
    const char* begin = text.c_str() + cstart;
    char* end = nullptr;
    double value = std::strtod(begin, &end);
    if (end == begin) {
        throw ParseError(ParseErrorKind::missing_confidence,
                         "parse_confidence: no number after '### Confidence:'");
    }
    if (!(value >= 0.0 && value <= 1.0)) {
        throw ParseError(ParseErrorKind::out_of_range,
                         "parse_confidence: confidence outside [0,1]");
    }
    return VerbalizedOutput{answer, value};
}

}  // namespace conqord
