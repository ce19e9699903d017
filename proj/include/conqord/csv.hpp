#pragma once
// Minimal CSV output with deterministic number formatting, so reruns with
// identical configs produce byte-identical files.

#include <charconv>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <vector>

namespace conqord {

// Shortest round-trip decimal rendering of a double.
inline std::string fmt_double(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    (void)ec;
    return std::string(buf, ptr);
}

class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, std::initializer_list<std::string> header)
        : out_(path), columns_(header.size()) {
        if (!out_) throw std::runtime_error("cannot open " + path.string() + " for writing");
        std::string line;
        std::size_t i = 0;
        for (const std::string& h : header) {
            if (i++) line += ',';
            line += h;
        }
        out_ << line << '\n';
    }

    void row(const std::vector<std::string>& cells) {
        if (cells.size() != columns_) {
            throw std::invalid_argument("CsvWriter: row width mismatch");
        }
        std::string line;
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) line += ',';
            line += cells[i];
        }
        out_ << line << '\n';
    }

    void close() {
        out_.flush();
        out_.close();
    }

private:
    std::ofstream out_;
    std::size_t columns_ = 0;
};

}  // namespace conqord
