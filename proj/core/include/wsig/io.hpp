#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace wsig::io {

/// Decimal float with 17 significant digits, '.' separator.
std::string format_double(double v);

/// Whole-file helpers; failures throw IoError naming the path.
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& content);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Column index by name; throws IoError if absent.
    std::size_t column(const std::string& name) const;
};

/// Minimal comma-separated reader (no quoting), LF or CRLF line endings.
CsvTable read_csv(const std::filesystem::path& path);

double parse_double(const std::string& s);

}  // namespace wsig::io
