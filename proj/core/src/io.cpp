#include "wsig/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "wsig/errors.hpp"

namespace wsig::io {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << content;
    if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::size_t CsvTable::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return i;
    }
    throw IoError("CSV column '" + name + "' not found");
}

namespace {

std::vector<std::string> split_line(std::string line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        fields.push_back(line.substr(start, pos - start));
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    return fields;
}

}  // namespace

CsvTable read_csv(const std::filesystem::path& path) {
    std::istringstream in(read_text_file(path));
    CsvTable table;
    std::string line;
    if (!std::getline(in, line)) throw IoError("'" + path.string() + "' is empty");
    table.header = split_line(line);
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        auto fields = split_line(line);
        if (fields.size() != table.header.size()) {
            throw IoError("'" + path.string() + "' line " + std::to_string(lineno) + ": expected " +
                          std::to_string(table.header.size()) + " fields, got " +
                          std::to_string(fields.size()));
        }
        table.rows.push_back(std::move(fields));
    }
    return table;
}

double parse_double(const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw IoError("not a number: '" + s + "'");
    }
    if (used != s.size()) throw IoError("not a number: '" + s + "'");
    return v;
}

}  // namespace wsig::io
