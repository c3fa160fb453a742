#pragma once

#include <string>
#include <vector>

#include "callias/json_util.hpp"

namespace callias {

extern const char* const kReportSchema;

std::string sha256_hex(const std::string& data);
std::string sha256_file(const std::string& path);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

// Two-space indented dump with a trailing newline.
std::string dump_json(const json& j);

// Shortest text that reads back to the same double ("%.17g" fallback), "nan"/"inf" spelled out.
std::string fmt_double(double v);

// RFC 4180: CRLF line endings, fields quoted when they contain a comma, quote, CR or LF.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header);
    void add_row(std::vector<std::string> fields);
    std::string str() const;
    size_t rows() const { return rows_.size(); }

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

std::string csv_escape(const std::string& field);

// Parses an RFC 4180 document into rows of fields (used by tests).
std::vector<std::vector<std::string>> parse_csv(const std::string& text);

}  // namespace callias
