#pragma once

#include "cantorlab/real.hpp"
#include "cantorlab/scaffold.hpp"

#include <optional>
#include <string>
#include <vector>

namespace cli {

using cantorlab::Json;

// A flat result table plus scalar metadata. CSV output carries the table
// only; JSON output carries both.
struct Report {
    std::string command;
    std::vector<std::string> columns;
    std::vector<std::vector<Json>> rows;
    Json summary = Json::object();

    void add_row(std::vector<Json> row);
};

Json number(double x);
Json number(const cantorlab::Real& x);
Json number(const std::optional<double>& x);

// RFC 4180: CRLF line ends, fields quoted when they hold a comma, quote or
// line break.
std::string to_csv(const Report& r);
std::string to_json_text(const Report& r);

// Writes to `path`, or stdout when it is empty.
void emit(const std::string& text, const std::string& path);

}  // namespace cli
