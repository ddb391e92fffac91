#include "output.hpp"

#include "cantorlab/error.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>

namespace cli {

void Report::add_row(std::vector<Json> row) {
    if (row.size() != columns.size()) throw std::logic_error("row width does not match the header");
    rows.push_back(std::move(row));
}

Json number(double x) {
    if (std::isfinite(x)) return x;
    if (std::isnan(x)) return "nan";
    return x > 0 ? "inf" : "-inf";
}

Json number(const cantorlab::Real& x) { return number(cantorlab::to_double(x)); }

Json number(const std::optional<double>& x) { return x ? number(*x) : Json(nullptr); }

namespace {

std::string cell(const Json& v) {
    if (v.is_null()) return "";
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number_integer()) return v.dump();
    if (v.is_number()) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", v.get<double>());
        return buf;
    }
    return v.dump();
}

std::string quote(const std::string& field) {
    if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

}  // namespace

std::string to_csv(const Report& r) {
    std::string out;
    for (std::size_t i = 0; i < r.columns.size(); ++i) out += (i ? "," : "") + quote(r.columns[i]);
    out += "\r\n";
    for (const auto& row : r.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + quote(cell(row[i]));
        out += "\r\n";
    }
    return out;
}

std::string to_json_text(const Report& r) {
    Json doc;
    doc["command"] = r.command;
    doc["summary"] = r.summary;
    Json rows = Json::array();
    for (const auto& row : r.rows) {
        Json obj = Json::object();
        for (std::size_t i = 0; i < row.size(); ++i) obj[r.columns[i]] = row[i];
        rows.push_back(obj);
    }
    doc["rows"] = rows;
    return doc.dump(2) + "\n";
}

void emit(const std::string& text, const std::string& path) {
    if (path.empty()) {
        std::cout << text;
        std::cout.flush();
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw cantorlab::InvalidArgument("cannot write " + path);
    out << text;
}

}  // namespace cli
