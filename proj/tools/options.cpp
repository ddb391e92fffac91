#include "options.hpp"

#include "cantorlab/error.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <sstream>

namespace cli {

using cantorlab::InvalidArgument;

namespace {

std::string flag_name(const std::string& key) {
    std::string out = key;
    std::replace(out.begin(), out.end(), '_', '-');
    return "--" + out;
}

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            throw InvalidArgument("not a number list: " + text);
        }
        if (used != item.size()) throw InvalidArgument("not a number list: " + text);
        out.push_back(v);
    }
    if (out.empty()) throw InvalidArgument("empty number list");
    return out;
}

}  // namespace

std::vector<OptSpec> common_specs() {
    return {
        {"out", Kind::text, nullptr, "output file (stdout when absent)"},
        {"format", Kind::text, "csv", "csv or json"},
        {"jobs", Kind::integer, 1, "worker threads"},
        {"seed", Kind::integer, 1, "random seed"},
        {"check", Kind::flag, false, "exit 4 when an invariant fails"},
    };
}

Options::Options(std::string command, std::vector<OptSpec> specs) : command_(std::move(command)) {
    specs_ = common_specs();
    for (auto& s : specs) specs_.push_back(std::move(s));
}

void Options::attach(CLI::App& app) {
    app.add_option("--config", config_path_, "JSON config file; flags override its entries");
    for (const auto& s : specs_) {
        if (s.kind == Kind::flag)
            app.add_flag(flag_name(s.key), flags_[s.key], s.help);
        else
            app.add_option(flag_name(s.key), raw_[s.key], s.help);
    }
}

const OptSpec& Options::spec(const std::string& key) const {
    for (const auto& s : specs_)
        if (s.key == key) return s;
    throw std::logic_error("undeclared option " + key);
}

Json Options::convert(const OptSpec& s, const std::string& raw) const {
    try {
        switch (s.kind) {
            case Kind::integer: {
                std::size_t used = 0;
                const long long v = std::stoll(raw, &used);
                if (used != raw.size()) break;
                return v;
            }
            case Kind::real: {
                std::size_t used = 0;
                const double v = std::stod(raw, &used);
                if (used != raw.size()) break;
                return v;
            }
            case Kind::extended: {
                if (raw == "inf") return raw;
                std::size_t used = 0;
                const double v = std::stod(raw, &used);
                if (used != raw.size()) break;
                return v;
            }
            case Kind::text: return raw;
            case Kind::flag: return true;
            case Kind::list: {
                Json arr = Json::array();
                for (double v : parse_list(raw)) arr.push_back(v);
                return arr;
            }
        }
    } catch (const InvalidArgument&) {
        throw;
    } catch (const std::exception&) {
    }
    throw InvalidArgument("bad value for " + flag_name(s.key) + ": " + raw);
}

void Options::check_type(const OptSpec& s, const Json& v) const {
    bool ok = false;
    switch (s.kind) {
        case Kind::integer: ok = v.is_number_integer(); break;
        case Kind::real: ok = v.is_number(); break;
        case Kind::extended: ok = v.is_number() || (v.is_string() && v.get<std::string>() == "inf"); break;
        case Kind::text: ok = v.is_string(); break;
        case Kind::flag: ok = v.is_boolean(); break;
        case Kind::list:
            ok = v.is_array() && !v.empty() &&
                 std::all_of(v.begin(), v.end(), [](const Json& e) { return e.is_number(); });
            break;
    }
    if (!ok) throw InvalidArgument("config key '" + s.key + "' has the wrong type");
}

void Options::resolve() {
    for (const auto& s : specs_) {
        if (!s.fallback.is_null()) values_[s.key] = s.fallback;
        given_[s.key] = false;
    }
    if (!config_path_.empty()) {
        std::ifstream in(config_path_);
        if (!in) throw InvalidArgument("cannot open config " + config_path_);
        Json doc;
        try {
            doc = Json::parse(in);
        } catch (const Json::parse_error& e) {
            throw InvalidArgument(std::string("config is not valid JSON: ") + e.what());
        }
        if (!doc.is_object()) throw InvalidArgument("config must be a JSON object");
        for (const auto& [key, value] : doc.items()) {
            if (key == "command") {
                if (!value.is_string() || value.get<std::string>() != command_)
                    throw InvalidArgument("config is for command '" + value.dump() + "', not '" + command_ + "'");
                continue;
            }
            const auto it = std::find_if(specs_.begin(), specs_.end(), [&](const OptSpec& s) { return s.key == key; });
            if (it == specs_.end()) throw InvalidArgument("unknown config key '" + key + "' for " + command_);
            Json v = value;
            if (it->kind == Kind::list && v.is_string()) v = convert(*it, v.get<std::string>());
            check_type(*it, v);
            values_[key] = v;
            given_[key] = true;
        }
    }
    for (const auto& s : specs_) {
        if (s.kind == Kind::flag) {
            if (flags_[s.key]) {
                values_[s.key] = true;
                given_[s.key] = true;
            }
        } else if (!raw_[s.key].empty()) {
            values_[s.key] = convert(s, raw_[s.key]);
            given_[s.key] = true;
        }
    }
    const std::string fmt = text("format");
    if (fmt != "csv" && fmt != "json") throw InvalidArgument("--format must be csv or json");
    if (integer("jobs") < 1) throw InvalidArgument("--jobs must be positive");
    if (integer("seed") < 0) throw InvalidArgument("--seed must be non-negative");
}

bool Options::has(const std::string& key) const {
    spec(key);
    return values_.count(key) > 0;
}

bool Options::given(const std::string& key) const {
    spec(key);
    const auto it = given_.find(key);
    return it != given_.end() && it->second;
}

long long Options::integer(const std::string& key) const {
    spec(key);
    const auto it = values_.find(key);
    if (it == values_.end()) throw InvalidArgument("missing required option " + flag_name(key));
    return it->second.get<long long>();
}

double Options::real(const std::string& key) const {
    spec(key);
    const auto it = values_.find(key);
    if (it == values_.end()) throw InvalidArgument("missing required option " + flag_name(key));
    if (it->second.is_string()) return std::numeric_limits<double>::infinity();
    return it->second.get<double>();
}

std::string Options::text(const std::string& key) const {
    spec(key);
    const auto it = values_.find(key);
    if (it == values_.end()) throw InvalidArgument("missing required option " + flag_name(key));
    return it->second.get<std::string>();
}

bool Options::flag(const std::string& key) const {
    spec(key);
    const auto it = values_.find(key);
    return it != values_.end() && it->second.get<bool>();
}

std::vector<double> Options::list(const std::string& key) const {
    spec(key);
    const auto it = values_.find(key);
    if (it == values_.end()) throw InvalidArgument("missing required option " + flag_name(key));
    return it->second.get<std::vector<double>>();
}

}  // namespace cli
