#pragma once

#include "cantorlab/scaffold.hpp"

#include <CLI11.hpp>

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace cli {

using cantorlab::Json;

// `extended` is a real or the token "inf".
enum class Kind { integer, real, extended, text, flag, list };

struct OptSpec {
    std::string key;  // config key; the flag is --key with '_' -> '-'
    Kind kind;
    Json fallback;    // null when the option has no default
    std::string help;
};

// One subcommand's options: raw flag strings from CLI11 merged over the
// optional JSON config file and the declared defaults.
class Options {
public:
    Options(std::string command, std::vector<OptSpec> specs);

    void attach(CLI::App& app);
    // Loads --config if given, applies flags, validates; throws InvalidArgument.
    void resolve();

    const std::string& command() const { return command_; }
    bool has(const std::string& key) const;
    long long integer(const std::string& key) const;
    double real(const std::string& key) const;
    std::string text(const std::string& key) const;
    bool flag(const std::string& key) const;
    std::vector<double> list(const std::string& key) const;
    // True when the value came from a flag or the config file.
    bool given(const std::string& key) const;

private:
    const OptSpec& spec(const std::string& key) const;
    Json convert(const OptSpec& spec, const std::string& raw) const;
    void check_type(const OptSpec& spec, const Json& value) const;

    std::string command_;
    std::vector<OptSpec> specs_;
    std::map<std::string, std::string> raw_;
    std::map<std::string, bool> flags_;
    std::string config_path_;
    std::map<std::string, Json> values_;
    std::map<std::string, bool> given_;
};

// Options shared by every subcommand: config, out, format, jobs, check, seed.
std::vector<OptSpec> common_specs();

}  // namespace cli
