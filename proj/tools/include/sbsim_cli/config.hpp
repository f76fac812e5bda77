// Strict reader over JSON run configs.
//
// Every key that is read is remembered; whatever is left over at finish()
// is reported as unknown. Problems are collected with their key path and
// thrown together as one ConfigError. Keys ending in `_hz` hold ordinary
// frequencies and are returned in rad/s.

#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace sbsim::cli {

using json = nlohmann::json;

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<std::string> issues);
    const std::vector<std::string>& issues() const noexcept { return issues_; }

private:
    std::vector<std::string> issues_;
};

// Shared state of one parse: schema issues and the resolved parameter table.
struct ParseLog {
    std::vector<std::string> issues;
    std::vector<std::pair<std::string, std::string>> resolved;  // path, value (defaults included)

    void issue(const std::string& path, const std::string& reason);
    void throw_if_any() const;
};

class Node {
public:
    Node(const json& j, std::string path, ParseLog& log);

    const std::string& path() const noexcept { return path_; }
    bool has(const std::string& key) const;

    double number(const std::string& key, std::optional<double> fallback = std::nullopt);
    double positive(const std::string& key, std::optional<double> fallback = std::nullopt);
    double non_negative(const std::string& key, std::optional<double> fallback = std::nullopt);
    // Reads `<stem>_hz` and returns rad/s.
    double frequency(const std::string& stem, std::optional<double> fallback_hz = std::nullopt);
    std::size_t count(const std::string& key, std::optional<std::size_t> fallback = std::nullopt);
    bool flag(const std::string& key, bool fallback);
    std::string text(const std::string& key, std::optional<std::string> fallback = std::nullopt);
    std::vector<double> numbers(const std::string& key);
    std::vector<double> frequencies(const std::string& stem);  // `<stem>_hz` array, rad/s

    Node child(const std::string& key);
    std::optional<Node> optional_child(const std::string& key);
    std::vector<Node> children(const std::string& key);  // array of objects
    // The raw value, marked as read (for values with several accepted shapes).
    const json* raw(const std::string& key);

    // Reports keys that were never read.
    void finish();

private:
    const json* lookup(const std::string& key, bool required);
    std::string sub(const std::string& key) const;
    void record(const std::string& key, const std::string& value);

    const json* j_;
    std::string path_;
    ParseLog* log_;
    std::set<std::string> seen_;
};

json load_json(const std::filesystem::path& path);

// Applies `a.b.0.c=value` style overrides.
void set_path(json& root, const std::string& dotted, const json& value);

}  // namespace sbsim::cli
