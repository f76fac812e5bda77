#include "sbsim_cli/config.hpp"

#include <sbsim/units.hpp>

#include <charconv>
#include <cstdint>
#include <cmath>
#include <fstream>
#include <sstream>

namespace sbsim::cli {

namespace {

std::string join(const std::vector<std::string>& items) {
    std::string s;
    for (const auto& it : items) s += "\n  " + it;
    return s;
}

std::string show(double v) {
    std::ostringstream os;
    os.imbue(std::locale::classic());
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> issues)
    : std::runtime_error("invalid configuration:" + join(issues)), issues_(std::move(issues)) {}

void ParseLog::issue(const std::string& path, const std::string& reason) {
    issues.push_back(path + ": " + reason);
}

void ParseLog::throw_if_any() const {
    if (!issues.empty()) throw ConfigError(issues);
}

Node::Node(const json& j, std::string path, ParseLog& log) : j_(&j), path_(std::move(path)), log_(&log) {
    if (!j_->is_object()) {
        log_->issue(path_.empty() ? "<root>" : path_, "expected an object");
        j_ = nullptr;
    }
}

std::string Node::sub(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

void Node::record(const std::string& key, const std::string& value) { log_->resolved.emplace_back(sub(key), value); }

bool Node::has(const std::string& key) const { return j_ != nullptr && j_->contains(key); }

const json* Node::lookup(const std::string& key, bool required) {
    seen_.insert(key);
    if (j_ == nullptr) return nullptr;
    const auto it = j_->find(key);
    if (it == j_->end()) {
        if (required) log_->issue(sub(key), "missing required key");
        return nullptr;
    }
    return &*it;
}

const json* Node::raw(const std::string& key) { return lookup(key, false); }

double Node::number(const std::string& key, std::optional<double> fallback) {
    const json* v = lookup(key, !fallback.has_value());
    if (v == nullptr) {
        if (fallback) record(key, show(*fallback) + " (default)");
        return fallback.value_or(0.0);
    }
    if (!v->is_number()) {
        log_->issue(sub(key), "expected a number");
        return fallback.value_or(0.0);
    }
    const double d = v->get<double>();
    if (!std::isfinite(d)) log_->issue(sub(key), "must be finite");
    record(key, show(d));
    return d;
}

double Node::positive(const std::string& key, std::optional<double> fallback) {
    const bool present = has(key);
    const double d = number(key, fallback);
    if (present && !(d > 0.0)) log_->issue(sub(key), "must be > 0");
    return d;
}

double Node::non_negative(const std::string& key, std::optional<double> fallback) {
    const bool present = has(key);
    const double d = number(key, fallback);
    if (present && !(d >= 0.0)) log_->issue(sub(key), "must be >= 0");
    return d;
}

double Node::frequency(const std::string& stem, std::optional<double> fallback_hz) {
    return hz(number(stem + "_hz", fallback_hz));
}

std::size_t Node::count(const std::string& key, std::optional<std::size_t> fallback) {
    const json* v = lookup(key, !fallback.has_value());
    if (v == nullptr) {
        if (fallback) record(key, std::to_string(*fallback) + " (default)");
        return fallback.value_or(0);
    }
    if (!v->is_number_integer() || v->get<std::int64_t>() < 0) {
        log_->issue(sub(key), "expected a non-negative integer");
        return fallback.value_or(0);
    }
    const auto n = v->get<std::size_t>();
    record(key, std::to_string(n));
    return n;
}

bool Node::flag(const std::string& key, bool fallback) {
    const json* v = lookup(key, false);
    if (v == nullptr) {
        record(key, fallback ? "true (default)" : "false (default)");
        return fallback;
    }
    if (!v->is_boolean()) {
        log_->issue(sub(key), "expected true or false");
        return fallback;
    }
    record(key, v->get<bool>() ? "true" : "false");
    return v->get<bool>();
}

std::string Node::text(const std::string& key, std::optional<std::string> fallback) {
    const json* v = lookup(key, !fallback.has_value());
    if (v == nullptr) {
        if (fallback) record(key, *fallback + " (default)");
        return fallback.value_or("");
    }
    if (!v->is_string()) {
        log_->issue(sub(key), "expected a string");
        return fallback.value_or("");
    }
    record(key, v->get<std::string>());
    return v->get<std::string>();
}

std::vector<double> Node::numbers(const std::string& key) {
    std::vector<double> out;
    const json* v = lookup(key, true);
    if (v == nullptr) return out;
    if (!v->is_array()) {
        log_->issue(sub(key), "expected an array of numbers");
        return out;
    }
    std::string shown;
    for (std::size_t i = 0; i < v->size(); ++i) {
        const auto& e = (*v)[i];
        if (!e.is_number() || !std::isfinite(e.get<double>())) {
            log_->issue(sub(key) + "." + std::to_string(i), "expected a finite number");
            continue;
        }
        out.push_back(e.get<double>());
        shown += (shown.empty() ? "" : ", ") + show(out.back());
    }
    record(key, "[" + shown + "]");
    return out;
}

std::vector<double> Node::frequencies(const std::string& stem) {
    auto v = numbers(stem + "_hz");
    for (auto& x : v) x = hz(x);
    return v;
}

Node Node::child(const std::string& key) {
    static const json empty = json::object();
    const json* v = lookup(key, true);
    return Node(v != nullptr ? *v : empty, sub(key), *log_);
}

std::optional<Node> Node::optional_child(const std::string& key) {
    const json* v = lookup(key, false);
    if (v == nullptr) return std::nullopt;
    return Node(*v, sub(key), *log_);
}

std::vector<Node> Node::children(const std::string& key) {
    std::vector<Node> out;
    const json* v = lookup(key, true);
    if (v == nullptr) return out;
    if (!v->is_array()) {
        log_->issue(sub(key), "expected an array of objects");
        return out;
    }
    for (std::size_t i = 0; i < v->size(); ++i) out.emplace_back((*v)[i], sub(key) + "." + std::to_string(i), *log_);
    return out;
}

void Node::finish() {
    if (j_ == nullptr) return;
    for (const auto& [key, value] : j_->items()) {
        if (!seen_.count(key)) log_->issue(sub(key), "unknown key");
    }
}

json load_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError({path.string() + ": cannot open config file"});
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError({path.string() + ": " + e.what()});
    }
}

void set_path(json& root, const std::string& dotted, const json& value) {
    json* node = &root;
    std::size_t start = 0;
    while (true) {
        const auto dot = dotted.find('.', start);
        const std::string part = dotted.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (part.empty()) throw ConfigError({dotted + ": empty path component"});
        json* next = nullptr;
        if (node->is_array()) {
            std::size_t idx = 0;
            const auto [p, ec] = std::from_chars(part.data(), part.data() + part.size(), idx);
            if (ec != std::errc{} || p != part.data() + part.size() || idx >= node->size()) {
                throw ConfigError({dotted + ": '" + part + "' is not a valid index"});
            }
            next = &(*node)[idx];
        } else if (node->is_object()) {
            next = &(*node)[part];
        } else {
            throw ConfigError({dotted + ": cannot descend into a scalar at '" + part + "'"});
        }
        if (dot == std::string::npos) {
            *next = value;
            return;
        }
        node = next;
        start = dot + 1;
    }
}

}  // namespace sbsim::cli
