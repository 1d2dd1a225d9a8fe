#include "json_reader.hpp"

#include <cmath>

namespace bsde::cli {

Reader::Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + " must be an object");
}

bool Reader::has(const std::string& key) const { return j_.contains(key); }

const json& Reader::at(const std::string& key) {
    if (!j_.contains(key)) fail(key, "is required");
    seen_.insert(key);
    return j_.at(key);
}

void Reader::fail(const std::string& key, const std::string& what) const {
    throw ConfigError(path_ + "." + key + " " + what);
}

double Reader::number(const std::string& key) {
    const json& v = at(key);
    if (!v.is_number()) fail(key, "must be a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) fail(key, "must be finite");
    return x;
}

double Reader::number(const std::string& key, double fallback) { return has(key) ? number(key) : fallback; }

std::optional<double> Reader::optional_number(const std::string& key) {
    if (!has(key)) return std::nullopt;
    return number(key);
}

std::uint64_t Reader::count(const std::string& key) {
    const json& v = at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
        fail(key, "must be a nonnegative integer");
    }
    return v.get<std::uint64_t>();
}

std::uint64_t Reader::count(const std::string& key, std::uint64_t fallback) {
    return has(key) ? count(key) : fallback;
}

bool Reader::flag(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const json& v = at(key);
    if (!v.is_boolean()) fail(key, "must be a boolean");
    return v.get<bool>();
}

std::string Reader::text(const std::string& key) {
    const json& v = at(key);
    if (!v.is_string()) fail(key, "must be a string");
    return v.get<std::string>();
}

std::string Reader::text(const std::string& key, const std::string& fallback) {
    return has(key) ? text(key) : fallback;
}

std::vector<double> Reader::numbers(const std::string& key) {
    const json& v = at(key);
    if (!v.is_array()) fail(key, "must be an array of numbers");
    std::vector<double> out;
    for (const json& x : v) {
        if (!x.is_number()) fail(key, "must be an array of numbers");
        out.push_back(x.get<double>());
    }
    return out;
}

std::vector<double> Reader::numbers(const std::string& key, std::vector<double> fallback) {
    return has(key) ? numbers(key) : fallback;
}

std::vector<double> Reader::scalar_or_numbers(const std::string& key) {
    if (has(key) && j_.at(key).is_number()) return {number(key)};
    return numbers(key);
}

Reader Reader::object(const std::string& key) { return Reader(at(key), path_ + "." + key); }

std::optional<Reader> Reader::optional_object(const std::string& key) {
    if (!has(key)) return std::nullopt;
    return object(key);
}

std::vector<Reader> Reader::objects(const std::string& key) {
    const json& v = at(key);
    if (!v.is_array()) fail(key, "must be an array of objects");
    std::vector<Reader> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.emplace_back(v[i], path_ + "." + key + "[" + std::to_string(i) + "]");
    return out;
}

const json& Reader::raw(const std::string& key) { return at(key); }

void Reader::finish() const {
    for (const auto& item : j_.items()) {
        if (!seen_.count(item.key())) throw ConfigError(path_ + "." + item.key() + " is not a recognized key");
    }
}

}  // namespace bsde::cli
