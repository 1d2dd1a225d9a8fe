#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace bsde::cli {

using json = nlohmann::json;

/// Schema violation in a run config; maps to the usage exit code.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Strict view of a JSON object: every key must be read before finish().
class Reader {
public:
    Reader(const json& j, std::string path);

    bool has(const std::string& key) const;
    const std::string& path() const noexcept { return path_; }

    double number(const std::string& key);
    double number(const std::string& key, double fallback);
    std::optional<double> optional_number(const std::string& key);
    std::uint64_t count(const std::string& key);
    std::uint64_t count(const std::string& key, std::uint64_t fallback);
    bool flag(const std::string& key, bool fallback);
    std::string text(const std::string& key);
    std::string text(const std::string& key, const std::string& fallback);
    std::vector<double> numbers(const std::string& key);
    std::vector<double> numbers(const std::string& key, std::vector<double> fallback);
    /// A number or an array of numbers.
    std::vector<double> scalar_or_numbers(const std::string& key);

    Reader object(const std::string& key);
    std::optional<Reader> optional_object(const std::string& key);
    std::vector<Reader> objects(const std::string& key);
    const json& raw(const std::string& key);

    /// Throws ConfigError naming the first key that was never read.
    void finish() const;

private:
    const json& at(const std::string& key);
    [[noreturn]] void fail(const std::string& key, const std::string& what) const;

    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

}  // namespace bsde::cli
