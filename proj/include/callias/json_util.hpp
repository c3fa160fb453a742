#pragma once

#include <set>
#include <string>

#include <json.hpp>

namespace callias {

using json = nlohmann::json;

// Reads keys from a JSON object and rejects any key that was never consumed.
class StrictObject {
public:
    StrictObject(const json& j, std::string path);

    bool has(const std::string& key) const;
    const json& at(const std::string& key);
    double number(const std::string& key);
    double number_or(const std::string& key, double fallback);
    long integer(const std::string& key);
    long integer_or(const std::string& key, long fallback);
    std::string string(const std::string& key);
    std::string string_or(const std::string& key, const std::string& fallback);
    bool boolean_or(const std::string& key, bool fallback);
    const std::string& path() const { return path_; }
    std::string child_path(const std::string& key) const;

    void finish() const;

private:
    const json& j_;
    std::string path_;
    std::set<std::string> used_;
};

}  // namespace callias
