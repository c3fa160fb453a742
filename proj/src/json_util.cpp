#include "callias/json_util.hpp"

#include "callias/error.hpp"

namespace callias {

StrictObject::StrictObject(const json& j, std::string path)
    : j_(j), path_(std::move(path))
{
    if (!j_.is_object())
        fail(ErrorKind::Config, "schema: '" + path_ + "' must be an object");
}

std::string StrictObject::child_path(const std::string& key) const
{
    return path_.empty() ? key : path_ + "." + key;
}

bool StrictObject::has(const std::string& key) const
{
    return j_.contains(key) && !j_.at(key).is_null();
}

const json& StrictObject::at(const std::string& key)
{
    if (!j_.contains(key))
        fail(ErrorKind::Config, "schema: missing key '" + child_path(key) + "'");
    used_.insert(key);
    return j_.at(key);
}

double StrictObject::number(const std::string& key)
{
    const json& v = at(key);
    if (!v.is_number())
        fail(ErrorKind::Config, "schema: '" + child_path(key) + "' must be a number");
    return v.get<double>();
}

double StrictObject::number_or(const std::string& key, double fallback)
{
    if (!j_.contains(key))
        return fallback;
    if (j_.at(key).is_null()) {
        used_.insert(key);
        return fallback;
    }
    return number(key);
}

long StrictObject::integer(const std::string& key)
{
    const json& v = at(key);
    if (!v.is_number_integer())
        fail(ErrorKind::Config, "schema: '" + child_path(key) + "' must be an integer");
    return v.get<long>();
}

long StrictObject::integer_or(const std::string& key, long fallback)
{
    if (!j_.contains(key))
        return fallback;
    return integer(key);
}

std::string StrictObject::string(const std::string& key)
{
    const json& v = at(key);
    if (!v.is_string())
        fail(ErrorKind::Config, "schema: '" + child_path(key) + "' must be a string");
    return v.get<std::string>();
}

std::string StrictObject::string_or(const std::string& key, const std::string& fallback)
{
    if (!j_.contains(key))
        return fallback;
    return string(key);
}

bool StrictObject::boolean_or(const std::string& key, bool fallback)
{
    if (!j_.contains(key))
        return fallback;
    const json& v = at(key);
    if (!v.is_boolean())
        fail(ErrorKind::Config, "schema: '" + child_path(key) + "' must be a boolean");
    return v.get<bool>();
}

void StrictObject::finish() const
{
    for (auto it = j_.begin(); it != j_.end(); ++it) {
        if (!used_.count(it.key()))
            fail(ErrorKind::Config, "schema: unknown key '" + child_path(it.key()) + "'");
    }
}

}  // namespace callias
