#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace helmdd {

/// Flat "section.key = value" text configuration. '#' starts a comment; blank lines are ignored;
/// list values are comma-separated.
class Config {
public:
    static Config parse(std::istream& is, const std::string& source = "<stream>");
    static Config load(const std::string& path);

    bool has(const std::string& key) const { return values_.count(key) != 0; }
    std::optional<std::string> get(const std::string& key) const;
    std::string get_or(const std::string& key, const std::string& fallback) const;
    double number_or(const std::string& key, double fallback) const;
    int integer_or(const std::string& key, int fallback) const;
    std::vector<std::string> list_or(const std::string& key, const std::vector<std::string>& fallback) const;

    void set(const std::string& key, const std::string& value) { values_[key] = value; }
    /// Throws naming the first key not in `known`.
    void reject_unknown(const std::set<std::string>& known) const;

    const std::map<std::string, std::string>& entries() const { return values_; }

private:
    std::map<std::string, std::string> values_;
    std::string source_;
};

std::string trim(const std::string& s);
std::vector<std::string> split_list(const std::string& s);

}  // namespace helmdd
