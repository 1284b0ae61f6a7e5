#include "helmdd/config.hpp"

#include <fstream>
#include <sstream>

#include "helmdd/grid.hpp"

namespace helmdd {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

Config Config::parse(std::istream& is, const std::string& source) {
    Config cfg;
    cfg.source_ = source;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            std::ostringstream os;
            os << source << ":" << lineno << ": expected 'section.key = value'";
            throw Error(os.str());
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || key.find('.') == std::string::npos) {
            std::ostringstream os;
            os << source << ":" << lineno << ": key '" << key << "' must have the form section.key";
            throw Error(os.str());
        }
        if (cfg.values_.count(key)) {
            std::ostringstream os;
            os << source << ":" << lineno << ": duplicate key '" << key << "'";
            throw Error(os.str());
        }
        cfg.values_[key] = value;
    }
    return cfg;
}

Config Config::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config file '" + path + "'");
    return parse(in, path);
}

std::optional<std::string> Config::get(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    return it->second;
}

std::string Config::get_or(const std::string& key, const std::string& fallback) const {
    return get(key).value_or(fallback);
}

double Config::number_or(const std::string& key, double fallback) const {
    const auto v = get(key);
    if (!v) return fallback;
    try {
        std::size_t used = 0;
        const double d = std::stod(*v, &used);
        if (used != v->size()) throw std::invalid_argument("trailing characters");
        return d;
    } catch (const std::exception&) {
        throw Error("config key '" + key + "': expected a number, got '" + *v + "'");
    }
}

int Config::integer_or(const std::string& key, int fallback) const {
    const auto v = get(key);
    if (!v) return fallback;
    try {
        std::size_t used = 0;
        const int i = std::stoi(*v, &used);
        if (used != v->size()) throw std::invalid_argument("trailing characters");
        return i;
    } catch (const std::exception&) {
        throw Error("config key '" + key + "': expected an integer, got '" + *v + "'");
    }
}

std::vector<std::string> Config::list_or(const std::string& key, const std::vector<std::string>& fallback) const {
    const auto v = get(key);
    if (!v) return fallback;
    return split_list(*v);
}

void Config::reject_unknown(const std::set<std::string>& known) const {
    for (const auto& [key, value] : values_)
        if (!known.count(key)) throw Error(source_ + ": unknown config key '" + key + "'");
}

}  // namespace helmdd
