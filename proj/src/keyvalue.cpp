#include "scholarperf/keyvalue.hpp"

#include <fstream>
#include <istream>

#include "scholarperf/csv.hpp"
#include "scholarperf/error.hpp"

namespace scholarperf {

KeyValueConfig KeyValueConfig::parse(std::istream& in) {
    KeyValueConfig cfg;
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const std::string stripped = trim(line);
        if (stripped.empty()) continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos)
            throw InputError("config line " + std::to_string(number) + ": expected key = value");
        std::string key = trim(stripped.substr(0, eq));
        if (key.empty()) throw InputError("config line " + std::to_string(number) + ": empty key");
        if (cfg.values_.count(key))
            throw InputError("config line " + std::to_string(number) + ": duplicate key '" + key + "'");
        cfg.values_[key] = trim(stripped.substr(eq + 1));
    }
    return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open config file '" + path + "'");
    return parse(in);
}

std::optional<std::string> KeyValueConfig::get(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    return it->second;
}

std::string KeyValueConfig::get_or(const std::string& key, const std::string& fallback) const {
    return get(key).value_or(fallback);
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
    auto v = get(key);
    return v ? parse_double(*v, key) : fallback;
}

long long KeyValueConfig::get_integer(const std::string& key, long long fallback) const {
    auto v = get(key);
    return v ? parse_integer(*v, key) : fallback;
}

}  // namespace scholarperf
