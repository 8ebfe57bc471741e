#pragma once

// flat key = value run configuration. One assignment per line, '#' comments,
// unknown keys are an error (typo safety). Every key has a documented default
// so a minimal config only states what it changes.

#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>

namespace kglab {

inline std::string trim_copy(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

class Config {
public:
    Config() = default;

    static Config parse(std::istream& in, const std::set<std::string>& schema) {
        Config cfg;
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            line = trim_copy(line);
            if (line.empty()) continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw std::invalid_argument("config line " + std::to_string(lineno) +
                                            ": expected key = value");
            const std::string key = trim_copy(line.substr(0, eq));
            const std::string val = trim_copy(line.substr(eq + 1));
            if (key.empty())
                throw std::invalid_argument("config line " + std::to_string(lineno) +
                                            ": empty key");
            if (!schema.count(key))
                throw std::invalid_argument("config line " + std::to_string(lineno) +
                                            ": unknown key '" + key + "'");
            if (cfg.values_.count(key))
                throw std::invalid_argument("config line " + std::to_string(lineno) +
                                            ": duplicate key '" + key + "'");
            cfg.values_[key] = val;
        }
        return cfg;
    }

    static Config parse_string(const std::string& text, const std::set<std::string>& schema) {
        std::istringstream in(text);
        return parse(in, schema);
    }

    static Config parse_file(const std::string& path, const std::set<std::string>& schema) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open config file: " + path);
        return parse(in, schema);
    }

    bool has(const std::string& key) const { return values_.count(key) > 0; }

    std::string get_string(const std::string& key, const std::string& def) const {
        const auto it = values_.find(key);
        return it == values_.end() ? def : it->second;
    }

    double get_double(const std::string& key, double def) const {
        const auto it = values_.find(key);
        if (it == values_.end()) return def;
        std::size_t pos = 0;
        double v;
        try {
            v = std::stod(it->second, &pos);
        } catch (const std::exception&) {
            throw std::invalid_argument("config key '" + key + "': not a number: " + it->second);
        }
        if (pos != it->second.size())
            throw std::invalid_argument("config key '" + key + "': trailing junk: " + it->second);
        return v;
    }

    long get_int(const std::string& key, long def) const {
        const auto it = values_.find(key);
        if (it == values_.end()) return def;
        std::size_t pos = 0;
        long v;
        try {
            v = std::stol(it->second, &pos);
        } catch (const std::exception&) {
            throw std::invalid_argument("config key '" + key + "': not an integer: " + it->second);
        }
        if (pos != it->second.size())
            throw std::invalid_argument("config key '" + key + "': trailing junk: " + it->second);
        return v;
    }

    bool get_bool(const std::string& key, bool def) const {
        const auto it = values_.find(key);
        if (it == values_.end()) return def;
        if (it->second == "true" || it->second == "1") return true;
        if (it->second == "false" || it->second == "0") return false;
        throw std::invalid_argument("config key '" + key + "': expected true/false: " + it->second);
    }

    const std::map<std::string, std::string>& values() const { return values_; }

    // canonical text form: sorted key=value lines; used for the manifest hash
    std::string canonical() const {
        std::string out;
        for (const auto& [k, v] : values_) out += k + "=" + v + "\n";
        return out;
    }

private:
    std::map<std::string, std::string> values_;
};

// FNV-1a over the canonical text; cheap and stable across platforms
inline std::string config_hash(const Config& cfg) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : cfg.canonical()) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// full schema shared by every subcommand; each stage reads its slice
inline const std::set<std::string>& run_config_schema() {
    static const std::set<std::string> s = {
        // stage selection for fullrun: all | toy
        "stages",
        // spectral core
        "geometry", "grid_points", "domain_radius", "mass",
        "potential_kind",  // free | gaussian | double_gaussian
        "well_depth", "well_width", "well_center",
        "well2_depth", "well2_width", "well2_center",
        // bound-state continuation
        "continuation_z_max", "continuation_samples",
        // resonance table
        "resonance_N", "resonance_r", "resonance_tol",
        // FGR measure
        "fgr_lambda_count",
        // toy model
        "toy_grid", "toy_box", "toy_amplitude", "toy_sigma", "toy_z0",
        "toy_t_final", "toy_dt", "toy_stride", "toy_sponge_strength",
        // full simulation
        "sim_branch", "sim_amplitude", "sim_perturbation", "sim_real_data",
        "sim_t_final", "sim_dt", "sim_stride",
        "sponge_start_frac", "sponge_strength",
        // randomness
        "seed",
    };
    return s;
}

}  // namespace kglab
