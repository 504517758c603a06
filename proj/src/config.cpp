#include "orthovar/config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace orthovar {

const char* to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::PointOutsideTube: return "PointOutsideTube";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::OffsetTooLarge: return "OffsetTooLarge";
    case ErrorCode::DegenerateStencil: return "DegenerateStencil";
    case ErrorCode::NonManifoldVertex: return "NonManifoldVertex";
    case ErrorCode::InvalidMesh: return "InvalidMesh";
    case ErrorCode::BoundaryOffSurface: return "BoundaryOffSurface";
    case ErrorCode::EmptyIntersection: return "EmptyIntersection";
    case ErrorCode::ContinuationDiverged: return "ContinuationDiverged";
    case ErrorCode::PerturbationTooLarge: return "PerturbationTooLarge";
    case ErrorCode::LineSearchFailed: return "LineSearchFailed";
    case ErrorCode::MeshDegenerated: return "MeshDegenerated";
    case ErrorCode::Collapsed: return "Collapsed";
    case ErrorCode::LambdaOutOfRange: return "LambdaOutOfRange";
    case ErrorCode::MetricNotInvertible: return "MetricNotInvertible";
    case ErrorCode::BoundaryNotOnSurface: return "BoundaryNotOnSurface";
    case ErrorCode::QuadratureUnderresolved: return "QuadratureUnderresolved";
    case ErrorCode::ChartCoverageGap: return "ChartCoverageGap";
    case ErrorCode::GenericityFailed: return "GenericityFailed";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::UnknownFixture: return "UnknownFixture";
    }
    return "Unknown";
}

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double parse_double(const std::string& key, const std::string& text) {
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (trim(text.substr(used)).empty()) return v;
    } catch (const std::exception&) {
    }
    throw Error(ErrorCode::InvalidConfig, "key '" + key + "' expects a number, got '" + text + "'");
}

}  // namespace

bool ConfigSection::has(const std::string& key) const {
    for (const auto& [k, v] : entries_)
        if (k == key) return true;
    return false;
}

const std::string& ConfigSection::get(const std::string& key) const {
    for (const auto& [k, v] : entries_)
        if (k == key) return v;
    throw Error(ErrorCode::InvalidConfig,
                "missing key '" + key + "' in section [" + name_ + "]");
}

std::string ConfigSection::get_or(const std::string& key, const std::string& fallback) const {
    return has(key) ? get(key) : fallback;
}

double ConfigSection::get_double(const std::string& key) const {
    return parse_double(key, get(key));
}

double ConfigSection::get_double_or(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
}

long ConfigSection::get_int(const std::string& key) const {
    const double v = get_double(key);
    if (v != static_cast<double>(static_cast<long>(v)))
        throw Error(ErrorCode::InvalidConfig, "key '" + key + "' expects an integer");
    return static_cast<long>(v);
}

long ConfigSection::get_int_or(const std::string& key, long fallback) const {
    return has(key) ? get_int(key) : fallback;
}

std::vector<double> ConfigSection::get_doubles(const std::string& key) const {
    std::string text = get(key);
    std::replace(text.begin(), text.end(), ',', ' ');
    std::istringstream in(text);
    std::vector<double> out;
    std::string tok;
    while (in >> tok) out.push_back(parse_double(key, tok));
    return out;
}

Vec3 ConfigSection::get_vec3(const std::string& key) const {
    const auto v = get_doubles(key);
    if (v.size() != 3)
        throw Error(ErrorCode::InvalidConfig, "key '" + key + "' expects 3 numbers");
    return {v[0], v[1], v[2]};
}

Vec3 ConfigSection::get_vec3_or(const std::string& key, const Vec3& fallback) const {
    return has(key) ? get_vec3(key) : fallback;
}

void ConfigSection::set(const std::string& key, const std::string& value) {
    for (auto& [k, v] : entries_) {
        if (k == key) {
            v = value;
            return;
        }
    }
    entries_.emplace_back(key, value);
}

void ConfigSection::set(const std::string& key, double value) { set(key, format_double(value)); }

void ConfigSection::set(const std::string& key, long value) { set(key, std::to_string(value)); }

void ConfigSection::set(const std::string& key, const Vec3& value) {
    set(key, std::vector<double>{value.x(), value.y(), value.z()});
}

void ConfigSection::set(const std::string& key, const std::vector<double>& values) {
    std::string s;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) s += ' ';
        s += format_double(values[i]);
    }
    set(key, s);
}

void ConfigSection::require_only(const std::set<std::string>& allowed) const {
    for (const auto& [k, v] : entries_) {
        if (!allowed.count(k))
            throw Error(ErrorCode::InvalidConfig,
                        "unknown key '" + k + "' in section [" + name_ + "]");
    }
}

Config Config::parse(const std::string& text) {
    Config cfg;
    cfg.sections_.emplace_back("");
    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        const auto hash = raw.find('#');
        const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw Error(ErrorCode::InvalidConfig,
                            "line " + std::to_string(lineno) + ": malformed section header");
            const std::string name = trim(line.substr(1, line.size() - 2));
            if (cfg.has_section(name))
                throw Error(ErrorCode::InvalidConfig, "duplicate section [" + name + "]");
            cfg.sections_.emplace_back(name);
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw Error(ErrorCode::InvalidConfig,
                        "line " + std::to_string(lineno) + ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        if (key.empty())
            throw Error(ErrorCode::InvalidConfig, "line " + std::to_string(lineno) + ": empty key");
        auto& sec = cfg.sections_.back();
        if (sec.has(key))
            throw Error(ErrorCode::InvalidConfig,
                        "line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
        sec.set(key, trim(line.substr(eq + 1)));
    }
    return cfg;
}

Config Config::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open config '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

std::string Config::to_string() const {
    std::string out;
    for (const auto& sec : sections_) {
        if (sec.name().empty() && sec.entries().empty()) continue;
        if (!sec.name().empty()) {
            if (!out.empty()) out += '\n';
            out += '[' + sec.name() + "]\n";
        }
        for (const auto& [k, v] : sec.entries()) out += k + " = " + v + '\n';
    }
    return out;
}

void Config::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoError, "cannot write config '" + path + "'");
    out << to_string();
}

bool Config::has_section(const std::string& name) const {
    for (const auto& s : sections_)
        if (s.name() == name) return true;
    return false;
}

const ConfigSection& Config::section(const std::string& name) const {
    for (const auto& s : sections_)
        if (s.name() == name) return s;
    throw Error(ErrorCode::InvalidConfig, "missing section [" + name + "]");
}

ConfigSection& Config::add_section(const std::string& name) {
    for (auto& s : sections_)
        if (s.name() == name) return s;
    sections_.emplace_back(name);
    return sections_.back();
}

std::uint64_t Config::hash() const { return fnv1a(to_string()); }

std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string format_double(double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", value);
    return buf;
}

std::string hex64(std::uint64_t value) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
    return buf;
}

}  // namespace orthovar
