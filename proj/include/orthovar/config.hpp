#pragma once

#include "orthovar/common.hpp"

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace orthovar {

/// One `[name]` block of `key = value` lines. Keys keep insertion order so
/// that serialization is byte-stable.
class ConfigSection {
public:
    explicit ConfigSection(std::string name = {}) : name_(std::move(name)) {}

    const std::string& name() const { return name_; }
    const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

    bool has(const std::string& key) const;
    const std::string& get(const std::string& key) const;
    std::string get_or(const std::string& key, const std::string& fallback) const;

    double get_double(const std::string& key) const;
    double get_double_or(const std::string& key, double fallback) const;
    long get_int(const std::string& key) const;
    long get_int_or(const std::string& key, long fallback) const;
    std::vector<double> get_doubles(const std::string& key) const;
    Vec3 get_vec3(const std::string& key) const;
    Vec3 get_vec3_or(const std::string& key, const Vec3& fallback) const;

    void set(const std::string& key, const std::string& value);
    void set(const std::string& key, double value);
    void set(const std::string& key, long value);
    void set(const std::string& key, int value) { set(key, static_cast<long>(value)); }
    void set(const std::string& key, const Vec3& value);
    void set(const std::string& key, const std::vector<double>& values);

    /// Throws InvalidConfig for any key not in `allowed`.
    void require_only(const std::set<std::string>& allowed) const;

private:
    std::string name_;
    std::vector<std::pair<std::string, std::string>> entries_;
};

/// Flat INI-style configuration: sections of `key = value`, `#` comments.
/// Keys before the first section header go to the unnamed section "".
class Config {
public:
    static Config parse(const std::string& text);
    static Config load(const std::string& path);

    std::string to_string() const;
    void save(const std::string& path) const;

    bool has_section(const std::string& name) const;
    const ConfigSection& section(const std::string& name) const;
    ConfigSection& add_section(const std::string& name);
    const std::vector<ConfigSection>& sections() const { return sections_; }

    /// FNV-1a hash of the canonical text; used to tag report files.
    std::uint64_t hash() const;

private:
    std::vector<ConfigSection> sections_;
};

std::uint64_t fnv1a(const std::string& text);
std::string format_double(double value);
std::string hex64(std::uint64_t value);

}  // namespace orthovar
