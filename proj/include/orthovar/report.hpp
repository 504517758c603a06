#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace orthovar {

/// CSV with a header row, 12 significant digits, and a trailing
/// `# config_hash=` comment.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header);
    void add_row(const std::vector<std::string>& cells);
    void add_row(const std::vector<double>& values);
    std::size_t rows() const { return rows_.size(); }
    const std::vector<std::string>& header() const { return header_; }

    std::string to_string(std::uint64_t config_hash) const;
    /// Writes through a temporary file and renames it into place. Throws IoError.
    void write(const std::string& path, std::uint64_t config_hash) const;

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

std::string csv_cell(double value);
std::string csv_cell(long value);
std::string csv_cell(const std::string& value);

/// Writes text atomically (temporary file plus rename). Throws IoError.
void write_text_atomic(const std::string& path, const std::string& text);

}  // namespace orthovar
