#include "orthovar/report.hpp"

#include "orthovar/common.hpp"
#include "orthovar/config.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

namespace orthovar {

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {
    if (header_.empty()) throw Error(ErrorCode::InvalidConfig, "CSV needs at least one column");
}

void CsvTable::add_row(const std::vector<std::string>& cells) {
    if (cells.size() != header_.size())
        throw Error(ErrorCode::InvalidConfig, "CSV row has " + std::to_string(cells.size()) + " cells, expected " +
                                                  std::to_string(header_.size()));
    rows_.push_back(cells);
}

void CsvTable::add_row(const std::vector<double>& values) {
    std::vector<std::string> cells;
    for (double v : values) cells.push_back(csv_cell(v));
    add_row(cells);
}

std::string CsvTable::to_string(std::uint64_t config_hash) const {
    std::string out;
    auto line = [&out](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out += ',';
            out += cells[i];
        }
        out += '\n';
    };
    line(header_);
    for (const auto& r : rows_) line(r);
    out += "# config_hash=" + hex64(config_hash) + "\n";
    return out;
}

void CsvTable::write(const std::string& path, std::uint64_t config_hash) const {
    write_text_atomic(path, to_string(config_hash));
}

std::string csv_cell(double value) { return format_double(value); }
std::string csv_cell(long value) { return std::to_string(value); }

std::string csv_cell(const std::string& value) {
    if (value.find_first_of(",\"\n") == std::string::npos) return value;
    std::string q = "\"";
    for (char c : value) {
        if (c == '"') q += '"';
        q += c;
    }
    return q + "\"";
}

void write_text_atomic(const std::string& path, const std::string& text) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw Error(ErrorCode::IoError, "cannot write '" + tmp + "'");
        out << text;
        if (!out) throw Error(ErrorCode::IoError, "write failed for '" + tmp + "'");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot rename '" + tmp + "' to '" + path + "': " + ec.message());
}

}  // namespace orthovar
