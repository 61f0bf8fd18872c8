#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace atomarray {

// Round-trip decimal form (17 significant digits); "nan", "inf", "-inf".
std::string fmt(double v);
std::string fmt(long long v);
inline std::string fmt(int v) { return fmt(static_cast<long long>(v)); }
inline std::string fmt(std::size_t v) { return fmt(static_cast<long long>(v)); }

std::uint64_t fnv1a64(const std::string& s);
std::string hex64(std::uint64_t v);

// One `#`-prefixed metadata block, one header row, then data rows.
struct CsvTable {
    std::vector<std::string> meta;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    void add(std::vector<std::string> row);
    std::string str() const;
    void write(const std::string& path) const;
};

// Parses a table written by CsvTable (metadata lines returned without '#').
CsvTable read_csv(const std::string& path);

}  // namespace atomarray
