// Deterministic CSV output.
//
// Numbers go through std::to_chars with 17 significant digits, so files are
// locale independent and round-trip exactly. Comment lines starting with '#'
// precede the header row.

#pragma once

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace sbsim::cli {

struct Series {
    std::vector<std::string> names;
    std::vector<std::vector<double>> columns;

    void add(std::string name, std::vector<double> values);
    std::size_t rows() const;  // throws std::invalid_argument on ragged columns
};

// Like %.17g, without the locale.
std::string format_number(double v);

void write_csv(std::ostream& out, const Series& s, const std::vector<std::string>& comments = {});

// Throws std::runtime_error on I/O failure.
void emit_csv(const Series& s, const std::filesystem::path& path, const std::vector<std::string>& comments = {});

// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes);

std::string hex64(std::uint64_t v);

}  // namespace sbsim::cli
