#include "sbsim_cli/csv.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <stdexcept>

namespace sbsim::cli {

void Series::add(std::string name, std::vector<double> values) {
    names.push_back(std::move(name));
    columns.push_back(std::move(values));
}

std::size_t Series::rows() const {
    if (names.size() != columns.size()) throw std::invalid_argument("Series: names and columns differ in count");
    if (columns.empty()) return 0;
    const std::size_t n = columns.front().size();
    for (std::size_t c = 1; c < columns.size(); ++c) {
        if (columns[c].size() != n) {
            throw std::invalid_argument("Series: column '" + names[c] + "' has " + std::to_string(columns[c].size()) +
                                        " rows, expected " + std::to_string(n));
        }
    }
    return n;
}

std::string format_number(double v) {
    std::array<char, 64> buf{};
    const auto r = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::general, 17);
    return std::string(buf.data(), r.ptr);
}

void write_csv(std::ostream& out, const Series& s, const std::vector<std::string>& comments) {
    const std::size_t n = s.rows();
    for (const auto& c : comments) out << "# " << c << '\n';
    for (std::size_t c = 0; c < s.names.size(); ++c) out << (c ? "," : "") << s.names[c];
    out << '\n';
    std::string line;
    for (std::size_t r = 0; r < n; ++r) {
        line.clear();
        for (std::size_t c = 0; c < s.columns.size(); ++c) {
            if (c) line += ',';
            line += format_number(s.columns[c][r]);
        }
        out << line << '\n';
    }
}

void emit_csv(const Series& s, const std::filesystem::path& path, const std::vector<std::string>& comments) {
    s.rows();  // validate before touching the file
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    write_csv(out, s, comments);
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::uint64_t fnv1a(std::string_view bytes) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i) {
        s[static_cast<std::size_t>(i)] = digits[v & 0xf];
        v >>= 4;
    }
    return s;
}

}  // namespace sbsim::cli
