#pragma once

#include <bit>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "aed/errors.hpp"

// Small binary/CSV output helpers shared by the serialization code.
// Binary containers are little-endian (asserted at build time below).

namespace aed {

static_assert(std::endian::native == std::endian::little, "binary containers assume little-endian layout");

namespace bin {

inline void write_bytes(std::ostream& os, const void* p, std::size_t n) {
    os.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

inline void read_bytes(std::istream& is, void* p, std::size_t n) {
    is.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (!is) throw data_error("binary read: unexpected end of stream");
}

template <typename T>
void write_pod(std::ostream& os, T v) {
    write_bytes(os, &v, sizeof(T));
}

template <typename T>
T read_pod(std::istream& is) {
    T v{};
    read_bytes(is, &v, sizeof(T));
    return v;
}

inline void write_string(std::ostream& os, const std::string& s) {
    write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(s.size()));
    write_bytes(os, s.data(), s.size());
}

inline std::string read_string(std::istream& is) {
    auto n = read_pod<std::uint32_t>(is);
    std::string s(n, '\0');
    if (n > 0) read_bytes(is, s.data(), n);
    return s;
}

template <typename T>
void write_vec(std::ostream& os, const std::vector<T>& v) {
    write_pod<std::uint64_t>(os, static_cast<std::uint64_t>(v.size()));
    if (!v.empty()) write_bytes(os, v.data(), v.size() * sizeof(T));
}

template <typename T>
std::vector<T> read_vec(std::istream& is) {
    auto n = read_pod<std::uint64_t>(is);
    std::vector<T> v(static_cast<std::size_t>(n));
    if (n > 0) read_bytes(is, v.data(), v.size() * sizeof(T));
    return v;
}

}  // namespace bin

/// Fixed-format float for CSV output. Deterministic for a given build.
inline std::string fmt_g(double x, int digits = 9) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*g", digits, x);
    return buf;
}

inline std::ofstream open_out(const std::filesystem::path& p, bool binary = false) {
    std::ofstream os(p, binary ? std::ios::binary : std::ios::out);
    if (!os) throw data_error("cannot open for writing: " + p.string());
    return os;
}

inline std::ifstream open_in(const std::filesystem::path& p, bool binary = false) {
    std::ifstream is(p, binary ? std::ios::binary : std::ios::in);
    if (!is) throw data_error("cannot open for reading: " + p.string());
    return is;
}

/// Minimal CSV emitter: caller supplies one row at a time.
class CsvWriter {
public:
    explicit CsvWriter(const std::filesystem::path& p) : os_(open_out(p)) {}

    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) os_ << ',';
            os_ << cells[i];
        }
        os_ << '\n';
    }

private:
    std::ofstream os_;
};

/// Splits one CSV line on commas. No quoting support; the formats used here
/// never embed commas in fields.
inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = line.find(',', start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    if (!out.empty() && !out.back().empty() && out.back().back() == '\r') out.back().pop_back();
    return out;
}

}  // namespace aed
