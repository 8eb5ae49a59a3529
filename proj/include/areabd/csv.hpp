#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

namespace areabd {
namespace csv {

// CSV dialect: comma separated, '.' decimal point, one header row, LF endings.

inline std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

class Writer {
public:
    explicit Writer(std::vector<std::string> header) {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (i) body_ += ',';
            body_ += header[i];
        }
        body_ += '\n';
        cols_ = header.size();
    }

    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) body_ += ',';
            body_ += cells[i];
        }
        body_ += '\n';
    }

    const std::string& text() const { return body_; }
    std::size_t columns() const { return cols_; }

    void save(const std::string& path) const {
        std::ofstream out(path, std::ios::binary);
        out << body_;
    }

private:
    std::string body_;
    std::size_t cols_ = 0;
};

/// FNV-1a 64-bit content digest, hex encoded.
inline std::string digest(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline std::string digest_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return digest(bytes);
}

}  // namespace csv
}  // namespace areabd
