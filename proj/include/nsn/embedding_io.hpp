#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "nsn/embedding.hpp"
#include "nsn/error.hpp"
#include "nsn/image_io.hpp"  // detail::open_file

namespace nsn {

// Raw row-major embedding batch as stored on disk. Rows are normalized into
// Embeddings by the callers that need the unit-norm type.
struct EmbeddingBatch {
    std::uint32_t dim = 0;
    std::vector<std::vector<double>> rows;
};

namespace detail {

inline std::uint32_t read_u32_le(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
           static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

inline double read_f64_le(const unsigned char* p) {
    std::uint64_t bits = 0;
    for (int i = 7; i >= 0; --i) bits = bits << 8 | p[i];
    double d;
    std::memcpy(&d, &bits, 8);
    return d;
}

inline void append_f64_le(std::vector<unsigned char>& out, double d) {
    std::uint64_t bits;
    std::memcpy(&bits, &d, 8);
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<unsigned char>(bits >> (8 * i)));
}

}  // namespace detail

// Binary layout: dim as 32-bit little-endian, then rows of dim f64
// little-endian values each; the row count is implied by the file size.
inline EmbeddingBatch read_embeddings_binary(const std::string& path) {
    detail::FilePtr f = detail::open_file(path, "rb");
    std::fseek(f.get(), 0, SEEK_END);
    const long size = std::ftell(f.get());
    std::fseek(f.get(), 0, SEEK_SET);
    require(size >= 4, Errc::format_error, "embedding file too short: " + path);
    std::vector<unsigned char> buf(static_cast<std::size_t>(size));
    require(std::fread(buf.data(), 1, buf.size(), f.get()) == buf.size(), Errc::io_error,
            "short read: " + path);

    EmbeddingBatch batch;
    batch.dim = detail::read_u32_le(buf.data());
    require(batch.dim >= 2, Errc::format_error,
            "embedding dim " + std::to_string(batch.dim) + " out of range in " + path);
    const std::size_t row_bytes = static_cast<std::size_t>(batch.dim) * 8;
    const std::size_t payload = buf.size() - 4;
    require(payload % row_bytes == 0, Errc::format_error,
            "file size does not align to dim-" + std::to_string(batch.dim) + " rows: " + path);
    const std::size_t n = payload / row_bytes;
    batch.rows.resize(n, std::vector<double>(batch.dim));
    for (std::size_t r = 0; r < n; ++r)
        for (std::uint32_t k = 0; k < batch.dim; ++k)
            batch.rows[r][k] = detail::read_f64_le(buf.data() + 4 + r * row_bytes + 8 * k);
    return batch;
}

inline void write_embeddings_binary(const EmbeddingBatch& batch, const std::string& path) {
    require(batch.dim >= 2, Errc::invalid_argument, "embedding dim must be >= 2");
    std::vector<unsigned char> buf;
    buf.reserve(4 + batch.rows.size() * batch.dim * 8);
    for (int i = 0; i < 4; ++i) buf.push_back(static_cast<unsigned char>(batch.dim >> (8 * i)));
    for (const auto& row : batch.rows) {
        require(row.size() == batch.dim, Errc::dim_mismatch, "row dim differs from header");
        for (double v : row) detail::append_f64_le(buf, v);
    }
    detail::FilePtr f = detail::open_file(path, "wb");
    require(std::fwrite(buf.data(), 1, buf.size(), f.get()) == buf.size(), Errc::io_error,
            "short write: " + path);
}

// CSV layout: one embedding per line, comma-separated decimal values.
inline EmbeddingBatch read_embeddings_csv(const std::string& path) {
    detail::FilePtr f = detail::open_file(path, "rb");
    std::string content;
    char chunk[4096];
    std::size_t got;
    while ((got = std::fread(chunk, 1, sizeof chunk, f.get())) > 0) content.append(chunk, got);

    EmbeddingBatch batch;
    std::size_t pos = 0;
    while (pos < content.size()) {
        std::size_t eol = content.find('\n', pos);
        if (eol == std::string::npos) eol = content.size();
        std::string_view line(content.data() + pos, eol - pos);
        pos = eol + 1;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;

        std::vector<double> row;
        std::size_t field_start = 0;
        while (field_start <= line.size()) {
            std::size_t comma = line.find(',', field_start);
            if (comma == std::string_view::npos) comma = line.size();
            std::string_view field = line.substr(field_start, comma - field_start);
            while (!field.empty() && std::isspace(static_cast<unsigned char>(field.front())))
                field.remove_prefix(1);
            while (!field.empty() && std::isspace(static_cast<unsigned char>(field.back())))
                field.remove_suffix(1);
            double v = 0.0;
            const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
            require(ec == std::errc() && ptr == field.data() + field.size(), Errc::format_error,
                    "bad numeric field '" + std::string(field) + "' in " + path);
            row.push_back(v);
            if (comma == line.size()) break;
            field_start = comma + 1;
        }
        require(row.size() >= 2, Errc::format_error, "embedding row with dim < 2 in " + path);
        if (batch.rows.empty())
            batch.dim = static_cast<std::uint32_t>(row.size());
        else
            require(row.size() == batch.dim, Errc::format_error,
                    "inconsistent column count in " + path);
        batch.rows.push_back(std::move(row));
    }
    require(!batch.rows.empty(), Errc::format_error, "no embedding rows in " + path);
    return batch;
}

inline void write_embeddings_csv(const EmbeddingBatch& batch, const std::string& path) {
    detail::FilePtr f = detail::open_file(path, "wb");
    for (const auto& row : batch.rows) {
        require(row.size() == batch.dim, Errc::dim_mismatch, "row dim differs from header");
        std::string line;
        char num[64];
        for (std::size_t k = 0; k < row.size(); ++k) {
            std::snprintf(num, sizeof num, "%.17g", row[k]);
            if (k) line += ',';
            line += num;
        }
        line += '\n';
        require(std::fwrite(line.data(), 1, line.size(), f.get()) == line.size(), Errc::io_error,
                "short write: " + path);
    }
}

// Format selection by extension: .csv reads as CSV, everything else as the
// binary layout.
inline EmbeddingBatch read_embeddings(const std::string& path) {
    std::string ext = std::filesystem::path(path).extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return ext == ".csv" ? read_embeddings_csv(path) : read_embeddings_binary(path);
}

// Rows are unit-normalized on load so downstream similarity math can rely on
// the Embedding invariant even for files written with limited precision.
inline std::vector<Embedding> to_embeddings(const EmbeddingBatch& batch) {
    std::vector<Embedding> out;
    out.reserve(batch.rows.size());
    for (const auto& row : batch.rows) out.push_back(Embedding::normalized(row));
    return out;
}

}  // namespace nsn
