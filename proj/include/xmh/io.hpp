// File formats and atomic writes. Binary layouts are little-endian and
// documented next to each writer; CSV is accepted for feature matrices
// when the extension says so. Writers go through a temp-file-then-rename
// path so a killed run never leaves a half-written file behind.
#pragma once

#include <cctype>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <unistd.h>

#include "dataset.hpp"
#include "matrix.hpp"

namespace xmh {

struct IoError : std::runtime_error {
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

namespace io {

inline void write_bytes(std::ostream& os, const void* p, std::size_t n) {
    os.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

inline void read_bytes(std::istream& is, void* p, std::size_t n, const std::string& what) {
    is.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(is.gcount()) != n)
        throw IoError("truncated file while reading " + what);
}

inline void write_u32(std::ostream& os, std::uint32_t v) { write_bytes(os, &v, 4); }
inline void write_u64(std::ostream& os, std::uint64_t v) { write_bytes(os, &v, 8); }
inline void write_f32(std::ostream& os, float v) { write_bytes(os, &v, 4); }
inline void write_f64(std::ostream& os, double v) { write_bytes(os, &v, 8); }

inline std::uint32_t read_u32(std::istream& is, const std::string& what) {
    std::uint32_t v;
    read_bytes(is, &v, 4, what);
    return v;
}
inline std::uint64_t read_u64(std::istream& is, const std::string& what) {
    std::uint64_t v;
    read_bytes(is, &v, 8, what);
    return v;
}
inline float read_f32(std::istream& is, const std::string& what) {
    float v;
    read_bytes(is, &v, 4, what);
    return v;
}
inline double read_f64(std::istream& is, const std::string& what) {
    double v;
    read_bytes(is, &v, 8, what);
    return v;
}

inline void expect_magic(std::istream& is, const char (&magic)[5], const std::string& path) {
    char buf[4];
    read_bytes(is, buf, 4, std::string(magic) + " magic of " + path);
    if (std::memcmp(buf, magic, 4) != 0)
        throw IoError(path + ": bad magic, expected " + magic);
}

inline void require_eof(std::istream& is, const std::string& path) {
    char extra;
    is.read(&extra, 1);
    if (!is.eof()) throw IoError(path + ": trailing bytes after expected end of file");
}

// Writes through a sibling temp file and renames into place. rename() on
// the same filesystem is atomic, so readers see the old file or the new
// one, never a partial write.
template <class WriteFn>
inline void atomic_write_file(const std::string& path, WriteFn&& fn) {
    namespace fs = std::filesystem;
    fs::path target(path);
    fs::path dir = target.parent_path();
    if (dir.empty()) dir = ".";
    fs::path tmp = dir / (target.filename().string() + ".tmp." +
                          std::to_string(static_cast<unsigned long>(::getpid())));
    try {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw IoError("cannot open " + tmp.string() + " for writing");
        fn(os);
        os.flush();
        if (!os) throw IoError("write failed for " + tmp.string());
    } catch (...) {
        std::error_code ignore;
        fs::remove(tmp, ignore);
        throw;
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp);
        throw IoError("cannot rename " + tmp.string() + " to " + path + ": " + ec.message());
    }
}

inline std::ifstream open_input(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + path + " for reading");
    return is;
}

inline bool has_extension(const std::string& path, const char* ext) {
    auto dot = path.find_last_of('.');
    if (dot == std::string::npos) return false;
    std::string e = path.substr(dot);
    for (auto& c : e) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return e == ext;
}

} // namespace io

// Feature matrix: magic "XMHF", u32 version=1, u32 rows, u64 cols, then
// rows*cols little-endian f32 column-major (one sample per column).
inline void save_features(const std::string& path, const DenseMatrix& m) {
    io::atomic_write_file(path, [&](std::ostream& os) {
        io::write_bytes(os, "XMHF", 4);
        io::write_u32(os, 1);
        io::write_u32(os, static_cast<std::uint32_t>(m.rows()));
        io::write_u64(os, m.cols());
        for (std::size_t c = 0; c < m.cols(); ++c)
            for (std::size_t r = 0; r < m.rows(); ++r)
                io::write_f32(os, static_cast<float>(m(r, c)));
    });
}

inline DenseMatrix load_features_binary(const std::string& path) {
    auto is = io::open_input(path);
    io::expect_magic(is, "XMHF", path);
    std::uint32_t version = io::read_u32(is, "version of " + path);
    if (version != 1) throw IoError(path + ": unsupported XMHF version " + std::to_string(version));
    std::uint32_t rows = io::read_u32(is, "rows of " + path);
    std::uint64_t cols = io::read_u64(is, "cols of " + path);
    if (rows == 0 || cols == 0) throw IoError(path + ": empty feature matrix");
    DenseMatrix m(rows, cols);
    for (std::size_t c = 0; c < cols; ++c)
        for (std::size_t r = 0; r < rows; ++r)
            m(r, c) = static_cast<double>(io::read_f32(is, "feature data of " + path));
    io::require_eof(is, path);
    return m;
}

// CSV features: one sample per line, comma-separated values
inline DenseMatrix load_features_csv(const std::string& path) {
    auto is = io::open_input(path);
    std::vector<std::vector<double>> samples;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::vector<double> vals;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                vals.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw IoError(path + ": unparsable CSV value '" + cell + "'");
            }
        }
        if (!samples.empty() && vals.size() != samples.front().size())
            throw IoError(path + ": CSV rows have inconsistent lengths");
        samples.push_back(std::move(vals));
    }
    if (samples.empty()) throw IoError(path + ": empty CSV feature file");
    DenseMatrix m(samples.front().size(), samples.size());
    for (std::size_t c = 0; c < samples.size(); ++c)
        for (std::size_t r = 0; r < m.rows(); ++r) m(r, c) = samples[c][r];
    return m;
}

inline DenseMatrix load_features(const std::string& path) {
    if (io::has_extension(path, ".csv")) return load_features_csv(path);
    return load_features_binary(path);
}

// Embedding table: magic "XMHE", u32 version=1, u32 d, u32 C, then d*C
// little-endian f32 column-major.
inline void save_embedding(const std::string& path, const SemanticEmbedding& e) {
    io::atomic_write_file(path, [&](std::ostream& os) {
        io::write_bytes(os, "XMHE", 4);
        io::write_u32(os, 1);
        io::write_u32(os, static_cast<std::uint32_t>(e.dim));
        io::write_u32(os, static_cast<std::uint32_t>(e.class_table.cols()));
        for (std::size_t c = 0; c < e.class_table.cols(); ++c)
            for (std::size_t r = 0; r < e.class_table.rows(); ++r)
                io::write_f32(os, static_cast<float>(e.class_table(r, c)));
    });
}

inline SemanticEmbedding load_embedding(const std::string& path) {
    auto is = io::open_input(path);
    io::expect_magic(is, "XMHE", path);
    std::uint32_t version = io::read_u32(is, "version of " + path);
    if (version != 1) throw IoError(path + ": unsupported XMHE version " + std::to_string(version));
    std::uint32_t d = io::read_u32(is, "embedding dim of " + path);
    std::uint32_t num_classes = io::read_u32(is, "class count of " + path);
    if (d == 0 || num_classes == 0) throw IoError(path + ": empty embedding table");
    SemanticEmbedding e;
    e.dim = d;
    e.class_table = DenseMatrix(d, num_classes);
    for (std::size_t c = 0; c < num_classes; ++c)
        for (std::size_t r = 0; r < d; ++r)
            e.class_table(r, c) = static_cast<double>(io::read_f32(is, "embedding data of " + path));
    io::require_eof(is, path);
    return e;
}

// Labels: one integer per line
inline void save_labels(const std::string& path, const std::vector<int>& labels) {
    io::atomic_write_file(path, [&](std::ostream& os) {
        for (int y : labels) os << y << '\n';
    });
}

inline std::vector<int> load_labels(const std::string& path) {
    auto is = io::open_input(path);
    std::vector<int> labels;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            std::size_t used = 0;
            int y = std::stoi(line, &used);
            while (used < line.size() &&
                   std::isspace(static_cast<unsigned char>(line[used])))
                ++used;
            if (used != line.size()) throw std::invalid_argument("trailing characters");
            labels.push_back(y);
        } catch (const std::exception&) {
            throw IoError(path + ":" + std::to_string(line_no) + ": unparsable label '" + line +
                          "'");
        }
    }
    if (labels.empty()) throw IoError(path + ": empty label file");
    return labels;
}

} // namespace xmh
