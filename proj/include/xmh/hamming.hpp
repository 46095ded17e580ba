// Bit-packed gallery codes and linear-scan Hamming retrieval. One code
// occupies ceil(m/64) consecutive u64 words; bit j sits in word j/64 at
// position j%64, +1 maps to 1, and padding bits stay zero so XOR
// popcounts never see garbage. Retrieval is an exhaustive scan with
// hardware popcount: top-k through a bounded max-heap, radius queries
// as a filter pass. Ties rank by ascending gallery position.
#pragma once

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <queue>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "codes.hpp"
#include "io.hpp"

namespace xmh {

struct PackedCodeIndex {
    std::size_t m = 0;              // bits per code
    std::size_t n = 0;              // gallery size
    std::size_t words_per_code = 0; // ceil(m/64)
    std::vector<std::uint64_t> blob; // n * words_per_code words
    std::vector<std::uint64_t> ids;  // length n

    const std::uint64_t* code_ptr(std::size_t i) const { return blob.data() + i * words_per_code; }

    std::size_t memory_bytes() const { return blob.size() * 8 + ids.size() * 8; }
};

// bytes of pure code content at one byte per 8 bits, the figure quoted
// when comparing hash methods' memory footprints (ids excluded)
inline std::size_t code_payload_bytes(std::size_t n, std::size_t m) {
    return n * ((m + 7) / 8);
}

inline PackedCodeIndex pack(const CodeMatrix& codes, const std::vector<std::uint64_t>& ids) {
    if (ids.size() != codes.n)
        throw std::invalid_argument("pack: ids length " + std::to_string(ids.size()) +
                                    " does not match code count " + std::to_string(codes.n));
    PackedCodeIndex idx;
    idx.m = codes.m;
    idx.n = codes.n;
    idx.words_per_code = (codes.m + 63) / 64;
    idx.blob.assign(idx.n * idx.words_per_code, 0);
    idx.ids = ids;
    for (std::size_t i = 0; i < codes.n; ++i) {
        std::uint64_t* words = idx.blob.data() + i * idx.words_per_code;
        for (std::size_t j = 0; j < codes.m; ++j)
            if (codes.at(j, i) > 0) words[j / 64] |= std::uint64_t{1} << (j % 64);
    }
    return idx;
}

// ids default to gallery positions
inline PackedCodeIndex pack(const CodeMatrix& codes) {
    std::vector<std::uint64_t> ids(codes.n);
    for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = i;
    return pack(codes, ids);
}

inline CodeMatrix unpack(const PackedCodeIndex& idx) {
    CodeMatrix codes(idx.m, idx.n);
    for (std::size_t i = 0; i < idx.n; ++i) {
        const std::uint64_t* words = idx.code_ptr(i);
        for (std::size_t j = 0; j < idx.m; ++j)
            codes.at(j, i) = (words[j / 64] >> (j % 64)) & 1 ? 1 : -1;
    }
    return codes;
}

inline std::size_t hamming(const PackedCodeIndex& idx, std::size_t i,
                           const std::uint64_t* query_words) {
    const std::uint64_t* words = idx.code_ptr(i);
    std::size_t d = 0;
    for (std::size_t w = 0; w < idx.words_per_code; ++w)
        d += static_cast<std::size_t>(std::popcount(words[w] ^ query_words[w]));
    return d;
}

struct SearchHit {
    std::size_t position = 0; // gallery index
    std::uint64_t id = 0;
    std::size_t distance = 0;
};

// k smallest distances, ties broken by ascending gallery position.
// k > n returns all n hits.
inline std::vector<SearchHit> search_topk(const PackedCodeIndex& idx,
                                          const std::uint64_t* query_words, std::size_t k) {
    if (k < 1) throw std::invalid_argument("search_topk: k must be at least 1");
    k = std::min(k, idx.n);

    // max-heap on (distance, position): the root is the worst kept hit
    using Entry = std::pair<std::size_t, std::size_t>; // (distance, position)
    std::priority_queue<Entry> heap;
    for (std::size_t i = 0; i < idx.n; ++i) {
        std::size_t d = hamming(idx, i, query_words);
        if (heap.size() < k) {
            heap.emplace(d, i);
        } else if (Entry cand{d, i}; cand < heap.top()) {
            heap.pop();
            heap.push(cand);
        }
    }
    std::vector<SearchHit> hits(heap.size());
    for (std::size_t r = heap.size(); r-- > 0;) {
        auto [d, pos] = heap.top();
        heap.pop();
        hits[r] = SearchHit{pos, idx.ids[pos], d};
    }
    return hits;
}

// all gallery entries within Hamming distance r, in gallery order
inline std::vector<SearchHit> search_radius(const PackedCodeIndex& idx,
                                            const std::uint64_t* query_words, std::size_t r) {
    std::vector<SearchHit> hits;
    for (std::size_t i = 0; i < idx.n; ++i) {
        std::size_t d = hamming(idx, i, query_words);
        if (d <= r) hits.push_back(SearchHit{i, idx.ids[i], d});
    }
    return hits;
}

// Batch search, queries split across threads. Each query is scanned by
// exactly one thread, so results cannot depend on the thread count.
inline std::vector<std::vector<SearchHit>> search_topk_batch(const PackedCodeIndex& idx,
                                                             const PackedCodeIndex& queries,
                                                             std::size_t k,
                                                             std::size_t num_threads = 0) {
    if (queries.m != idx.m)
        throw std::invalid_argument("search: query code length " + std::to_string(queries.m) +
                                    " does not match index " + std::to_string(idx.m));
    if (num_threads == 0) {
        unsigned hw = std::thread::hardware_concurrency();
        num_threads = hw ? hw : 1;
    }
    num_threads = std::min<std::size_t>(num_threads, queries.n ? queries.n : 1);

    std::vector<std::vector<SearchHit>> results(queries.n);
    auto worker = [&](std::size_t t) {
        for (std::size_t q = t; q < queries.n; q += num_threads)
            results[q] = search_topk(idx, queries.code_ptr(q), k);
    };
    if (num_threads <= 1) {
        worker(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(num_threads);
        for (std::size_t t = 0; t < num_threads; ++t) pool.emplace_back(worker, t);
        for (auto& th : pool) th.join();
    }
    return results;
}

// Code file: magic "DSHC", u32 version=1, u32 m, u64 n, then the packed
// blob as n*ceil(m/64) little-endian u64 words, then n little-endian
// u64 ids.
inline void save_index(const std::string& path, const PackedCodeIndex& idx) {
    io::atomic_write_file(path, [&](std::ostream& os) {
        io::write_bytes(os, "DSHC", 4);
        io::write_u32(os, 1);
        io::write_u32(os, static_cast<std::uint32_t>(idx.m));
        io::write_u64(os, idx.n);
        for (std::uint64_t w : idx.blob) io::write_u64(os, w);
        for (std::uint64_t id : idx.ids) io::write_u64(os, id);
    });
}

inline PackedCodeIndex load_index(const std::string& path) {
    auto is = io::open_input(path);
    io::expect_magic(is, "DSHC", path);
    std::uint32_t version = io::read_u32(is, "version of " + path);
    if (version != 1) throw IoError(path + ": unsupported DSHC version " + std::to_string(version));
    std::uint32_t m = io::read_u32(is, "code length of " + path);
    std::uint64_t n = io::read_u64(is, "code count of " + path);
    if (m == 0) throw IoError(path + ": zero code length");

    PackedCodeIndex idx;
    idx.m = m;
    idx.n = n;
    idx.words_per_code = (m + 63) / 64;
    idx.blob.resize(idx.n * idx.words_per_code);
    for (auto& w : idx.blob) w = io::read_u64(is, "code words of " + path);
    idx.ids.resize(idx.n);
    for (auto& id : idx.ids) id = io::read_u64(is, "ids of " + path);
    io::require_eof(is, path);

    // padding bits beyond m must be zero; anything else marks corruption
    if (m % 64 != 0) {
        std::uint64_t pad_mask = ~std::uint64_t{0} << (m % 64);
        for (std::size_t i = 0; i < idx.n; ++i)
            if (idx.code_ptr(i)[idx.words_per_code - 1] & pad_mask)
                throw IoError(path + ": nonzero padding bits in code " + std::to_string(i));
    }
    return idx;
}

} // namespace xmh
