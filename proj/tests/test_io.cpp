#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include <xmh/dataset.hpp>
#include <xmh/io.hpp>

namespace fs = std::filesystem;
using xmh::DenseMatrix;

namespace {

// unique scratch directory per test run, removed on destruction
struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("xmh_io_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
    static int& counter() {
        static int c = 0;
        return c;
    }
};

DenseMatrix small_matrix() {
    DenseMatrix m(3, 2);
    double v = 0.5;
    for (std::size_t i = 0; i < m.size(); ++i, v += 0.25) m.data()[i] = v;
    return m;
}

} // namespace

TEST_CASE("feature files round-trip through the binary format") {
    TempDir tmp;
    DenseMatrix m = small_matrix();
    std::string path = tmp.file("feat.xmhf");
    xmh::save_features(path, m);
    DenseMatrix back = xmh::load_features(path);
    REQUIRE(back.rows() == m.rows());
    REQUIRE(back.cols() == m.cols());
    // values written as f32, so exact for these small dyadic numbers
    for (std::size_t i = 0; i < m.size(); ++i) CHECK(back.data()[i] == m.data()[i]);
}

TEST_CASE("feature loader rejects bad magic, version and truncation") {
    TempDir tmp;
    std::string path = tmp.file("feat.xmhf");
    xmh::save_features(path, small_matrix());

    SECTION("bad magic") {
        std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
        f.write("BAD!", 4);
        f.close();
        CHECK_THROWS_AS(xmh::load_features(path), xmh::IoError);
    }
    SECTION("truncated payload") {
        auto size = fs::file_size(path);
        fs::resize_file(path, size - 3);
        CHECK_THROWS_AS(xmh::load_features(path), xmh::IoError);
    }
    SECTION("trailing bytes") {
        std::ofstream f(path, std::ios::app | std::ios::binary);
        f.write("x", 1);
        f.close();
        CHECK_THROWS_AS(xmh::load_features(path), xmh::IoError);
    }
    SECTION("missing file") {
        CHECK_THROWS_AS(xmh::load_features(tmp.file("nope.xmhf")), xmh::IoError);
    }
}

TEST_CASE("feature CSV ingestion, one sample per line") {
    TempDir tmp;
    std::string path = tmp.file("feat.csv");
    {
        std::ofstream f(path);
        f << "1.0,2.0,3.0\n";
        f << "4.0,5.0,6.0\n";
    }
    DenseMatrix m = xmh::load_features(path);
    REQUIRE(m.rows() == 3); // feature dim
    REQUIRE(m.cols() == 2); // samples
    CHECK(m(0, 0) == 1.0);
    CHECK(m(2, 0) == 3.0);
    CHECK(m(0, 1) == 4.0);
    CHECK(m(2, 1) == 6.0);
}

TEST_CASE("feature CSV rejects ragged rows and junk") {
    TempDir tmp;
    std::string path = tmp.file("bad.csv");
    {
        std::ofstream f(path);
        f << "1.0,2.0\n1.0\n";
    }
    CHECK_THROWS_AS(xmh::load_features(path), xmh::IoError);
    {
        std::ofstream f(path);
        f << "1.0,abc\n";
    }
    CHECK_THROWS_AS(xmh::load_features(path), xmh::IoError);
}

TEST_CASE("embedding files round-trip") {
    TempDir tmp;
    auto e = xmh::synth_embedding(10, 4, 3);
    std::string path = tmp.file("emb.xmhe");
    xmh::save_embedding(path, e);
    auto back = xmh::load_embedding(path);
    REQUIRE(back.dim == 10);
    REQUIRE(back.class_table.cols() == 4);
    for (std::size_t i = 0; i < e.class_table.size(); ++i)
        CHECK(back.class_table.data()[i] ==
              static_cast<double>(static_cast<float>(e.class_table.data()[i])));
}

TEST_CASE("label files round-trip and reject junk") {
    TempDir tmp;
    std::string path = tmp.file("labels.txt");
    std::vector<int> labels = {0, 3, 1, 2, 2};
    xmh::save_labels(path, labels);
    CHECK(xmh::load_labels(path) == labels);

    {
        std::ofstream f(path);
        f << "1\ntwo\n";
    }
    CHECK_THROWS_AS(xmh::load_labels(path), xmh::IoError);
    {
        std::ofstream f(path, std::ios::trunc);
    }
    CHECK_THROWS_AS(xmh::load_labels(path), xmh::IoError);
}

TEST_CASE("atomic writes leave no temp files behind") {
    TempDir tmp;
    xmh::save_features(tmp.file("a.xmhf"), small_matrix());
    xmh::save_labels(tmp.file("b.txt"), {1, 2});
    std::size_t entries = 0;
    for (const auto& entry : fs::directory_iterator(tmp.path)) {
        ++entries;
        CHECK(entry.path().string().find(".tmp") == std::string::npos);
    }
    CHECK(entries == 2);
}

TEST_CASE("a failing writer does not replace the target") {
    TempDir tmp;
    std::string path = tmp.file("keep.xmhf");
    xmh::save_features(path, small_matrix());
    auto original_size = fs::file_size(path);
    try {
        xmh::io::atomic_write_file(path, [](std::ostream& os) {
            os << "partial";
            throw std::runtime_error("simulated crash");
        });
    } catch (const std::runtime_error&) {
    }
    CHECK(fs::file_size(path) == original_size);
    CHECK_NOTHROW(xmh::load_features(path));
    for (const auto& entry : fs::directory_iterator(tmp.path))
        CHECK(entry.path().string().find(".tmp") == std::string::npos);
}
