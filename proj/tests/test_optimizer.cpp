#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include <xmh/codes.hpp>
#include <xmh/dataset.hpp>
#include <xmh/optimizer.hpp>

#include "oracles.hpp"

using xmh::CodeMatrix;
using xmh::DenseMatrix;
using xmh::OptimizerConfig;
using xmh::OptimizerState;
using xmh::Side;

namespace {

CodeMatrix row_codes(std::size_t m, std::size_t n, std::initializer_list<int> vals) {
    CodeMatrix c(m, n);
    std::size_t i = 0;
    for (int v : vals) c.bits[i++] = static_cast<std::int8_t>(v);
    return c;
}

DenseMatrix random_matrix(std::size_t r, std::size_t c, xmh::Rng& rng) {
    DenseMatrix m(r, c);
    for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = rng.gaussian();
    return m;
}

// random problem instance for code-update tests
struct Instance {
    OptimizerState st;
    OptimizerConfig cfg;
};

Instance random_instance(std::size_t m, std::size_t n1, std::size_t n2, std::size_t d,
                         xmh::Rng& rng, double lambda = 0.01, double gamma = 1e-5) {
    Instance inst;
    inst.cfg.m = m;
    inst.cfg.lambda = lambda;
    inst.cfg.gamma = gamma;
    inst.st.bi = CodeMatrix::random(m, n1, rng);
    inst.st.bs = CodeMatrix::random(m, n2, rng);
    inst.st.d_mat = random_matrix(d, m, rng);
    std::vector<int> yi(n1), ys(n2);
    for (std::size_t i = 0; i < n1; ++i) yi[i] = static_cast<int>(rng.below(3));
    for (std::size_t j = 0; j < n2; ++j) ys[j] = static_cast<int>(rng.below(3));
    inst.st.w = xmh::build_similarity(yi, ys).w;
    inst.st.phi_i = random_matrix(d, n1, rng);
    inst.st.phi_s = random_matrix(d, n2, rng);
    inst.st.f1 = random_matrix(m, n1, rng);
    inst.st.f2 = random_matrix(m, n2, rng);
    return inst;
}

double full_objective(const Instance& inst) {
    return oracle::naive_objective(inst.st.bi, inst.st.bs, inst.st.d_mat, inst.st.phi_i,
                                   inst.st.phi_s, inst.st.w, inst.st.f1, inst.st.f2,
                                   inst.cfg.lambda, inst.cfg.gamma);
}

} // namespace

TEST_CASE("objective components on hand-derived one-bit cases") {
    OptimizerConfig cfg;
    cfg.m = 1;
    cfg.lambda = 0.5;
    cfg.gamma = 0.25;

    // codes whose cross products exactly match the +-1 similarity
    CodeMatrix bi = row_codes(1, 2, {1, -1});
    CodeMatrix bs = row_codes(1, 2, {1, -1});
    DenseMatrix w(2, 2);
    w(0, 0) = 1; w(0, 1) = -1; w(1, 0) = -1; w(1, 1) = 1;
    DenseMatrix d_mat(1, 1);
    DenseMatrix phi_i(1, 2), phi_s(1, 2);
    DenseMatrix f1 = bi.to_dense();
    DenseMatrix f2 = bs.to_dense();

    auto obj = xmh::objective(bi, bs, d_mat, phi_i, phi_s, w, f1, f2, cfg);
    CHECK(obj.pairwise == 0.0);
    CHECK(obj.quantization == 0.0); // outputs equal the codes exactly
    // with D = 0 the fit error is just ||phi||^2 = 0 here
    CHECK(obj.semantic == 0.0);
    CHECK(obj.total == 0.0);

    // flipping one similarity entry leaves exactly one mismatched pair
    w(0, 1) = 1.0;
    auto flipped = xmh::objective(bi, bs, d_mat, phi_i, phi_s, w, f1, f2, cfg);
    CHECK(flipped.pairwise == 4.0);
    CHECK(flipped.total == 4.0);
}

TEST_CASE("objective breakdown satisfies its own total invariant") {
    xmh::Rng rng(23);
    auto inst = random_instance(4, 6, 5, 3, rng, 0.7, 0.2);
    auto obj = xmh::objective(inst.st, inst.cfg);
    CHECK(obj.pairwise >= 0.0);
    CHECK(obj.semantic >= 0.0);
    CHECK(obj.quantization >= 0.0);
    CHECK(obj.total ==
          Catch::Approx(obj.pairwise + 0.7 * obj.semantic + 0.2 * obj.quantization)
              .epsilon(1e-12));
    CHECK(obj.total == Catch::Approx(full_objective(inst)).epsilon(1e-10));
}

TEST_CASE("objective with matched single pairs vanishes on the pairwise term") {
    OptimizerConfig cfg;
    cfg.m = 3;
    CodeMatrix b(3, 1); // all +1
    DenseMatrix w(1, 1, 1.0);
    DenseMatrix d_mat(2, 3);
    DenseMatrix phi(2, 1);
    DenseMatrix f = b.to_dense();
    auto obj = xmh::objective(b, b, d_mat, phi, phi, w, f, f, cfg);
    CHECK(obj.pairwise == 0.0); // <b,b> = m cancels m*W exactly
    CHECK(obj.quantization == 0.0);
}

TEST_CASE("objective rejects inconsistent shapes") {
    xmh::Rng rng(24);
    auto inst = random_instance(4, 6, 5, 3, rng);
    OptimizerConfig wrong = inst.cfg;
    wrong.m = 5;
    CHECK_THROWS_AS(xmh::objective(inst.st, wrong), std::invalid_argument);

    auto bad = inst;
    bad.st.w = DenseMatrix(2, 2);
    CHECK_THROWS_AS(xmh::objective(bad.st, bad.cfg), std::invalid_argument);
}

TEST_CASE("update_dictionary reproduces the scalar hand case") {
    CodeMatrix bi = row_codes(1, 2, {1, 1});
    CodeMatrix bs = row_codes(1, 2, {1, -1});
    DenseMatrix phi_i(1, 2), phi_s(1, 2);
    phi_i(0, 0) = 2; phi_i(0, 1) = 4;
    phi_s(0, 0) = 1; phi_s(0, 1) = 3;
    DenseMatrix d = xmh::update_dictionary(bi, bs, phi_i, phi_s);
    REQUIRE(d.rows() == 1);
    REQUIRE(d.cols() == 1);
    CHECK(d(0, 0) == Catch::Approx(1.0).margin(1e-14));
}

TEST_CASE("update_dictionary recovers an exact-fit dictionary") {
    xmh::Rng rng(25);
    const std::size_t m = 3, d = 4;
    CodeMatrix bi = CodeMatrix::random(m, 12, rng);
    CodeMatrix bs = CodeMatrix::random(m, 10, rng);
    DenseMatrix d0 = random_matrix(d, m, rng);
    DenseMatrix phi_i = xmh::matmul(d0, bi.to_dense());
    DenseMatrix phi_s = xmh::matmul(d0, bs.to_dense());
    DenseMatrix recovered = xmh::update_dictionary(bi, bs, phi_i, phi_s);
    double rel = std::sqrt(xmh::frob_sq_diff(recovered, d0) / xmh::frob_sq(d0));
    CHECK(rel < 1e-10);
}

TEST_CASE("update_dictionary matches the normal-equations oracle") {
    xmh::Rng rng(26);
    for (int t = 0; t < 20; ++t) {
        CodeMatrix bi = CodeMatrix::random(4, 8, rng);
        CodeMatrix bs = CodeMatrix::random(4, 8, rng);
        DenseMatrix phi_i = random_matrix(6, 8, rng);
        DenseMatrix phi_s = random_matrix(6, 8, rng);
        DenseMatrix lib = xmh::update_dictionary(bi, bs, phi_i, phi_s);
        DenseMatrix ref = oracle::least_squares_dictionary(bi, bs, phi_i, phi_s);
        double rel = std::sqrt(xmh::frob_sq_diff(lib, ref) / std::max(1.0, xmh::frob_sq(ref)));
        CHECK(rel <= 1e-8);
    }
}

TEST_CASE("update_dictionary output is a local minimum of the fit term") {
    xmh::Rng rng(27);
    CodeMatrix bi = CodeMatrix::random(4, 16, rng);
    CodeMatrix bs = CodeMatrix::random(4, 12, rng);
    DenseMatrix phi_i = random_matrix(5, 16, rng);
    DenseMatrix phi_s = random_matrix(5, 12, rng);
    DenseMatrix d = xmh::update_dictionary(bi, bs, phi_i, phi_s);

    auto fit_term = [&](const DenseMatrix& dm) {
        return xmh::frob_sq_diff(phi_i, xmh::matmul(dm, bi.to_dense())) +
               xmh::frob_sq_diff(phi_s, xmh::matmul(dm, bs.to_dense()));
    };
    double at_min = fit_term(d);
    const double eps = 1e-3;
    for (int t = 0; t < 20; ++t) {
        DenseMatrix perturbed = d;
        for (std::size_t i = 0; i < perturbed.size(); ++i)
            perturbed.data()[i] += eps * rng.gaussian();
        CHECK(fit_term(perturbed) >= at_min - 1e-9);
    }
}

TEST_CASE("update_codes hand case: corrections vanish at one bit") {
    // with lambda = gamma = 0 and a single bit row there is nothing to
    // exclude, so the update is the plain sign of the cross-view drive
    OptimizerConfig cfg;
    cfg.m = 1;
    cfg.lambda = 0.0;
    cfg.gamma = 0.0;

    OptimizerState st;
    st.bi = row_codes(1, 2, {1, 1});
    st.bs = row_codes(1, 2, {1, -1});
    st.w = DenseMatrix(2, 2);
    st.w(0, 0) = 1; st.w(0, 1) = -1; st.w(1, 0) = -1; st.w(1, 1) = 1;
    st.d_mat = DenseMatrix(1, 1);
    st.phi_i = DenseMatrix(1, 2);
    st.phi_s = DenseMatrix(1, 2);
    st.f1 = DenseMatrix(1, 2);
    st.f2 = DenseMatrix(1, 2);

    CodeMatrix updated = xmh::update_codes(Side::image, st, cfg);
    CHECK(updated.at(0, 0) == 1);
    CHECK(updated.at(0, 1) == -1);
}

TEST_CASE("update_codes never raises the full objective") {
    xmh::Rng rng(28);
    for (int t = 0; t < 100; ++t) {
        auto inst = random_instance(8, 16, 16, 6, rng);
        double before = full_objective(inst);
        inst.st.bi = xmh::update_codes(Side::image, inst.st, inst.cfg);
        double mid = full_objective(inst);
        CHECK(mid <= before + 1e-9);
        inst.st.bs = xmh::update_codes(Side::sketch, inst.st, inst.cfg);
        double after = full_objective(inst);
        CHECK(after <= mid + 1e-9);
    }
}

TEST_CASE("update_codes fixed point admits no improving single-bit flip") {
    xmh::Rng rng(29);
    auto inst = random_instance(4, 6, 6, 3, rng);

    // sweep both sides until the codes stop changing
    for (int round = 0; round < 100; ++round) {
        CodeMatrix prev_bi = inst.st.bi;
        CodeMatrix prev_bs = inst.st.bs;
        inst.st.bi = xmh::update_codes(Side::image, inst.st, inst.cfg);
        inst.st.bs = xmh::update_codes(Side::sketch, inst.st, inst.cfg);
        if (inst.st.bi == prev_bi && inst.st.bs == prev_bs) break;
    }

    double base = full_objective(inst);
    for (std::size_t k = 0; k < 4; ++k)
        for (std::size_t i = 0; i < 6; ++i) {
            auto flipped = inst;
            flipped.st.bi.at(k, i) = static_cast<std::int8_t>(-flipped.st.bi.at(k, i));
            CHECK(full_objective(flipped) >= base);

            auto flipped_s = inst;
            flipped_s.st.bs.at(k, i) = static_cast<std::int8_t>(-flipped_s.st.bs.at(k, i));
            CHECK(full_objective(flipped_s) >= base);
        }
}

TEST_CASE("update_codes is symmetric under swapping the two views") {
    xmh::Rng rng(30);
    for (int t = 0; t < 10; ++t) {
        auto inst = random_instance(3, 5, 4, 3, rng);

        CodeMatrix as_image = xmh::update_codes(Side::image, inst.st, inst.cfg);

        // mirrored problem: sketch side plays the image role
        OptimizerState mirror;
        mirror.bi = inst.st.bs;
        mirror.bs = inst.st.bi;
        mirror.w = xmh::transpose(inst.st.w);
        mirror.d_mat = inst.st.d_mat;
        mirror.phi_i = inst.st.phi_s;
        mirror.phi_s = inst.st.phi_i;
        mirror.f1 = inst.st.f2;
        mirror.f2 = inst.st.f1;
        CodeMatrix as_sketch = xmh::update_codes(Side::sketch, mirror, inst.cfg);

        REQUIRE(as_image.bits.size() == as_sketch.bits.size());
        for (std::size_t i = 0; i < as_image.bits.size(); ++i)
            CHECK(as_image.bits[i] == as_sketch.bits[i]);
    }
}

TEST_CASE("update_codes zero-score entries retain their previous bit") {
    // engineered so every score is exactly zero: no similarity drive,
    // no dictionary, no encoder pull
    OptimizerConfig cfg;
    cfg.m = 2;
    cfg.lambda = 0.0;
    cfg.gamma = 0.0;

    OptimizerState st;
    st.bi = row_codes(2, 2, {1, -1, -1, 1});
    st.bs = row_codes(2, 2, {1, 1, 1, -1});
    st.w = DenseMatrix(2, 2); // all zero: every R entry is zero
    st.d_mat = DenseMatrix(1, 2);
    st.phi_i = DenseMatrix(1, 2);
    st.phi_s = DenseMatrix(1, 2);
    st.f1 = DenseMatrix(2, 2);
    st.f2 = DenseMatrix(2, 2);

    // rows of bs are orthogonal, so the cross-row coupling is zero too
    CodeMatrix updated = xmh::update_codes(Side::image, st, cfg);
    for (std::size_t i = 0; i < updated.bits.size(); ++i)
        CHECK(updated.bits[i] == st.bi.bits[i]);
}

TEST_CASE("inner products of code columns track Hamming distance") {
    xmh::Rng rng(31);
    CodeMatrix c = CodeMatrix::random(16, 10, rng);
    for (std::size_t i = 0; i < c.n; ++i)
        for (std::size_t j = 0; j < c.n; ++j) {
            int dot = 0;
            std::size_t ham = 0;
            for (std::size_t k = 0; k < c.m; ++k) {
                dot += c.at(k, i) * c.at(k, j);
                if (c.at(k, i) != c.at(k, j)) ++ham;
            }
            CHECK(dot == static_cast<int>(c.m) - 2 * static_cast<int>(ham));
        }
}

TEST_CASE("fit runs the epoch loop and keeps the coupled terms monotone") {
    auto ds = xmh::generate_synthetic(3, 30, 24, 10, 8, 5.0, 0.4, 77);
    auto emb = xmh::synth_embedding(12, 3, 77);

    OptimizerConfig cfg;
    cfg.m = 8;
    cfg.epochs = 6;
    cfg.seed = 77;
    xmh::SgdConfig sgd;
    sgd.seed = 77;

    auto model = xmh::make_hash_model(10, 8, 16, 8, 77);
    auto res = xmh::fit(ds, emb, &model, cfg, sgd);

    REQUIRE(res.trace.size() >= 4);
    CHECK(res.trace.front().step == "init");
    double prev = -1.0;
    bool first = true;
    for (const auto& row : res.trace) {
        double coupled = row.obj.pairwise + cfg.lambda * row.obj.semantic;
        if (!first && (row.step == "dict" || row.step == "codes_image" ||
                       row.step == "codes_sketch"))
            CHECK(coupled <= prev + 1e-9);
        prev = coupled;
        first = false;
    }
    CHECK(res.bi.n == ds.n1());
    CHECK(res.bs.n == ds.n2());
}

TEST_CASE("fit without an encoder keeps the total objective monotone") {
    auto ds = xmh::generate_synthetic(3, 20, 16, 8, 6, 5.0, 0.4, 78);
    auto emb = xmh::synth_embedding(10, 3, 78);

    OptimizerConfig cfg;
    cfg.m = 6;
    cfg.epochs = 8;
    cfg.seed = 78;
    cfg.gamma = 1e-12; // vanishing quantization weight
    xmh::SgdConfig sgd;

    auto res = xmh::fit(ds, emb, nullptr, cfg, sgd);
    double prev = res.trace.front().obj.total;
    for (std::size_t i = 1; i < res.trace.size(); ++i) {
        CHECK(res.trace[i].obj.total <= prev + 1e-9);
        prev = res.trace[i].obj.total;
    }
}

TEST_CASE("fit is deterministic under a fixed seed") {
    auto ds = xmh::generate_synthetic(3, 18, 12, 8, 6, 5.0, 0.3, 79);
    auto emb = xmh::synth_embedding(10, 3, 79);
    OptimizerConfig cfg;
    cfg.m = 4;
    cfg.epochs = 4;
    cfg.seed = 79;
    xmh::SgdConfig sgd;
    sgd.seed = 79;

    auto m1 = xmh::make_hash_model(8, 6, 12, 4, 79);
    auto m2 = xmh::make_hash_model(8, 6, 12, 4, 79);
    auto r1 = xmh::fit(ds, emb, &m1, cfg, sgd);
    auto r2 = xmh::fit(ds, emb, &m2, cfg, sgd);
    CHECK(r1.bi == r2.bi);
    CHECK(r1.bs == r2.bs);
    REQUIRE(r1.trace.size() == r2.trace.size());
    for (std::size_t i = 0; i < r1.trace.size(); ++i)
        CHECK(r1.trace[i].obj.total == r2.trace[i].obj.total);
}

TEST_CASE("fit stops early once the objective settles") {
    auto ds = xmh::generate_synthetic(2, 12, 10, 6, 5, 6.0, 0.1, 80);
    auto emb = xmh::synth_embedding(8, 2, 80);
    OptimizerConfig cfg;
    cfg.m = 4;
    cfg.epochs = 50;
    cfg.seed = 80;
    cfg.convergence_tol = 1e-6;
    xmh::SgdConfig sgd;

    auto res = xmh::fit(ds, emb, nullptr, cfg, sgd);
    CHECK(res.early_stopped);
    CHECK(res.epochs_run < 50);
}

TEST_CASE("optimizer config validation") {
    OptimizerConfig cfg;
    cfg.lambda = 0.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = OptimizerConfig{};
    cfg.gamma = -1.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = OptimizerConfig{};
    cfg.m = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("trace serializes to the documented CSV header") {
    std::vector<xmh::TraceRow> trace = {{0, "init", {}}, {1, "dict", {}}};
    std::string csv = xmh::trace_to_csv(trace);
    CHECK(csv.rfind("epoch,step,pairwise,semantic,quantization,total\n", 0) == 0);
    CHECK(csv.find("1,dict,") != std::string::npos);
}
