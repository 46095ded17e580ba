// Alternating optimizer for the joint code-learning objective. Three
// coupled blocks: a closed-form dictionary solve, discrete cyclic
// coordinate descent over the two binary code matrices (one bit row at
// a time, each row having an exact sign solution), and the real-valued
// encoder outputs that enter through the quantization term. The epoch
// loop in fit() cycles dictionary -> image codes -> sketch codes ->
// encoder SGD and records the objective after every sub-step.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

#include "codes.hpp"
#include "dataset.hpp"
#include "hash_model.hpp"
#include "matrix.hpp"
#include "rng.hpp"

namespace xmh {

struct OptimizerConfig {
    std::size_t m = 32;            // code length in bits
    double lambda = 0.01;          // weight of the dictionary-fit term
    double gamma = 1e-5;           // weight of the quantization term
    std::size_t epochs = 15;
    std::size_t dcc_sweeps = 1;    // coordinate-descent sweeps per code update
    std::uint64_t seed = 0;
    double convergence_tol = 1e-6; // relative objective change for early stop

    void validate() const {
        if (m < 1) throw std::invalid_argument("optimizer: m must be at least 1");
        if (!(lambda > 0.0)) throw std::invalid_argument("optimizer: lambda must be positive");
        if (!(gamma > 0.0)) throw std::invalid_argument("optimizer: gamma must be positive");
        if (epochs < 1) throw std::invalid_argument("optimizer: epochs must be at least 1");
        if (dcc_sweeps < 1) throw std::invalid_argument("optimizer: dcc_sweeps must be at least 1");
    }
};

struct ObjectiveBreakdown {
    double pairwise = 0.0;     // ||m*W - BI^T BS||^2
    double semantic = 0.0;     // ||phiI - D*BI||^2 + ||phiS - D*BS||^2
    double quantization = 0.0; // ||F1 - BI||^2 + ||F2 - BS||^2
    double total = 0.0;        // pairwise + lambda*semantic + gamma*quantization
    double lambda = 0.0;
    double gamma = 0.0;
};

enum class Side { image, sketch };

// Everything the code updates read: both code matrices, the dictionary,
// the similarity matrix, the embedded labels and the current encoder
// outputs (zero matrices when encoder training is disabled).
struct OptimizerState {
    CodeMatrix bi;     // m x n1
    CodeMatrix bs;     // m x n2
    DenseMatrix d_mat; // d x m
    DenseMatrix w;     // n1 x n2
    DenseMatrix phi_i; // d x n1
    DenseMatrix phi_s; // d x n2
    DenseMatrix f1;    // m x n1
    DenseMatrix f2;    // m x n2
};

inline ObjectiveBreakdown objective(const CodeMatrix& bi, const CodeMatrix& bs,
                                    const DenseMatrix& d_mat, const DenseMatrix& phi_i,
                                    const DenseMatrix& phi_s, const DenseMatrix& w,
                                    const DenseMatrix& f1, const DenseMatrix& f2,
                                    const OptimizerConfig& cfg) {
    if (bi.m != cfg.m || bs.m != cfg.m)
        throw std::invalid_argument("objective: code length disagrees with config");
    if (w.rows() != bi.n || w.cols() != bs.n)
        throw std::invalid_argument("objective: similarity shape disagrees with codes");
    if (phi_i.cols() != bi.n || phi_s.cols() != bs.n || phi_i.rows() != phi_s.rows())
        throw std::invalid_argument("objective: embedded-label shapes disagree");
    if (d_mat.rows() != phi_i.rows() || d_mat.cols() != cfg.m)
        throw std::invalid_argument("objective: dictionary shape disagrees");
    if (f1.rows() != cfg.m || f1.cols() != bi.n || f2.rows() != cfg.m || f2.cols() != bs.n)
        throw std::invalid_argument("objective: encoder output shapes disagree");

    ObjectiveBreakdown out;
    out.lambda = cfg.lambda;
    out.gamma = cfg.gamma;

    const double mval = static_cast<double>(cfg.m);
    DenseMatrix bi_d = bi.to_dense();
    DenseMatrix bs_d = bs.to_dense();
    DenseMatrix prod = matmul(transpose(bi_d), bs_d); // n1 x n2
    double pw = 0.0;
    for (std::size_t i = 0; i < prod.rows(); ++i)
        for (std::size_t j = 0; j < prod.cols(); ++j) {
            double diff = mval * w(i, j) - prod(i, j);
            pw += diff * diff;
        }
    out.pairwise = pw;
    out.semantic = frob_sq_diff(phi_i, matmul(d_mat, bi_d)) +
                   frob_sq_diff(phi_s, matmul(d_mat, bs_d));
    out.quantization = frob_sq_diff(f1, bi_d) + frob_sq_diff(f2, bs_d);
    out.total = out.pairwise + out.lambda * out.semantic + out.gamma * out.quantization;
    return out;
}

inline ObjectiveBreakdown objective(const OptimizerState& st, const OptimizerConfig& cfg) {
    return objective(st.bi, st.bs, st.d_mat, st.phi_i, st.phi_s, st.w, st.f1, st.f2, cfg);
}

// D = (phiI*BI^T + phiS*BS^T)(BI*BI^T + BS*BS^T)^-1, the exact minimizer
// of the dictionary-fit term. The Gram matrix goes singular when bit
// rows are perfectly correlated, hence the ridge fallback in the solver.
inline DenseMatrix update_dictionary(const CodeMatrix& bi, const CodeMatrix& bs,
                                     const DenseMatrix& phi_i, const DenseMatrix& phi_s) {
    if (bi.m != bs.m) throw std::invalid_argument("update_dictionary: code lengths disagree");
    if (phi_i.cols() != bi.n || phi_s.cols() != bs.n || phi_i.rows() != phi_s.rows())
        throw std::invalid_argument("update_dictionary: embedded-label shapes disagree");
    DenseMatrix bi_d = bi.to_dense();
    DenseMatrix bs_d = bs.to_dense();
    DenseMatrix gram = matmul(bi_d, transpose(bi_d)); // m x m
    DenseMatrix gram_s = matmul(bs_d, transpose(bs_d));
    for (std::size_t i = 0; i < gram.size(); ++i) gram.data()[i] += gram_s.data()[i];
    DenseMatrix rhs = matmul(phi_i, transpose(bi_d)); // d x m
    DenseMatrix rhs_s = matmul(phi_s, transpose(bs_d));
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs.data()[i] += rhs_s.data()[i];
    return solve_spsd_auto(gram, rhs);
}

namespace detail {

// One cyclic sweep over the rows of `own`, sequential k = 0..m-1 so a
// row update sees rows already updated in the same sweep. The per-entry
// score is the linear coefficient of that bit in the objective; zero
// score keeps the previous bit, which preserves monotonicity.
inline void dcc_sweep(CodeMatrix& own, const DenseMatrix& r_mat, const DenseMatrix& coupling) {
    const std::size_t m = own.m;
    const std::size_t n = own.n;
    std::vector<double> score(n);
    for (std::size_t k = 0; k < m; ++k) {
        for (std::size_t i = 0; i < n; ++i) score[i] = r_mat(k, i);
        for (std::size_t l = 0; l < m; ++l) {
            if (l == k) continue;
            double c = coupling(k, l);
            if (c == 0.0) continue;
            const std::int8_t* row = &own.bits[l * n];
            for (std::size_t i = 0; i < n; ++i) score[i] -= c * static_cast<double>(row[i]);
        }
        std::int8_t* row_k = &own.bits[k * n];
        for (std::size_t i = 0; i < n; ++i) {
            if (score[i] > 0.0)
                row_k[i] = 1;
            else if (score[i] < 0.0)
                row_k[i] = -1;
            // score == 0: retain previous bit
        }
    }
}

} // namespace detail

// Discrete cyclic coordinate descent for one side's codes, holding the
// other side, the dictionary and the encoder outputs fixed. R collects
// every term that is linear in the updated matrix; the coupling matrix
// (cross-view Gram plus lambda-weighted dictionary Gram) carries the
// interactions between bit rows.
inline CodeMatrix update_codes(Side side, const OptimizerState& st, const OptimizerConfig& cfg) {
    const CodeMatrix& own = (side == Side::image) ? st.bi : st.bs;
    const CodeMatrix& opp = (side == Side::image) ? st.bs : st.bi;
    const DenseMatrix& phi_own = (side == Side::image) ? st.phi_i : st.phi_s;
    const DenseMatrix& f_own = (side == Side::image) ? st.f1 : st.f2;
    const std::size_t m = cfg.m;

    if (own.m != m || opp.m != m)
        throw std::invalid_argument("update_codes: code length disagrees with config");
    if (st.w.rows() != st.bi.n || st.w.cols() != st.bs.n)
        throw std::invalid_argument("update_codes: similarity shape disagrees with codes");
    if (f_own.rows() != m || f_own.cols() != own.n)
        throw std::invalid_argument("update_codes: encoder output shape disagrees");
    if (st.d_mat.cols() != m || st.d_mat.rows() != phi_own.rows())
        throw std::invalid_argument("update_codes: dictionary shape disagrees");

    DenseMatrix opp_d = opp.to_dense();

    // w oriented so that opp * w_to_own is m x n_own
    DenseMatrix w_to_own = (side == Side::image) ? transpose(st.w) : st.w;
    const double mval = static_cast<double>(m);
    for (std::size_t i = 0; i < w_to_own.size(); ++i) w_to_own.data()[i] *= mval;

    DenseMatrix r_mat = matmul(opp_d, w_to_own); // m x n_own
    DenseMatrix dict_term = matmul(transpose(st.d_mat), phi_own);
    for (std::size_t i = 0; i < r_mat.size(); ++i)
        r_mat.data()[i] += cfg.lambda * dict_term.data()[i] + cfg.gamma * f_own.data()[i];

    DenseMatrix coupling = matmul(opp_d, transpose(opp_d)); // m x m
    DenseMatrix dict_gram = matmul(transpose(st.d_mat), st.d_mat);
    for (std::size_t i = 0; i < coupling.size(); ++i)
        coupling.data()[i] += cfg.lambda * dict_gram.data()[i];

    CodeMatrix updated = own;
    for (std::size_t sweep = 0; sweep < cfg.dcc_sweeps; ++sweep)
        detail::dcc_sweep(updated, r_mat, coupling);
    return updated;
}

struct TraceRow {
    std::size_t epoch = 0; // 0 for the pre-loop snapshot
    std::string step;      // init, dict, codes_image, codes_sketch, hash_sgd
    ObjectiveBreakdown obj;
};

inline std::string trace_to_csv(const std::vector<TraceRow>& trace) {
    std::string out = "epoch,step,pairwise,semantic,quantization,total\n";
    char buf[256];
    for (const auto& row : trace) {
        std::snprintf(buf, sizeof(buf), "%zu,%s,%.17g,%.17g,%.17g,%.17g\n", row.epoch,
                      row.step.c_str(), row.obj.pairwise, row.obj.semantic, row.obj.quantization,
                      row.obj.total);
        out += buf;
    }
    return out;
}

struct FitResult {
    CodeMatrix bi;
    CodeMatrix bs;
    DenseMatrix d_mat;
    std::vector<TraceRow> trace;
    std::size_t epochs_run = 0;
    bool early_stopped = false;
};

// Full alternating run. Codes start as seeded uniform +-1; every epoch
// updates dictionary, image codes, sketch codes and (when a model is
// supplied) runs one SGD epoch on the encoders, after which the encoder
// outputs feeding the quantization term are refreshed. Passing model =
// nullptr trains codes alone with zero encoder outputs, which leaves
// the quantization term constant. Stops early when the relative change
// of the total objective across an epoch drops below convergence_tol.
inline FitResult fit(const FeatureDataset& ds, const SemanticEmbedding& emb, HashModel* model,
                     const OptimizerConfig& cfg, const SgdConfig& sgd_cfg) {
    cfg.validate();
    ds.validate();
    if (model) {
        if (model->m() != cfg.m)
            throw std::invalid_argument("fit: model code length disagrees with config");
        if (model->p1() != ds.image_features.rows() || model->p2() != ds.sketch_features.rows())
            throw std::invalid_argument("fit: model input dims disagree with dataset");
    }

    OptimizerState st;
    st.w = build_similarity(ds.image_labels, ds.sketch_labels).w;
    st.phi_i = embed_labels(emb, ds.image_labels);
    st.phi_s = embed_labels(emb, ds.sketch_labels);

    Rng rng_i = Rng::stream(cfg.seed, "optimizer/codes-image");
    Rng rng_s = Rng::stream(cfg.seed, "optimizer/codes-sketch");
    st.bi = CodeMatrix::random(cfg.m, ds.n1(), rng_i);
    st.bs = CodeMatrix::random(cfg.m, ds.n2(), rng_s);
    st.d_mat = DenseMatrix(emb.dim, cfg.m);

    auto refresh_outputs = [&]() {
        if (model) {
            st.f1 = forward_image(*model, ds.image_features, ds.token_features);
            st.f2 = forward_sketch(*model, ds.sketch_features);
        } else {
            st.f1 = DenseMatrix(cfg.m, ds.n1());
            st.f2 = DenseMatrix(cfg.m, ds.n2());
        }
    };
    refresh_outputs();

    FitResult res;
    res.trace.push_back({0, "init", objective(st, cfg)});

    SgdTrainer trainer(sgd_cfg, model ? *model : HashModel{});
    double prev_total = res.trace.back().obj.total;

    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        st.d_mat = update_dictionary(st.bi, st.bs, st.phi_i, st.phi_s);
        res.trace.push_back({epoch, "dict", objective(st, cfg)});

        st.bi = update_codes(Side::image, st, cfg);
        res.trace.push_back({epoch, "codes_image", objective(st, cfg)});

        st.bs = update_codes(Side::sketch, st, cfg);
        res.trace.push_back({epoch, "codes_sketch", objective(st, cfg)});

        if (model) {
            trainer.train_epoch(*model, ds, st.bi, st.bs);
            refresh_outputs();
            res.trace.push_back({epoch, "hash_sgd", objective(st, cfg)});
        }

        res.epochs_run = epoch;
        double total = res.trace.back().obj.total;
        double rel = std::abs(total - prev_total) / std::max(1.0, std::abs(prev_total));
        prev_total = total;
        if (rel < cfg.convergence_tol) {
            res.early_stopped = true;
            break;
        }
    }

    res.bi = st.bi;
    res.bs = st.bs;
    res.d_mat = st.d_mat;
    return res;
}

} // namespace xmh
