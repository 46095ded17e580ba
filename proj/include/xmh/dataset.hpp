// Dataset containers plus the pieces that turn labels into training
// signals: the cross-view similarity matrix, class-embedding tables and
// a synthetic two-modality generator for desk-scale experiments.
#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "matrix.hpp"
#include "rng.hpp"

namespace xmh {

// Paired image/token features plus unpaired sketch features. One sample
// per column. Token and sketch features share a dimensionality because
// they pass through the same encoder.
struct FeatureDataset {
    DenseMatrix image_features;  // p1 x n1
    DenseMatrix token_features;  // p2 x n1, index-aligned with image_features
    DenseMatrix sketch_features; // p2 x n2
    std::vector<int> image_labels;
    std::vector<int> sketch_labels;
    int num_classes = 0;

    std::size_t n1() const { return image_features.cols(); }
    std::size_t n2() const { return sketch_features.cols(); }

    void validate() const {
        if (token_features.cols() != image_features.cols())
            throw std::invalid_argument("dataset: token and image sample counts disagree");
        if (sketch_features.rows() != token_features.rows())
            throw std::invalid_argument("dataset: sketch and token feature dims disagree");
        if (image_labels.size() != n1() || sketch_labels.size() != n2())
            throw std::invalid_argument("dataset: label counts disagree with feature columns");
        for (int y : image_labels)
            if (y < 0 || y >= num_classes)
                throw std::invalid_argument("dataset: image label out of range");
        for (int y : sketch_labels)
            if (y < 0 || y >= num_classes)
                throw std::invalid_argument("dataset: sketch label out of range");
    }
};

struct SimilarityMatrix {
    DenseMatrix w; // n1 x n2, entries in {-1, +1}
};

struct SemanticEmbedding {
    DenseMatrix class_table; // dim x C
    std::size_t dim = 0;
};

// W_ij = +1 when the labels agree, -1 otherwise
inline SimilarityMatrix build_similarity(const std::vector<int>& image_labels,
                                         const std::vector<int>& sketch_labels) {
    if (image_labels.empty() || sketch_labels.empty())
        throw std::invalid_argument("build_similarity: empty label list");
    SimilarityMatrix s;
    s.w = DenseMatrix(image_labels.size(), sketch_labels.size());
    for (std::size_t i = 0; i < image_labels.size(); ++i)
        for (std::size_t j = 0; j < sketch_labels.size(); ++j)
            s.w(i, j) = (image_labels[i] == sketch_labels[j]) ? 1.0 : -1.0;
    return s;
}

// seeded Gaussian class table with unit-norm columns
inline SemanticEmbedding synth_embedding(std::size_t d, std::size_t num_classes,
                                         std::uint64_t seed) {
    if (d < 1 || num_classes < 1)
        throw std::invalid_argument("synth_embedding: d and C must be at least 1");
    SemanticEmbedding e;
    e.dim = d;
    e.class_table = DenseMatrix(d, num_classes);
    Rng rng = Rng::stream(seed, "embedding/table");
    for (std::size_t c = 0; c < num_classes; ++c) {
        double norm_sq = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            double v = rng.gaussian();
            e.class_table(i, c) = v;
            norm_sq += v * v;
        }
        double inv = 1.0 / std::sqrt(norm_sq);
        for (std::size_t i = 0; i < d; ++i) e.class_table(i, c) *= inv;
    }
    return e;
}

// column j of the result is the class-table column for labels[j]
inline DenseMatrix embed_labels(const SemanticEmbedding& e, const std::vector<int>& labels) {
    DenseMatrix out(e.dim, labels.size());
    for (std::size_t j = 0; j < labels.size(); ++j) {
        int y = labels[j];
        if (y < 0 || static_cast<std::size_t>(y) >= e.class_table.cols())
            throw std::invalid_argument("embed_labels: label " + std::to_string(y) +
                                        " outside table with " +
                                        std::to_string(e.class_table.cols()) + " classes");
        for (std::size_t i = 0; i < e.dim; ++i) out(i, j) = e.class_table(i, y);
    }
    return out;
}

namespace detail {

constexpr std::size_t kSyntheticLatentDim = 32;

// random affine view of the latent space, entries N(0,1)/sqrt(latent)
inline void fill_view(DenseMatrix& a, std::vector<double>& bias, std::size_t out_dim, Rng& rng) {
    a = DenseMatrix(out_dim, kSyntheticLatentDim);
    const double scale = 1.0 / std::sqrt(static_cast<double>(kSyntheticLatentDim));
    for (std::size_t i = 0; i < out_dim; ++i)
        for (std::size_t j = 0; j < kSyntheticLatentDim; ++j) a(i, j) = rng.gaussian() * scale;
    bias.assign(out_dim, 0.0);
    for (auto& b : bias) b = rng.gaussian();
}

inline void emit_sample(const DenseMatrix& view, const std::vector<double>& bias,
                        const std::vector<double>& proto, double sigma, Rng& noise,
                        DenseMatrix& out, std::size_t col) {
    for (std::size_t i = 0; i < view.rows(); ++i) {
        double v = bias[i];
        const double* row = view.row_ptr(i);
        for (std::size_t j = 0; j < proto.size(); ++j) v += row[j] * proto[j];
        if (sigma > 0.0) v += sigma * noise.gaussian();
        out(i, col) = v;
    }
}

} // namespace detail

// Two-modality clustered dataset. Each class owns one latent prototype;
// image features see it through one affine view, token and sketch
// features through a second shared view, all plus Gaussian noise.
// Labels are assigned round-robin so classes stay balanced.
inline FeatureDataset generate_synthetic(int num_classes, std::size_t n1, std::size_t n2,
                                         std::size_t p1, std::size_t p2, double cluster_sep,
                                         double noise_sigma, std::uint64_t seed) {
    if (num_classes < 1 || n1 < 1 || n2 < 1 || p1 < 1 || p2 < 1)
        throw std::invalid_argument("generate_synthetic: counts must be at least 1");
    if (!(cluster_sep > 0.0))
        throw std::invalid_argument("generate_synthetic: cluster_sep must be positive");

    const std::size_t latent = detail::kSyntheticLatentDim;
    Rng proto_rng = Rng::stream(seed, "synthetic/prototypes");
    std::vector<std::vector<double>> prototypes(num_classes);
    for (auto& p : prototypes) {
        p.resize(latent);
        double norm_sq = 0.0;
        for (auto& v : p) {
            v = proto_rng.gaussian();
            norm_sq += v * v;
        }
        double scale = cluster_sep / std::sqrt(norm_sq);
        for (auto& v : p) v *= scale;
    }

    DenseMatrix view_image, view_shared;
    std::vector<double> bias_image, bias_shared;
    Rng view_img_rng = Rng::stream(seed, "synthetic/view-image");
    Rng view_sh_rng = Rng::stream(seed, "synthetic/view-shared");
    detail::fill_view(view_image, bias_image, p1, view_img_rng);
    detail::fill_view(view_shared, bias_shared, p2, view_sh_rng);

    FeatureDataset ds;
    ds.num_classes = num_classes;
    ds.image_features = DenseMatrix(p1, n1);
    ds.token_features = DenseMatrix(p2, n1);
    ds.sketch_features = DenseMatrix(p2, n2);
    ds.image_labels.resize(n1);
    ds.sketch_labels.resize(n2);

    Rng noise_img = Rng::stream(seed, "synthetic/noise-image");
    Rng noise_tok = Rng::stream(seed, "synthetic/noise-token");
    Rng noise_skc = Rng::stream(seed, "synthetic/noise-sketch");

    for (std::size_t i = 0; i < n1; ++i) {
        int c = static_cast<int>(i % static_cast<std::size_t>(num_classes));
        ds.image_labels[i] = c;
        detail::emit_sample(view_image, bias_image, prototypes[c], noise_sigma, noise_img,
                            ds.image_features, i);
        detail::emit_sample(view_shared, bias_shared, prototypes[c], noise_sigma, noise_tok,
                            ds.token_features, i);
    }
    for (std::size_t j = 0; j < n2; ++j) {
        int c = static_cast<int>(j % static_cast<std::size_t>(num_classes));
        ds.sketch_labels[j] = c;
        detail::emit_sample(view_shared, bias_shared, prototypes[c], noise_sigma, noise_skc,
                            ds.sketch_features, j);
    }
    ds.validate();
    return ds;
}

} // namespace xmh
