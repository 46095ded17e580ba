// End-to-end walkthrough: make a small clustered dataset, learn binary
// codes plus encoders, hash held-out sketches and retrieve images.
#include <cstdio>

#include <xmh/xmh.hpp>

int main() {
    const std::uint64_t seed = 7;
    const int classes = 4;
    const std::size_t n1 = 200, n2 = 100, queries = 20;

    // extra sketch columns become held-out queries
    auto ds = xmh::generate_synthetic(classes, n1, n2 + queries, 32, 24, 8.0, 0.5, seed);
    xmh::FeatureDataset train = ds;
    train.sketch_features = xmh::DenseMatrix(ds.sketch_features.rows(), n2);
    for (std::size_t r = 0; r < ds.sketch_features.rows(); ++r)
        for (std::size_t c = 0; c < n2; ++c)
            train.sketch_features(r, c) = ds.sketch_features(r, c);
    train.sketch_labels.assign(ds.sketch_labels.begin(), ds.sketch_labels.begin() + n2);

    xmh::OptimizerConfig ocfg;
    ocfg.m = 32;
    ocfg.epochs = 8;
    ocfg.seed = seed;
    xmh::SgdConfig scfg;
    scfg.seed = seed;

    auto emb = xmh::synth_embedding(16, classes, seed);
    auto model = xmh::make_hash_model(32, 24, 48, ocfg.m, seed);
    auto fitres = xmh::fit(train, emb, &model, ocfg, scfg);
    std::printf("trained %zu epochs, final objective %.4g\n", fitres.epochs_run,
                fitres.trace.back().obj.total);

    // gallery: learned image codes; queries: encoder output on unseen sketches
    xmh::DenseMatrix qfeat(ds.sketch_features.rows(), queries);
    std::vector<int> qlabels(ds.sketch_labels.begin() + n2, ds.sketch_labels.end());
    for (std::size_t r = 0; r < qfeat.rows(); ++r)
        for (std::size_t c = 0; c < queries; ++c)
            qfeat(r, c) = ds.sketch_features(r, n2 + c);
    auto qcodes = xmh::encode_sketch(model, qfeat);

    auto gallery = xmh::pack(fitres.bi);
    auto qpacked = xmh::pack(qcodes);

    auto hits = xmh::search_topk(gallery, qpacked.code_ptr(0), 5);
    std::printf("query 0 (class %d) nearest images:", qlabels[0]);
    for (const auto& h : hits)
        std::printf(" id=%llu d=%zu y=%d", static_cast<unsigned long long>(h.id), h.distance,
                    train.image_labels[h.position]);
    std::printf("\n");

    auto rep = xmh::evaluate_retrieval(gallery, qpacked, qlabels, train.image_labels, {10});
    std::printf("MAP over %zu held-out queries: %.3f\n", rep.num_queries, rep.map);
    return 0;
}
