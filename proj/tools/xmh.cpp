// Command-line front end: synthetic data generation, training, encoding,
// indexing, search, evaluation and a gradient self-check. Settings come
// from a JSON config file with flat dotted keys; command-line flags
// override file values. Exit codes: 0 success, 1 validation or check
// failure, 2 I/O or format error.
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <xmh/xmh.hpp>

namespace fs = std::filesystem;

namespace {

// ---------------------------------------------------------------- settings

const char* kKnownKeys[] = {
    "seed",
    "out",
    "threads",
    "optimizer.bits",
    "optimizer.lambda",
    "optimizer.gamma",
    "optimizer.epochs",
    "optimizer.sweeps",
    "optimizer.tol",
    "sgd.learning_rate",
    "sgd.momentum",
    "sgd.batch_size",
    "sgd.lr_decay",
    "model.hidden",
    "embedding.dim",
    "data.classes",
    "data.n1",
    "data.n2",
    "data.dim_image",
    "data.dim_shared",
    "data.cluster_sep",
    "data.noise_sigma",
    "data.queries",
    "search.k",
    "search.radius",
    "eval.k",
    "eval.radius",
    "benchmark.repetitions",
};

bool known_key(const std::string& k) {
    for (const char* name : kKnownKeys)
        if (k == name) return true;
    return false;
}

struct Settings {
    std::map<std::string, nlohmann::json> kv;

    bool has(const std::string& k) const { return kv.count(k) != 0; }

    double num(const std::string& k, double dflt) const {
        auto it = kv.find(k);
        if (it == kv.end()) return dflt;
        if (!it->second.is_number())
            throw std::invalid_argument("config: " + k + " must be a number");
        return it->second.get<double>();
    }

    std::uint64_t uint(const std::string& k, std::uint64_t dflt) const {
        auto it = kv.find(k);
        if (it == kv.end()) return dflt;
        const auto& v = it->second;
        bool ok = v.is_number_unsigned() ||
                  (v.is_number_integer() && v.get<std::int64_t>() >= 0);
        if (!ok) throw std::invalid_argument("config: " + k + " must be a non-negative integer");
        return v.get<std::uint64_t>();
    }

    std::string str(const std::string& k, const std::string& dflt) const {
        auto it = kv.find(k);
        if (it == kv.end()) return dflt;
        if (!it->second.is_string())
            throw std::invalid_argument("config: " + k + " must be a string");
        return it->second.get<std::string>();
    }
};

void load_config(const std::string& path, Settings& s) {
    auto is = xmh::io::open_input(path);
    nlohmann::json j;
    try {
        is >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw xmh::IoError(path + ": " + e.what());
    }
    if (!j.is_object()) throw xmh::IoError(path + ": expected a JSON object of dotted keys");
    for (const auto& [k, v] : j.items()) {
        if (!known_key(k)) throw std::invalid_argument("config: unknown key '" + k + "'");
        if (v.is_object() || v.is_array() || v.is_null())
            throw std::invalid_argument("config: " + k + " must be a scalar");
        s.kv[k] = v;
    }
}

// ----------------------------------------------------------------- helpers

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw xmh::IoError("cannot create output directory " + dir + ": " + ec.message());
}

std::vector<std::uint64_t> seq_ids(std::size_t n) {
    std::vector<std::uint64_t> ids(n);
    std::iota(ids.begin(), ids.end(), 0);
    return ids;
}

void write_text(const std::string& path, const std::string& text) {
    xmh::io::atomic_write_file(path, [&](std::ostream& os) { os << text; });
}

xmh::DenseMatrix slice_cols(const xmh::DenseMatrix& a, std::size_t lo, std::size_t hi) {
    xmh::DenseMatrix out(a.rows(), hi - lo);
    for (std::size_t r = 0; r < a.rows(); ++r)
        for (std::size_t c = lo; c < hi; ++c) out(r, c - lo) = a(r, c);
    return out;
}

std::map<int, std::size_t> class_counts(const std::vector<int>& labels) {
    std::map<int, std::size_t> counts;
    for (int y : labels) ++counts[y];
    return counts;
}

void print_counts(const char* name, const std::vector<int>& labels) {
    std::cout << "  " << name << " class counts:";
    for (const auto& [cls, cnt] : class_counts(labels)) std::cout << " " << cls << ":" << cnt;
    std::cout << "\n";
}

int max_label(const std::vector<int>& labels) {
    int m = -1;
    for (int y : labels) m = std::max(m, y);
    return m;
}

// ---------------------------------------------------------------- commands

void cmd_generate(const Settings& s) {
    std::uint64_t seed = s.uint("seed", 42);
    int classes = static_cast<int>(s.uint("data.classes", 5));
    std::size_t n1 = s.uint("data.n1", 500);
    std::size_t n2 = s.uint("data.n2", 250);
    std::size_t p1 = s.uint("data.dim_image", 64);
    std::size_t p2 = s.uint("data.dim_shared", 48);
    double sep = s.num("data.cluster_sep", 8.0);
    double sigma = s.num("data.noise_sigma", 0.5);
    std::size_t nq = s.uint("data.queries", 50);
    std::string out = s.str("out", ".");
    ensure_dir(out);

    // queries ride along as extra sketch columns of the same generation,
    // then split off so they stay held out from training files
    auto ds = xmh::generate_synthetic(classes, n1, n2 + nq, p1, p2, sep, sigma, seed);

    xmh::save_features(out + "/image_features.xmhf", ds.image_features);
    xmh::save_features(out + "/token_features.xmhf", ds.token_features);
    xmh::save_features(out + "/sketch_features.xmhf", slice_cols(ds.sketch_features, 0, n2));
    xmh::save_labels(out + "/image_labels.csv", ds.image_labels);
    std::vector<int> train_sl(ds.sketch_labels.begin(), ds.sketch_labels.begin() + n2);
    xmh::save_labels(out + "/sketch_labels.csv", train_sl);
    if (nq > 0) {
        xmh::save_features(out + "/query_sketch_features.xmhf",
                           slice_cols(ds.sketch_features, n2, n2 + nq));
        std::vector<int> query_sl(ds.sketch_labels.begin() + n2, ds.sketch_labels.end());
        xmh::save_labels(out + "/query_labels.csv", query_sl);
    }

    // recount from the files just written so the summary reflects disk state
    auto il = xmh::load_labels(out + "/image_labels.csv");
    auto sl = xmh::load_labels(out + "/sketch_labels.csv");
    std::cout << "dataset written to " << out << "\n";
    std::cout << "  images: " << n1 << " samples x " << p1 << " dims\n";
    std::cout << "  tokens: " << n1 << " samples x " << p2 << " dims\n";
    std::cout << "  sketches: " << n2 << " samples x " << p2 << " dims\n";
    std::cout << "  query sketches: " << nq << "\n";
    std::cout << "  classes: " << classes << "\n";
    print_counts("image", il);
    print_counts("sketch", sl);
}

void cmd_train(const Settings& s, const std::string& data_dir) {
    std::uint64_t seed = s.uint("seed", 42);
    std::string out = s.str("out", ".");
    ensure_dir(out);

    xmh::FeatureDataset ds;
    ds.image_features = xmh::load_features(data_dir + "/image_features.xmhf");
    ds.token_features = xmh::load_features(data_dir + "/token_features.xmhf");
    ds.sketch_features = xmh::load_features(data_dir + "/sketch_features.xmhf");
    ds.image_labels = xmh::load_labels(data_dir + "/image_labels.csv");
    ds.sketch_labels = xmh::load_labels(data_dir + "/sketch_labels.csv");
    int top = std::max(max_label(ds.image_labels), max_label(ds.sketch_labels));
    if (top < 0) throw std::invalid_argument("train: dataset has no labeled samples");
    ds.num_classes = top + 1;
    ds.validate();

    xmh::OptimizerConfig ocfg;
    ocfg.m = s.uint("optimizer.bits", 32);
    ocfg.lambda = s.num("optimizer.lambda", 0.01);
    ocfg.gamma = s.num("optimizer.gamma", 1e-5);
    ocfg.epochs = s.uint("optimizer.epochs", 15);
    ocfg.dcc_sweeps = s.uint("optimizer.sweeps", 1);
    ocfg.seed = seed;
    ocfg.convergence_tol = s.num("optimizer.tol", 1e-6);

    xmh::SgdConfig scfg;
    scfg.learning_rate = s.num("sgd.learning_rate", 0.001);
    scfg.momentum = s.num("sgd.momentum", 0.9);
    scfg.batch_size = s.uint("sgd.batch_size", 64);
    scfg.lr_decay = s.num("sgd.lr_decay", 0.3);
    scfg.seed = seed;

    auto emb = xmh::synth_embedding(s.uint("embedding.dim", 32), ds.num_classes, seed);
    auto model = xmh::make_hash_model(ds.image_features.rows(), ds.sketch_features.rows(),
                                      s.uint("model.hidden", 64), ocfg.m, seed);

    auto res = xmh::fit(ds, emb, &model, ocfg, scfg);

    xmh::save_model(out + "/model.xmhm", model);
    xmh::save_index(out + "/codes_image.dshc", xmh::pack(res.bi, seq_ids(res.bi.n)));
    xmh::save_index(out + "/codes_sketch.dshc", xmh::pack(res.bs, seq_ids(res.bs.n)));
    write_text(out + "/trace.csv", xmh::trace_to_csv(res.trace));

    const auto& last = res.trace.back().obj;
    std::cout << "trained " << ocfg.m << "-bit codes on " << ds.n1() << " image and " << ds.n2()
              << " sketch samples\n";
    std::cout << "  epochs run: " << res.epochs_run
              << (res.early_stopped ? " (stopped early)" : "") << "\n";
    std::cout << "  final objective: " << last.total << "\n";
    std::cout << "  wrote " << out << "/model.xmhm, codes_image.dshc, codes_sketch.dshc, "
              << "trace.csv\n";
}

void cmd_encode(const Settings& s, const std::string& model_path, const std::string& side,
                const std::string& feat_path, const std::string& token_path) {
    auto hm = xmh::load_model(model_path);
    auto feats = xmh::load_features(feat_path);
    if (feats.cols() == 0) throw std::invalid_argument("encode: " + feat_path + " has no samples");

    xmh::CodeMatrix codes;
    if (side == "image") {
        if (token_path.empty())
            throw std::invalid_argument("encode: side=image needs paired token features");
        auto tokens = xmh::load_features(token_path);
        if (feats.rows() != hm.p1())
            throw std::invalid_argument("encode: image features have " +
                                        std::to_string(feats.rows()) + " dims, model expects " +
                                        std::to_string(hm.p1()));
        if (tokens.rows() != hm.p2())
            throw std::invalid_argument("encode: token features have " +
                                        std::to_string(tokens.rows()) + " dims, model expects " +
                                        std::to_string(hm.p2()));
        if (tokens.cols() != feats.cols())
            throw std::invalid_argument("encode: image and token sample counts disagree");
        codes = xmh::encode_image(hm, feats, tokens);
    } else if (side == "sketch") {
        if (!token_path.empty())
            throw std::invalid_argument("encode: token features only apply to side=image");
        if (feats.rows() != hm.p2())
            throw std::invalid_argument("encode: sketch features have " +
                                        std::to_string(feats.rows()) + " dims, model expects " +
                                        std::to_string(hm.p2()));
        codes = xmh::encode_sketch(hm, feats);
    } else {
        throw std::invalid_argument("encode: side must be image or sketch, got '" + side + "'");
    }

    std::string out = s.str("out", ".");
    ensure_dir(out);
    std::string path = out + "/codes_" + side + ".dshc";
    xmh::save_index(path, xmh::pack(codes, seq_ids(codes.n)));
    std::cout << "encoded " << codes.n << " samples to " << codes.m << "-bit codes at " << path
              << "\n";
}

void cmd_index(const Settings& s, const std::string& codes_path) {
    auto idx = xmh::load_index(codes_path);
    std::string out = s.str("out", ".");
    ensure_dir(out);
    std::string path = out + "/index.dshc";
    xmh::save_index(path, idx);
    std::cout << "index: " << idx.n << " codes x " << idx.m << " bits\n";
    std::cout << "  memory: " << idx.memory_bytes() << " bytes (payload "
              << xmh::code_payload_bytes(idx.n, idx.m) << " bytes)\n";
    std::cout << "  wrote " << path << "\n";
}

void cmd_search(const Settings& s, const std::string& index_path, const std::string& query_path,
                bool k_flag, bool radius_flag) {
    auto idx = xmh::load_index(index_path);
    auto queries = xmh::load_index(query_path);
    if (queries.m != idx.m)
        throw std::invalid_argument("search: index uses " + std::to_string(idx.m) +
                                    "-bit codes, queries use " + std::to_string(queries.m));
    if (k_flag && radius_flag)
        throw std::invalid_argument("search: pass either --k or --radius, not both");

    bool radius_mode = radius_flag || (!k_flag && s.has("search.radius"));
    std::size_t threads = s.uint("threads", 0);

    std::vector<std::vector<xmh::SearchHit>> hits;
    std::size_t k = 0;
    if (radius_mode) {
        std::size_t radius = s.uint("search.radius", 2);
        hits.reserve(queries.n);
        for (std::size_t q = 0; q < queries.n; ++q)
            hits.push_back(xmh::search_radius(idx, queries.code_ptr(q), radius));
        std::cout << "radius-" << radius << " search over " << idx.n << " codes\n";
    } else {
        k = s.uint("search.k", 10);
        hits = xmh::search_topk_batch(idx, queries, k, threads);
        std::cout << "top-" << k << " search over " << idx.n << " codes\n";
    }

    std::string csv = "query,rank,id,distance\n";
    for (std::size_t q = 0; q < hits.size(); ++q) {
        std::cout << "  query " << q << ":";
        for (std::size_t r = 0; r < hits[q].size(); ++r) {
            const auto& h = hits[q][r];
            csv += std::to_string(q) + "," + std::to_string(r) + "," + std::to_string(h.id) +
                   "," + std::to_string(h.distance) + "\n";
            if (r < 10) std::cout << " " << h.id << ":" << h.distance;
        }
        if (hits[q].size() > 10) std::cout << " ...";
        std::cout << "\n";
    }

    std::string out = s.str("out", ".");
    ensure_dir(out);
    write_text(out + "/results.csv", csv);
    std::cout << "wrote " << out << "/results.csv\n";

    std::size_t reps = s.uint("benchmark.repetitions", 0);
    if (reps > 0) {
        auto bench = xmh::benchmark(idx, queries, reps, radius_mode ? 10 : k);
        std::printf("timing: median %.6f ms/query, iqr %.6f ms (%zu reps, %zu bytes index)\n",
                    bench.median_seconds * 1e3, bench.iqr_seconds * 1e3, bench.repetitions,
                    bench.memory_bytes);
    }
}

void cmd_eval(const Settings& s, const std::string& index_path, const std::string& query_path,
              const std::string& gallery_labels_path, const std::string& query_labels_path) {
    auto idx = xmh::load_index(index_path);
    auto queries = xmh::load_index(query_path);
    auto glabels = xmh::load_labels(gallery_labels_path);
    auto qlabels = xmh::load_labels(query_labels_path);

    std::size_t k = s.uint("eval.k", 200);
    std::size_t radius = s.uint("eval.radius", 2);
    std::size_t threads = s.uint("threads", 0);

    auto rep = xmh::evaluate_retrieval(idx, queries, qlabels, glabels, {k}, radius, threads);

    std::size_t reps = s.uint("benchmark.repetitions", 0);
    if (reps > 0) {
        rep.bench = xmh::benchmark(idx, queries, reps, k);
        rep.has_benchmark = true;
    }

    std::string out = s.str("out", ".");
    ensure_dir(out);
    write_text(out + "/metrics.json", xmh::metrics_to_json(rep));
    write_text(out + "/per_query_ap.csv", xmh::per_query_ap_csv(rep));
    write_text(out + "/pr_curve.csv", xmh::pr_curve_csv(rep));

    std::printf("MAP over %zu queries: %.4f\n", rep.num_queries, rep.map);
    std::printf("precision@%zu: %.4f\n", k, rep.precision_at_k[0].second);
    std::printf("hamming-ball precision (radius %zu): %.4f\n", radius, rep.hd2);
    if (rep.queries_without_relevant > 0)
        std::printf("warning: %zu queries have no relevant gallery items\n",
                    rep.queries_without_relevant);
    if (rep.has_benchmark)
        std::printf("timing: median %.6f ms/query, iqr %.6f ms\n", rep.bench.median_seconds * 1e3,
                    rep.bench.iqr_seconds * 1e3);
    std::cout << "wrote " << out << "/metrics.json, per_query_ap.csv, pr_curve.csv\n";
}

int cmd_gradcheck(const Settings& s, double corrupt) {
    std::uint64_t seed = s.uint("seed", 42);
    auto hm = xmh::make_hash_model(7, 5, 6, 4, seed);

    xmh::Rng rng = xmh::Rng::stream(seed, "gradcheck/data");
    auto fill = [&](std::size_t r, std::size_t c) {
        xmh::DenseMatrix a(r, c);
        for (std::size_t i = 0; i < a.size(); ++i) a.data()[i] = rng.gaussian();
        return a;
    };
    auto xi = fill(7, 3);
    auto xt = fill(5, 3);
    auto ti = fill(4, 3);
    auto xs = fill(5, 2);
    auto ts = fill(4, 2);

    xmh::GradCheckOptions opt;
    opt.corrupt_delta = corrupt;
    double err = xmh::gradient_check(hm, xi, xt, ti, xs, ts, opt);
    bool pass = err < 1e-4;
    std::printf("max relative gradient error %.3e (threshold 1e-04): %s\n", err,
                pass ? "PASS" : "FAIL");
    return pass ? 0 : 1;
}

// -------------------------------------------------------------------- main

struct FlagVals {
    std::string config;
    std::string out;
    std::uint64_t seed = 0;
    std::size_t bits = 0;
    double lambda = 0.0;
    double gamma = 0.0;
    std::size_t epochs = 0;
    std::size_t k = 0;
    std::size_t radius = 0;
    std::size_t threads = 0;
};

struct FlagOpts {
    CLI::Option* config = nullptr;
    CLI::Option* seed = nullptr;
    CLI::Option* bits = nullptr;
    CLI::Option* lambda = nullptr;
    CLI::Option* gamma = nullptr;
    CLI::Option* epochs = nullptr;
    CLI::Option* k = nullptr;
    CLI::Option* radius = nullptr;
    CLI::Option* threads = nullptr;
    CLI::Option* out = nullptr;
};

enum : unsigned {
    kSeed = 1u << 0,
    kBits = 1u << 1,
    kObj = 1u << 2, // --lambda --gamma --epochs
    kK = 1u << 3,
    kRadius = 1u << 4,
    kThreads = 1u << 5,
};

FlagOpts add_std_flags(CLI::App* cmd, FlagVals& v, unsigned mask) {
    FlagOpts o;
    o.config = cmd->add_option("--config", v.config, "JSON config file with flat dotted keys");
    o.out = cmd->add_option("--out", v.out, "output directory (default .)");
    if (mask & kSeed) o.seed = cmd->add_option("--seed", v.seed, "master RNG seed (default 42)");
    if (mask & kBits) o.bits = cmd->add_option("--bits", v.bits, "code length in bits");
    if (mask & kObj) {
        o.lambda = cmd->add_option("--lambda", v.lambda, "weight of the dictionary-fit term");
        o.gamma = cmd->add_option("--gamma", v.gamma, "weight of the quantization term");
        o.epochs = cmd->add_option("--epochs", v.epochs, "alternating-optimization epochs");
    }
    if (mask & kK) o.k = cmd->add_option("--k", v.k, "result-list cutoff");
    if (mask & kRadius) o.radius = cmd->add_option("--radius", v.radius, "Hamming ball radius");
    if (mask & kThreads)
        o.threads = cmd->add_option("--threads", v.threads,
                                    "worker threads (0 = available parallelism)");
    return o;
}

Settings build_settings(const FlagVals& v, const FlagOpts& o) {
    Settings s;
    if (o.config && o.config->count()) load_config(v.config, s);
    if (o.seed && o.seed->count()) s.kv["seed"] = v.seed;
    if (o.bits && o.bits->count()) s.kv["optimizer.bits"] = v.bits;
    if (o.lambda && o.lambda->count()) s.kv["optimizer.lambda"] = v.lambda;
    if (o.gamma && o.gamma->count()) s.kv["optimizer.gamma"] = v.gamma;
    if (o.epochs && o.epochs->count()) s.kv["optimizer.epochs"] = v.epochs;
    if (o.k && o.k->count()) {
        s.kv["search.k"] = v.k;
        s.kv["eval.k"] = v.k;
    }
    if (o.radius && o.radius->count()) {
        s.kv["search.radius"] = v.radius;
        s.kv["eval.radius"] = v.radius;
    }
    if (o.threads && o.threads->count()) s.kv["threads"] = v.threads;
    if (o.out && o.out->count()) s.kv["out"] = v.out;
    return s;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"cross-modal binary hashing: train, encode, index, search, evaluate"};
    app.require_subcommand(1);

    FlagVals v;

    auto* c_gen = app.add_subcommand("generate", "write a synthetic two-modality dataset");
    FlagOpts o_gen = add_std_flags(c_gen, v, kSeed);

    std::string data_dir;
    auto* c_train = app.add_subcommand("train", "learn codes, dictionary and encoders");
    c_train->add_option("data_dir", data_dir, "directory holding the dataset files")->required();
    FlagOpts o_train = add_std_flags(c_train, v, kSeed | kBits | kObj);

    std::string model_path, side, feat_path, token_path;
    auto* c_enc = app.add_subcommand("encode", "hash feature vectors with a trained model");
    c_enc->add_option("model", model_path, "model checkpoint (.xmhm)")->required();
    c_enc->add_option("side", side, "image or sketch")->required();
    c_enc->add_option("features", feat_path, "feature matrix (.xmhf or .csv)")->required();
    c_enc->add_option("tokens", token_path, "paired token features (side=image only)");
    FlagOpts o_enc = add_std_flags(c_enc, v, 0);

    std::string codes_path;
    auto* c_idx = app.add_subcommand("index", "validate a code file and write a search index");
    c_idx->add_option("codes", codes_path, "code file (.dshc)")->required();
    FlagOpts o_idx = add_std_flags(c_idx, v, 0);

    std::string index_path, query_path;
    auto* c_search = app.add_subcommand("search", "rank gallery codes for each query code");
    c_search->add_option("index", index_path, "gallery index (.dshc)")->required();
    c_search->add_option("queries", query_path, "query codes (.dshc)")->required();
    FlagOpts o_search = add_std_flags(c_search, v, kK | kRadius | kThreads);

    std::string gl_path, ql_path;
    auto* c_eval = app.add_subcommand("eval", "retrieval metrics for labeled codes");
    c_eval->add_option("index", index_path, "gallery index (.dshc)")->required();
    c_eval->add_option("queries", query_path, "query codes (.dshc)")->required();
    c_eval->add_option("gallery_labels", gl_path, "gallery label file")->required();
    c_eval->add_option("query_labels", ql_path, "query label file")->required();
    FlagOpts o_eval = add_std_flags(c_eval, v, kK | kRadius | kThreads);

    double corrupt = 0.0;
    auto* c_grad = app.add_subcommand("gradcheck", "finite-difference check of encoder gradients");
    FlagOpts o_grad = add_std_flags(c_grad, v, kSeed);
    c_grad->add_option("--corrupt", corrupt, "test hook: offset one gradient entry")
        ->group(""); // hidden

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (c_gen->parsed()) {
            cmd_generate(build_settings(v, o_gen));
        } else if (c_train->parsed()) {
            cmd_train(build_settings(v, o_train), data_dir);
        } else if (c_enc->parsed()) {
            cmd_encode(build_settings(v, o_enc), model_path, side, feat_path, token_path);
        } else if (c_idx->parsed()) {
            cmd_index(build_settings(v, o_idx), codes_path);
        } else if (c_search->parsed()) {
            cmd_search(build_settings(v, o_search), index_path, query_path,
                       o_search.k->count() > 0, o_search.radius->count() > 0);
        } else if (c_eval->parsed()) {
            cmd_eval(build_settings(v, o_eval), index_path, query_path, gl_path, ql_path);
        } else if (c_grad->parsed()) {
            return cmd_gradcheck(build_settings(v, o_grad), corrupt);
        }
    } catch (const xmh::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
