// Two coupled feature encoders that produce real-valued code scores.
// The image path runs a private two-layer encoder on image features and
// the shared two-layer encoder on token features, concatenates both
// embeddings and maps them through a fusion head. The sketch path runs
// the SAME shared encoder (one storage, not a copy) followed by its own
// head. Hidden layers squash with tanh, heads stay affine so the
// quantization term of the outer objective is what drives outputs
// toward +-1. Training is momentum SGD on the summed Euclidean loss
// against fixed binary targets.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "codes.hpp"
#include "dataset.hpp"
#include "io.hpp"
#include "matrix.hpp"
#include "rng.hpp"

namespace xmh {

enum class Activation : std::uint32_t { tanh = 0, identity = 1 };

struct AffineLayer {
    DenseMatrix w; // out x in
    std::vector<double> b;

    AffineLayer() = default;
    AffineLayer(std::size_t out, std::size_t in) : w(out, in), b(out, 0.0) {}

    std::size_t out_dim() const { return w.rows(); }
    std::size_t in_dim() const { return w.cols(); }
    std::size_t param_count() const { return w.size() + b.size(); }
};

struct SgdConfig {
    double learning_rate = 0.001;
    double momentum = 0.9;
    std::size_t batch_size = 64;
    double lr_decay = 0.3; // multiplier applied at each epoch end
    std::uint64_t seed = 0;

    void validate() const {
        if (!(learning_rate > 0.0)) throw std::invalid_argument("sgd: learning_rate must be positive");
        if (momentum < 0.0 || momentum >= 1.0)
            throw std::invalid_argument("sgd: momentum must be in [0, 1)");
        if (batch_size < 1) throw std::invalid_argument("sgd: batch_size must be at least 1");
        if (!(lr_decay > 0.0)) throw std::invalid_argument("sgd: lr_decay must be positive");
    }
};

struct HashModel {
    AffineLayer img1, img2;            // private image encoder, p1 -> h -> h
    AffineLayer sh1, sh2;              // shared encoder, p2 -> h -> h, used by both paths
    AffineLayer fusion;                // 2h -> m, image-side head
    AffineLayer sketch_head;           // h -> m, sketch-side head
    Activation activation = Activation::tanh;

    std::size_t p1() const { return img1.in_dim(); }
    std::size_t p2() const { return sh1.in_dim(); }
    std::size_t hidden() const { return img1.out_dim(); }
    std::size_t m() const { return fusion.out_dim(); }

    template <class Fn>
    void for_each_layer(Fn&& fn) {
        fn(img1);
        fn(img2);
        fn(sh1);
        fn(sh2);
        fn(fusion);
        fn(sketch_head);
    }
    template <class Fn>
    void for_each_layer(Fn&& fn) const {
        fn(img1);
        fn(img2);
        fn(sh1);
        fn(sh2);
        fn(fusion);
        fn(sketch_head);
    }

    std::size_t param_count() const {
        std::size_t n = 0;
        for_each_layer([&](const AffineLayer& l) { n += l.param_count(); });
        return n;
    }

    // same layer shapes, all parameters zero; used for gradients and velocity
    HashModel zeros_like() const {
        HashModel z = *this;
        z.for_each_layer([](AffineLayer& l) {
            for (std::size_t i = 0; i < l.w.size(); ++i) l.w.data()[i] = 0.0;
            for (auto& v : l.b) v = 0.0;
        });
        return z;
    }
};

namespace detail {

inline void init_layer(AffineLayer& l, Rng& rng) {
    double a = std::sqrt(6.0 / static_cast<double>(l.in_dim() + l.out_dim()));
    for (std::size_t i = 0; i < l.w.size(); ++i) l.w.data()[i] = rng.uniform(-a, a);
    for (auto& v : l.b) v = 0.0;
}

} // namespace detail

inline HashModel make_hash_model(std::size_t p1, std::size_t p2, std::size_t hidden, std::size_t m,
                                 std::uint64_t seed, Activation act = Activation::tanh) {
    if (p1 < 1 || p2 < 1 || hidden < 1 || m < 1)
        throw std::invalid_argument("make_hash_model: all dims must be at least 1");
    HashModel hm;
    hm.activation = act;
    hm.img1 = AffineLayer(hidden, p1);
    hm.img2 = AffineLayer(hidden, hidden);
    hm.sh1 = AffineLayer(hidden, p2);
    hm.sh2 = AffineLayer(hidden, hidden);
    hm.fusion = AffineLayer(m, 2 * hidden);
    hm.sketch_head = AffineLayer(m, hidden);
    Rng rng = Rng::stream(seed, "hash-model/init");
    hm.for_each_layer([&](AffineLayer& l) { detail::init_layer(l, rng); });
    return hm;
}

namespace detail {

inline DenseMatrix affine_forward(const AffineLayer& l, const DenseMatrix& x) {
    if (x.rows() != l.in_dim())
        throw std::invalid_argument("hash model: input dim " + std::to_string(x.rows()) +
                                    " does not match layer expecting " +
                                    std::to_string(l.in_dim()));
    DenseMatrix out = matmul(l.w, x);
    for (std::size_t i = 0; i < out.rows(); ++i) {
        double bi = l.b[i];
        double* row = out.row_ptr(i);
        for (std::size_t j = 0; j < out.cols(); ++j) row[j] += bi;
    }
    return out;
}

inline void apply_activation(DenseMatrix& z, Activation act) {
    if (act == Activation::identity) return;
    for (std::size_t i = 0; i < z.size(); ++i) z.data()[i] = std::tanh(z.data()[i]);
}

// multiply upstream gradient by the activation derivative, given the
// post-activation values (tanh' = 1 - tanh^2)
inline void backprop_activation(DenseMatrix& delta, const DenseMatrix& activated, Activation act) {
    if (act == Activation::identity) return;
    for (std::size_t i = 0; i < delta.size(); ++i) {
        double a = activated.data()[i];
        delta.data()[i] *= 1.0 - a * a;
    }
}

// accumulates dL/dw and dL/db for a layer whose forward was w*x + b,
// returns dL/dx
inline DenseMatrix affine_backward(const AffineLayer& l, const DenseMatrix& x,
                                   const DenseMatrix& delta, AffineLayer& grad) {
    DenseMatrix gw = matmul(delta, transpose(x));
    for (std::size_t i = 0; i < gw.size(); ++i) grad.w.data()[i] += gw.data()[i];
    for (std::size_t i = 0; i < delta.rows(); ++i) {
        double s = 0.0;
        const double* row = delta.row_ptr(i);
        for (std::size_t j = 0; j < delta.cols(); ++j) s += row[j];
        grad.b[i] += s;
    }
    return matmul(transpose(l.w), delta);
}

struct SharedTrace {
    DenseMatrix in;  // input batch
    DenseMatrix h1;  // after first layer + activation
    DenseMatrix h2;  // after second layer + activation
};

inline SharedTrace run_shared(const HashModel& hm, const DenseMatrix& x) {
    SharedTrace t;
    t.in = x;
    t.h1 = affine_forward(hm.sh1, x);
    apply_activation(t.h1, hm.activation);
    t.h2 = affine_forward(hm.sh2, t.h1);
    apply_activation(t.h2, hm.activation);
    return t;
}

// gradient of the shared encoder given dL/d(h2); accumulates into grad
inline void backprop_shared(const HashModel& hm, const SharedTrace& t, DenseMatrix delta,
                            HashModel& grad) {
    backprop_activation(delta, t.h2, hm.activation);
    DenseMatrix d1 = affine_backward(hm.sh2, t.h1, delta, grad.sh2);
    backprop_activation(d1, t.h1, hm.activation);
    affine_backward(hm.sh1, t.in, d1, grad.sh1);
}

} // namespace detail

inline DenseMatrix forward_image(const HashModel& hm, const DenseMatrix& image_feat,
                                 const DenseMatrix& token_feat) {
    if (image_feat.cols() != token_feat.cols())
        throw std::invalid_argument("forward_image: image and token batches not index-aligned");
    DenseMatrix a1 = detail::affine_forward(hm.img1, image_feat);
    detail::apply_activation(a1, hm.activation);
    DenseMatrix a2 = detail::affine_forward(hm.img2, a1);
    detail::apply_activation(a2, hm.activation);
    detail::SharedTrace tok = detail::run_shared(hm, token_feat);

    const std::size_t h = hm.hidden();
    DenseMatrix cat(2 * h, image_feat.cols());
    for (std::size_t i = 0; i < h; ++i)
        for (std::size_t j = 0; j < cat.cols(); ++j) {
            cat(i, j) = a2(i, j);
            cat(h + i, j) = tok.h2(i, j);
        }
    return detail::affine_forward(hm.fusion, cat);
}

inline DenseMatrix forward_sketch(const HashModel& hm, const DenseMatrix& sketch_feat) {
    detail::SharedTrace t = detail::run_shared(hm, sketch_feat);
    return detail::affine_forward(hm.sketch_head, t.h2);
}

inline CodeMatrix encode_image(const HashModel& hm, const DenseMatrix& image_feat,
                               const DenseMatrix& token_feat) {
    return CodeMatrix::from_dense(forward_image(hm, image_feat, token_feat));
}

inline CodeMatrix encode_sketch(const HashModel& hm, const DenseMatrix& sketch_feat) {
    return CodeMatrix::from_dense(forward_sketch(hm, sketch_feat));
}

// Loss over one paired batch:
//   scale_i * ||F1(img, tok) - T1||^2 + scale_s * ||F2(skc) - T2||^2.
// Gradients accumulate into `grad`, which must be zeros_like the model.
// Either side may be empty (zero columns); its term is skipped. The
// optional out-params receive the unscaled per-side squared errors.
inline double model_loss_and_grad(const HashModel& hm, const DenseMatrix& image_feat,
                                  const DenseMatrix& token_feat, const DenseMatrix& target_i,
                                  const DenseMatrix& sketch_feat, const DenseMatrix& target_s,
                                  double scale_i, double scale_s, HashModel& grad,
                                  double* sse_i = nullptr, double* sse_s = nullptr) {
    double loss = 0.0;
    if (sse_i) *sse_i = 0.0;
    if (sse_s) *sse_s = 0.0;
    const std::size_t h = hm.hidden();

    if (image_feat.cols() > 0) {
        if (target_i.rows() != hm.m() || target_i.cols() != image_feat.cols())
            throw std::invalid_argument("model_loss_and_grad: image targets misshaped");
        DenseMatrix a1 = detail::affine_forward(hm.img1, image_feat);
        detail::apply_activation(a1, hm.activation);
        DenseMatrix a2 = detail::affine_forward(hm.img2, a1);
        detail::apply_activation(a2, hm.activation);
        detail::SharedTrace tok = detail::run_shared(hm, token_feat);

        DenseMatrix cat(2 * h, image_feat.cols());
        for (std::size_t i = 0; i < h; ++i)
            for (std::size_t j = 0; j < cat.cols(); ++j) {
                cat(i, j) = a2(i, j);
                cat(h + i, j) = tok.h2(i, j);
            }
        DenseMatrix f1 = detail::affine_forward(hm.fusion, cat);

        DenseMatrix delta(f1.rows(), f1.cols());
        for (std::size_t i = 0; i < f1.size(); ++i) {
            double d = f1.data()[i] - target_i.data()[i];
            loss += scale_i * d * d;
            if (sse_i) *sse_i += d * d;
            delta.data()[i] = 2.0 * scale_i * d;
        }
        DenseMatrix dcat = detail::affine_backward(hm.fusion, cat, delta, grad.fusion);

        DenseMatrix da2(h, dcat.cols());
        DenseMatrix dtok(h, dcat.cols());
        for (std::size_t i = 0; i < h; ++i)
            for (std::size_t j = 0; j < dcat.cols(); ++j) {
                da2(i, j) = dcat(i, j);
                dtok(i, j) = dcat(h + i, j);
            }
        detail::backprop_activation(da2, a2, hm.activation);
        DenseMatrix da1 = detail::affine_backward(hm.img2, a1, da2, grad.img2);
        detail::backprop_activation(da1, a1, hm.activation);
        detail::affine_backward(hm.img1, image_feat, da1, grad.img1);
        detail::backprop_shared(hm, tok, std::move(dtok), grad);
    }

    if (sketch_feat.cols() > 0) {
        if (target_s.rows() != hm.m() || target_s.cols() != sketch_feat.cols())
            throw std::invalid_argument("model_loss_and_grad: sketch targets misshaped");
        detail::SharedTrace t = detail::run_shared(hm, sketch_feat);
        DenseMatrix f2 = detail::affine_forward(hm.sketch_head, t.h2);

        DenseMatrix delta(f2.rows(), f2.cols());
        for (std::size_t i = 0; i < f2.size(); ++i) {
            double d = f2.data()[i] - target_s.data()[i];
            loss += scale_s * d * d;
            if (sse_s) *sse_s += d * d;
            delta.data()[i] = 2.0 * scale_s * d;
        }
        DenseMatrix dh2 = detail::affine_backward(hm.sketch_head, t.h2, delta, grad.sketch_head);
        detail::backprop_shared(hm, t, std::move(dh2), grad);
    }
    return loss;
}

namespace detail {

inline DenseMatrix take_columns(const DenseMatrix& src, const std::vector<std::size_t>& idx,
                                std::size_t begin, std::size_t end) {
    DenseMatrix out(src.rows(), end - begin);
    for (std::size_t j = begin; j < end; ++j)
        for (std::size_t i = 0; i < src.rows(); ++i) out(i, j - begin) = src(i, idx[j]);
    return out;
}

inline DenseMatrix take_code_columns(const CodeMatrix& src, const std::vector<std::size_t>& idx,
                                     std::size_t begin, std::size_t end) {
    DenseMatrix out(src.m, end - begin);
    for (std::size_t j = begin; j < end; ++j)
        for (std::size_t k = 0; k < src.m; ++k)
            out(k, j - begin) = static_cast<double>(src.at(k, idx[j]));
    return out;
}

} // namespace detail

// Momentum SGD over epochs. Keeps the velocity buffers and the decayed
// learning rate across train_epoch calls so the caller's loop matches a
// single continuous training run.
class SgdTrainer {
public:
    SgdTrainer(const SgdConfig& cfg, const HashModel& model_shape)
        : cfg_(cfg), lr_(cfg.learning_rate), velocity_(model_shape.zeros_like()) {
        cfg_.validate();
    }

    double learning_rate() const { return lr_; }

    // One pass over shuffled minibatches of both sides. Batches are
    // paired per step; the side with fewer batches recycles so every
    // minibatch of the longer side still gets a joint gradient. The
    // returned value is the mean per-sample loss at the parameters each
    // batch saw, counting each sample once.
    double train_epoch(HashModel& hm, const FeatureDataset& ds, const CodeMatrix& bi,
                       const CodeMatrix& bs) {
        if (bi.n != ds.n1() || bs.n != ds.n2())
            throw std::invalid_argument("train_epoch: code targets disagree with dataset");
        const std::size_t n1 = ds.n1();
        const std::size_t n2 = ds.n2();
        const std::size_t bsz = cfg_.batch_size;

        std::vector<std::size_t> order1(n1), order2(n2);
        for (std::size_t i = 0; i < n1; ++i) order1[i] = i;
        for (std::size_t j = 0; j < n2; ++j) order2[j] = j;
        Rng shuf1 = Rng::stream(cfg_.seed, "sgd/shuffle-image", epoch_);
        Rng shuf2 = Rng::stream(cfg_.seed, "sgd/shuffle-sketch", epoch_);
        shuf1.shuffle(order1);
        shuf2.shuffle(order2);

        const std::size_t nb1 = (n1 + bsz - 1) / bsz;
        const std::size_t nb2 = (n2 + bsz - 1) / bsz;
        const std::size_t steps = std::max(nb1, nb2);

        double loss_sum = 0.0;
        DenseMatrix empty;
        for (std::size_t s = 0; s < steps; ++s) {
            std::size_t i1 = s % nb1;
            std::size_t i2 = s % nb2;
            std::size_t b1_lo = i1 * bsz, b1_hi = std::min(n1, b1_lo + bsz);
            std::size_t b2_lo = i2 * bsz, b2_hi = std::min(n2, b2_lo + bsz);

            DenseMatrix xi = detail::take_columns(ds.image_features, order1, b1_lo, b1_hi);
            DenseMatrix xt = detail::take_columns(ds.token_features, order1, b1_lo, b1_hi);
            DenseMatrix ti = detail::take_code_columns(bi, order1, b1_lo, b1_hi);
            DenseMatrix xs = detail::take_columns(ds.sketch_features, order2, b2_lo, b2_hi);
            DenseMatrix ts = detail::take_code_columns(bs, order2, b2_lo, b2_hi);

            double scale_i = 1.0 / static_cast<double>(b1_hi - b1_lo);
            double scale_s = 1.0 / static_cast<double>(b2_hi - b2_lo);
            HashModel grad = hm.zeros_like();
            double sse_img = 0.0, sse_skc = 0.0;
            double batch_loss = model_loss_and_grad(hm, xi, xt, ti, xs, ts, scale_i, scale_s,
                                                    grad, &sse_img, &sse_skc);
            if (!std::isfinite(batch_loss))
                throw std::runtime_error(
                    "train_epoch: loss diverged to a non-finite value; lower the learning rate");

            // count each sample's loss once, at the params its first batch saw;
            // recycled batches of the shorter side keep training but stop
            // counting so the epoch loss covers each sample exactly once
            if (s < nb1) loss_sum += sse_img;
            if (s < nb2) loss_sum += sse_skc;

            apply_update(hm, grad);
        }
        lr_ *= cfg_.lr_decay;
        ++epoch_;
        return loss_sum / static_cast<double>(n1 + n2);
    }

private:
    void apply_update(HashModel& hm, const HashModel& grad) {
        const double mu = cfg_.momentum;
        const double lr = lr_;
        auto upd = [&](AffineLayer& p, AffineLayer& v, const AffineLayer& g) {
            for (std::size_t i = 0; i < p.w.size(); ++i) {
                v.w.data()[i] = mu * v.w.data()[i] - lr * g.w.data()[i];
                p.w.data()[i] += v.w.data()[i];
            }
            for (std::size_t i = 0; i < p.b.size(); ++i) {
                v.b[i] = mu * v.b[i] - lr * g.b[i];
                p.b[i] += v.b[i];
            }
        };
        upd(hm.img1, velocity_.img1, grad.img1);
        upd(hm.img2, velocity_.img2, grad.img2);
        upd(hm.sh1, velocity_.sh1, grad.sh1);
        upd(hm.sh2, velocity_.sh2, grad.sh2);
        upd(hm.fusion, velocity_.fusion, grad.fusion);
        upd(hm.sketch_head, velocity_.sketch_head, grad.sketch_head);
    }

    SgdConfig cfg_;
    double lr_;
    std::uint64_t epoch_ = 0;
    HashModel velocity_;
};

struct GradCheckOptions {
    double step = 1e-5;
    double corrupt_delta = 0.0; // test hook: perturbs one analytic gradient entry
};

// Central finite differences over every parameter against the analytic
// gradient of the paired-batch loss. Returns the max relative error
// |ga - gn| / max(|ga|, |gn|, 1e-8).
inline double gradient_check(const HashModel& hm, const DenseMatrix& image_feat,
                             const DenseMatrix& token_feat, const DenseMatrix& target_i,
                             const DenseMatrix& sketch_feat, const DenseMatrix& target_s,
                             const GradCheckOptions& opts = {}) {
    if (image_feat.cols() == 0 && sketch_feat.cols() == 0) return 0.0;

    HashModel analytic = hm.zeros_like();
    model_loss_and_grad(hm, image_feat, token_feat, target_i, sketch_feat, target_s, 1.0, 1.0,
                        analytic);

    // flatten parameter access: pointers into every layer of a model
    auto flatten = [](HashModel& model) {
        std::vector<double*> ptrs;
        model.for_each_layer([&](AffineLayer& l) {
            for (std::size_t i = 0; i < l.w.size(); ++i) ptrs.push_back(l.w.data() + i);
            for (auto& v : l.b) ptrs.push_back(&v);
        });
        return ptrs;
    };

    HashModel probe = hm;
    std::vector<double*> pp = flatten(probe);
    std::vector<double*> ga = flatten(analytic);
    if (opts.corrupt_delta != 0.0 && !ga.empty()) *ga[0] += opts.corrupt_delta;

    auto loss_at = [&]() {
        HashModel scratch = probe.zeros_like();
        return model_loss_and_grad(probe, image_feat, token_feat, target_i, sketch_feat, target_s,
                                   1.0, 1.0, scratch);
    };

    double max_rel = 0.0;
    const double eps = opts.step;
    for (std::size_t i = 0; i < pp.size(); ++i) {
        double saved = *pp[i];
        *pp[i] = saved + eps;
        double lp = loss_at();
        *pp[i] = saved - eps;
        double lm = loss_at();
        *pp[i] = saved;
        double gn = (lp - lm) / (2.0 * eps);
        double g = *ga[i];
        double rel = std::abs(g - gn) / std::max({std::abs(g), std::abs(gn), 1e-8});
        if (rel > max_rel) max_rel = rel;
    }
    return max_rel;
}

// Checkpoint: magic "XMHM", u32 version=1, u32 activation, u32 p1,
// u32 p2, u32 hidden, u32 m, then all parameters as little-endian f64 in
// layer order img1, img2, sh1, sh2, fusion, sketch_head, each layer as
// row-major weights then biases.
inline void save_model(const std::string& path, const HashModel& hm) {
    io::atomic_write_file(path, [&](std::ostream& os) {
        io::write_bytes(os, "XMHM", 4);
        io::write_u32(os, 1);
        io::write_u32(os, static_cast<std::uint32_t>(hm.activation));
        io::write_u32(os, static_cast<std::uint32_t>(hm.p1()));
        io::write_u32(os, static_cast<std::uint32_t>(hm.p2()));
        io::write_u32(os, static_cast<std::uint32_t>(hm.hidden()));
        io::write_u32(os, static_cast<std::uint32_t>(hm.m()));
        hm.for_each_layer([&](const AffineLayer& l) {
            for (std::size_t i = 0; i < l.w.size(); ++i) io::write_f64(os, l.w.data()[i]);
            for (double v : l.b) io::write_f64(os, v);
        });
    });
}

inline HashModel load_model(const std::string& path) {
    auto is = io::open_input(path);
    io::expect_magic(is, "XMHM", path);
    std::uint32_t version = io::read_u32(is, "version of " + path);
    if (version != 1) throw IoError(path + ": unsupported XMHM version " + std::to_string(version));
    std::uint32_t act = io::read_u32(is, "activation of " + path);
    if (act > 1) throw IoError(path + ": unknown activation code " + std::to_string(act));
    std::uint32_t p1 = io::read_u32(is, "p1 of " + path);
    std::uint32_t p2 = io::read_u32(is, "p2 of " + path);
    std::uint32_t hidden = io::read_u32(is, "hidden of " + path);
    std::uint32_t m = io::read_u32(is, "m of " + path);
    if (p1 == 0 || p2 == 0 || hidden == 0 || m == 0) throw IoError(path + ": zero dimension");

    HashModel hm;
    hm.activation = static_cast<Activation>(act);
    hm.img1 = AffineLayer(hidden, p1);
    hm.img2 = AffineLayer(hidden, hidden);
    hm.sh1 = AffineLayer(hidden, p2);
    hm.sh2 = AffineLayer(hidden, hidden);
    hm.fusion = AffineLayer(m, 2 * hidden);
    hm.sketch_head = AffineLayer(m, hidden);
    hm.for_each_layer([&](AffineLayer& l) {
        for (std::size_t i = 0; i < l.w.size(); ++i)
            l.w.data()[i] = io::read_f64(is, "weights of " + path);
        for (auto& v : l.b) v = io::read_f64(is, "biases of " + path);
    });
    io::require_eof(is, path);
    return hm;
}

} // namespace xmh
