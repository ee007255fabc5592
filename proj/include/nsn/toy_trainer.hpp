#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <string>
#include <utility>
#include <vector>

#include "nsn/embedding.hpp"
#include "nsn/embedding_io.hpp"  // detail::open_file for CSV writers
#include "nsn/error.hpp"
#include "nsn/losses.hpp"
#include "nsn/rng.hpp"
#include "nsn/thread_pool.hpp"

namespace nsn {

struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> a;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, 0.0) {}

    double& at(std::size_t r, std::size_t c) { return a[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return a[r * cols + c]; }

    std::vector<double> mul(const std::vector<double>& x) const {
        require(x.size() == cols, Errc::dim_mismatch, "matrix-vector dim mismatch");
        std::vector<double> y(rows, 0.0);
        for (std::size_t r = 0; r < rows; ++r) {
            double s = 0.0;
            for (std::size_t c = 0; c < cols; ++c) s += a[r * cols + c] * x[c];
            y[r] = s;
        }
        return y;
    }
};

// Synthetic factor-structured data: inputs are [shape | texture | shortcut]
// blocks. Positives share the query's shape code (up to view noise) with the
// other blocks resampled; the non-semantic view replaces shape with fresh
// noise and keeps the query's texture and shortcut blocks.
struct ToyDataConfig {
    int n_classes = 10;
    int n_per_class = 50;
    int shape_dim = 8;
    int texture_dim = 8;
    int shortcut_dim = 0;
    // sigma_p on the shared shape code. The default is calibrated so the
    // documented alpha trends (monotone texture suppression, shape trade-off,
    // negative-count interaction) all hold with margin on the default sweep.
    double view_noise = 1.6;
    bool texture_resample = true;  // fresh texture/shortcut blocks in the positive

    int input_dim() const { return shape_dim + texture_dim + shortcut_dim; }

    void validate() const {
        require(n_classes >= 1 && n_per_class >= 1, Errc::invalid_argument,
                "class and per-class counts must be >= 1");
        require(shape_dim >= 1 && texture_dim >= 1 && shortcut_dim >= 0, Errc::invalid_argument,
                "shape/texture dims must be >= 1 and shortcut dim >= 0");
        require(view_noise >= 0.0, Errc::invalid_argument, "view noise must be >= 0");
    }
};

struct ToySample {
    std::vector<double> x_query;
    std::vector<double> x_positive;
    std::vector<double> x_ns;
    int class_id = 0;
};

inline std::vector<ToySample> generate_toy_dataset(const ToyDataConfig& cfg, RngStream& rng) {
    cfg.validate();
    const int ds = cfg.shape_dim, dt = cfg.texture_dim, dc = cfg.shortcut_dim;
    auto gaussians = [&](int n) {
        std::vector<double> v(static_cast<std::size_t>(n));
        for (double& x : v) x = rng.normal();
        return v;
    };
    std::vector<ToySample> data;
    data.reserve(static_cast<std::size_t>(cfg.n_classes) * cfg.n_per_class);
    for (int k = 0; k < cfg.n_classes; ++k) {
        const std::vector<double> s = gaussians(ds);  // per-class shape code
        for (int i = 0; i < cfg.n_per_class; ++i) {
            const std::vector<double> eps = gaussians(ds);
            const std::vector<double> t = gaussians(dt);
            const std::vector<double> c = gaussians(dc);
            const std::vector<double> eps_p = gaussians(ds);
            const std::vector<double> t_p = cfg.texture_resample ? gaussians(dt) : t;
            const std::vector<double> c_p = cfg.texture_resample ? gaussians(dc) : c;
            const std::vector<double> eps_ns = gaussians(ds);

            ToySample sample;
            sample.class_id = k;
            auto assemble = [&](const std::vector<double>& shape, const std::vector<double>& tex,
                                const std::vector<double>& cut) {
                std::vector<double> x;
                x.reserve(static_cast<std::size_t>(ds + dt + dc));
                x.insert(x.end(), shape.begin(), shape.end());
                x.insert(x.end(), tex.begin(), tex.end());
                x.insert(x.end(), cut.begin(), cut.end());
                return x;
            };
            std::vector<double> q_shape(ds), p_shape(ds);
            for (int j = 0; j < ds; ++j) {
                q_shape[j] = s[j] + cfg.view_noise * eps[j];
                p_shape[j] = s[j] + cfg.view_noise * eps_p[j];
            }
            sample.x_query = assemble(q_shape, t, c);
            sample.x_positive = assemble(p_shape, t_p, c_p);
            sample.x_ns = assemble(eps_ns, t, c);
            data.push_back(std::move(sample));
        }
    }
    return data;
}

struct LinearEncoder {
    Matrix W;
};

inline LinearEncoder make_encoder(std::size_t out_dim, std::size_t in_dim, RngStream& rng) {
    require(out_dim >= 2 && in_dim >= 1, Errc::invalid_argument,
            "encoder needs out_dim >= 2 and in_dim >= 1");
    LinearEncoder enc{Matrix(out_dim, in_dim)};
    const double scale = 1.0 / std::sqrt(static_cast<double>(in_dim));
    for (double& w : enc.W.a) w = scale * rng.normal();
    return enc;
}

inline Embedding encoder_forward(const LinearEncoder& enc, const std::vector<double>& x) {
    return Embedding::normalized(enc.W.mul(x));
}

namespace detail {

// Backpropagates dL/dz of one embedding through the unit normalization
// (Jacobian (I - z z^T)/||y||) and the linear map, accumulating into dW.
inline void accumulate_encoder_grad(const std::vector<double>& x, const std::vector<double>& y,
                                    const Embedding& z, const std::vector<double>& dz,
                                    Matrix& dW) {
    const double ynorm = l2_norm(y);
    const double zg = dot(z.values(), dz);
    for (std::size_t o = 0; o < dW.rows; ++o) {
        const double dy = (dz[o] - zg * z[o]) / ynorm;
        for (std::size_t i = 0; i < dW.cols; ++i) dW.at(o, i) += dy * x[i];
    }
}

}  // namespace detail

// Builds the contrastive batch a training step sees: the anchor's query,
// positive, and non-semantic views plus the other samples' query views as
// standard negatives, all through the same encoder.
inline ContrastiveBatch make_training_batch(const LinearEncoder& enc, const ToySample& anchor,
                                            const std::vector<const ToySample*>& negatives) {
    ContrastiveBatch batch{encoder_forward(enc, anchor.x_query),
                           encoder_forward(enc, anchor.x_positive),
                           encoder_forward(enc, anchor.x_ns),
                           {},
                           {}};
    batch.negatives.reserve(negatives.size());
    for (const ToySample* n : negatives) batch.negatives.push_back(encoder_forward(enc, n->x_query));
    return batch;
}

inline double batch_loss(const LinearEncoder& enc, const ToySample& anchor,
                         const std::vector<const ToySample*>& negatives, const LossConfig& cfg) {
    return loss_value(make_training_batch(enc, anchor, negatives), cfg);
}

// Analytic dL/dW for one training batch: loss gradients per embedding, chained
// through normalization and the shared linear map.
inline Matrix encoder_backward(const LinearEncoder& enc, const ToySample& anchor,
                               const std::vector<const ToySample*>& negatives,
                               const LossConfig& cfg) {
    const ContrastiveBatch batch = make_training_batch(enc, anchor, negatives);
    const BatchGradients g = grad_wrt_batch(batch, cfg);

    Matrix dW(enc.W.rows, enc.W.cols);
    detail::accumulate_encoder_grad(anchor.x_query, enc.W.mul(anchor.x_query), batch.z_i, g.d_z_i,
                                    dW);
    detail::accumulate_encoder_grad(anchor.x_positive, enc.W.mul(anchor.x_positive), batch.z_p,
                                    g.d_z_p, dW);
    if (!g.d_z_ns.empty())
        detail::accumulate_encoder_grad(anchor.x_ns, enc.W.mul(anchor.x_ns), *batch.z_ns, g.d_z_ns,
                                        dW);
    for (std::size_t n = 0; n < negatives.size(); ++n)
        detail::accumulate_encoder_grad(negatives[n]->x_query, enc.W.mul(negatives[n]->x_query),
                                        batch.negatives[n], g.d_negatives[n], dW);
    return dW;
}

// batch[0] is the anchor; remaining samples contribute their query views as
// standard negatives.
inline Matrix encoder_backward(const LinearEncoder& enc, const std::vector<ToySample>& batch,
                               const LossConfig& cfg) {
    require(!batch.empty(), Errc::empty_input, "empty training batch");
    std::vector<const ToySample*> negatives;
    negatives.reserve(batch.size() - 1);
    for (std::size_t i = 1; i < batch.size(); ++i) negatives.push_back(&batch[i]);
    return encoder_backward(enc, batch[0], negatives, cfg);
}

struct TrainConfig {
    int steps = 2000;
    double lr = 0.5;
    int batch_negatives = 16;  // in-batch stand-in for the memory-bank size
    int out_dim = 16;
    LossConfig loss;
    std::uint64_t seed = 0;

    void validate() const {
        require(steps >= 0, Errc::invalid_argument, "steps must be >= 0");
        require(lr > 0.0, Errc::invalid_argument, "lr must be > 0");
        require(batch_negatives >= 0, Errc::invalid_argument, "batch_negatives must be >= 0");
        require(out_dim >= 2, Errc::invalid_argument, "out_dim must be >= 2");
        loss.validate();
    }
};

struct MetricsRow {
    int epoch = 0;  // 0 = initialization, then one row per data-size step block
    double mean_ns_sim = 0.0;
    double mean_pos_sim = 0.0;
    double mean_same_class_sim = 0.0;
};
using MetricsTrace = std::vector<MetricsRow>;

struct RelianceReport {
    double texture_reliance = 0.0;      // mean cos(z_query, z_ns)
    double shape_clustering = 0.0;      // mean same-class minus cross-class query sim
    double shortcut_weight_share = 0.0;  // W column mass on the shortcut block
};

namespace detail {

struct DatasetSims {
    double mean_ns = 0.0;
    double mean_pos = 0.0;
    double mean_same = 0.0;
    double mean_cross = 0.0;
};

inline DatasetSims dataset_similarities(const LinearEncoder& enc,
                                        const std::vector<ToySample>& data) {
    require(!data.empty(), Errc::empty_input, "empty dataset");
    std::vector<Embedding> zq, zp, zns;
    zq.reserve(data.size());
    zp.reserve(data.size());
    zns.reserve(data.size());
    for (const auto& s : data) {
        zq.push_back(encoder_forward(enc, s.x_query));
        zp.push_back(encoder_forward(enc, s.x_positive));
        zns.push_back(encoder_forward(enc, s.x_ns));
    }
    DatasetSims out;
    for (std::size_t i = 0; i < data.size(); ++i) {
        out.mean_ns += dot(zq[i], zns[i]);
        out.mean_pos += dot(zq[i], zp[i]);
    }
    out.mean_ns /= static_cast<double>(data.size());
    out.mean_pos /= static_cast<double>(data.size());

    double same = 0.0, cross = 0.0;
    std::size_t n_same = 0, n_cross = 0;
    for (std::size_t i = 0; i < data.size(); ++i)
        for (std::size_t j = i + 1; j < data.size(); ++j) {
            const double d = dot(zq[i], zq[j]);
            if (data[i].class_id == data[j].class_id) {
                same += d;
                ++n_same;
            } else {
                cross += d;
                ++n_cross;
            }
        }
    out.mean_same = n_same ? same / static_cast<double>(n_same) : 0.0;
    out.mean_cross = n_cross ? cross / static_cast<double>(n_cross) : 0.0;
    return out;
}

}  // namespace detail

// Plain SGD on W. Each step draws one anchor sample and batch_negatives other
// samples (their query views) as standard negatives. Metrics are recorded at
// initialization and after every data-size block of steps (final partial block
// included).
inline std::pair<LinearEncoder, MetricsTrace> train(const std::vector<ToySample>& data,
                                                    const TrainConfig& tcfg, RngStream& rng) {
    tcfg.validate();
    require(!data.empty(), Errc::empty_input, "empty dataset");
    require(tcfg.batch_negatives == 0 || data.size() >= 2, Errc::invalid_argument,
            "need >= 2 samples to draw negatives");
    const std::size_t in_dim = data[0].x_query.size();
    LinearEncoder enc = make_encoder(static_cast<std::size_t>(tcfg.out_dim), in_dim, rng);

    MetricsTrace trace;
    auto record = [&](int epoch) {
        const detail::DatasetSims s = detail::dataset_similarities(enc, data);
        trace.push_back({epoch, s.mean_ns, s.mean_pos, s.mean_same});
    };
    record(0);

    const std::size_t n = data.size();
    std::vector<const ToySample*> negatives(static_cast<std::size_t>(tcfg.batch_negatives));
    int epoch = 0;
    for (int step = 1; step <= tcfg.steps; ++step) {
        const std::size_t anchor = static_cast<std::size_t>(rng.uniform_int(0, n - 1));
        for (auto& slot : negatives) {
            // Uniform over the other n-1 samples, no rejection loop.
            std::size_t j = static_cast<std::size_t>(rng.uniform_int(0, n - 2));
            if (j >= anchor) ++j;
            slot = &data[j];
        }
        const Matrix dW = encoder_backward(enc, data[anchor], negatives, tcfg.loss);
        for (std::size_t k = 0; k < enc.W.a.size(); ++k) enc.W.a[k] -= tcfg.lr * dW.a[k];

        if (step % static_cast<int>(n) == 0 || step == tcfg.steps) record(++epoch);
    }
    return {std::move(enc), std::move(trace)};
}

inline RelianceReport evaluate_reliance(const LinearEncoder& enc,
                                        const std::vector<ToySample>& data,
                                        const ToyDataConfig& cfg) {
    const detail::DatasetSims s = detail::dataset_similarities(enc, data);
    RelianceReport rep;
    rep.texture_reliance = s.mean_ns;
    rep.shape_clustering = s.mean_same - s.mean_cross;
    if (cfg.shortcut_dim > 0) {
        const std::size_t first = static_cast<std::size_t>(cfg.shape_dim + cfg.texture_dim);
        double shortcut = 0.0, total = 0.0;
        for (std::size_t o = 0; o < enc.W.rows; ++o)
            for (std::size_t i = 0; i < enc.W.cols; ++i) {
                const double w2 = enc.W.at(o, i) * enc.W.at(o, i);
                total += w2;
                if (i >= first) shortcut += w2;
            }
        rep.shortcut_weight_share = total > 0.0 ? shortcut / total : 0.0;
    }
    return rep;
}

// --- sweep over (alpha, seed) cells ------------------------------------------

struct SweepCell {
    double alpha = 0.0;
    std::uint64_t seed = 0;
    RelianceReport report;
};

// Each cell derives independent data/train streams from its seed, so a given
// seed sees the same dataset at every alpha. Cells may run in parallel; the
// result is sorted by (alpha, seed) regardless.
inline std::vector<SweepCell> run_toy_sweep(const std::vector<double>& alphas,
                                            const std::vector<std::uint64_t>& seeds,
                                            const ToyDataConfig& dcfg, const TrainConfig& base,
                                            unsigned workers = 1) {
    require(!alphas.empty() && !seeds.empty(), Errc::invalid_argument,
            "sweep needs at least one alpha and one seed");
    dcfg.validate();
    base.validate();

    std::vector<SweepCell> cells;
    for (double a : alphas)
        for (std::uint64_t s : seeds) cells.push_back({a, s, {}});

    parallel_for(cells.size(), workers, [&](std::size_t ci) {
        SweepCell& cell = cells[ci];
        RngStream data_rng(derive_seed(cell.seed, "toy-data"));
        RngStream train_rng(derive_seed(cell.seed, "toy-train"));
        const std::vector<ToySample> data = generate_toy_dataset(dcfg, data_rng);
        TrainConfig tcfg = base;
        tcfg.loss.alpha = cell.alpha;
        tcfg.seed = cell.seed;
        auto [enc, trace] = train(data, tcfg, train_rng);
        cell.report = evaluate_reliance(enc, data, dcfg);
    });

    std::stable_sort(cells.begin(), cells.end(), [](const SweepCell& a, const SweepCell& b) {
        return a.alpha != b.alpha ? a.alpha < b.alpha : a.seed < b.seed;
    });
    return cells;
}

// --- CSV serialization --------------------------------------------------------

inline void write_metrics_csv(const MetricsTrace& trace, const std::string& path) {
    detail::FilePtr f = detail::open_file(path, "wb");
    std::string text = "epoch,mean_ns_sim,mean_pos_sim,mean_same_class_sim\n";
    char row[256];
    for (const auto& r : trace) {
        std::snprintf(row, sizeof row, "%d,%.17g,%.17g,%.17g\n", r.epoch, r.mean_ns_sim,
                      r.mean_pos_sim, r.mean_same_class_sim);
        text += row;
    }
    require(std::fwrite(text.data(), 1, text.size(), f.get()) == text.size(), Errc::io_error,
            "short write: " + path);
}

inline void write_sweep_csv(const std::vector<SweepCell>& cells, const std::string& path) {
    detail::FilePtr f = detail::open_file(path, "wb");
    std::string text = "alpha,seed,texture_reliance,shape_clustering,shortcut_weight_share\n";
    char row[320];
    for (const auto& c : cells) {
        std::snprintf(row, sizeof row, "%.17g,%llu,%.17g,%.17g,%.17g\n", c.alpha,
                      static_cast<unsigned long long>(c.seed), c.report.texture_reliance,
                      c.report.shape_clustering, c.report.shortcut_weight_share);
        text += row;
    }
    require(std::fwrite(text.data(), 1, text.size(), f.get()) == text.size(), Errc::io_error,
            "short write: " + path);
}

}  // namespace nsn
