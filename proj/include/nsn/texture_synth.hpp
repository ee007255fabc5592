#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "nsn/error.hpp"
#include "nsn/image.hpp"
#include "nsn/rng.hpp"
#include "nsn/thread_pool.hpp"

namespace nsn {

// Parameters of the non-parametric per-pixel synthesis. gauss_sigma <= 0 means
// "use window/6.4". candidate_subsample 0 means "scan all exemplar positions".
struct SynthConfig {
    int out_size = 224;
    int window = 11;
    double gauss_sigma = 0.0;
    double tolerance = 0.1;
    int seed_block = 3;
    int candidate_subsample = 0;
    unsigned n_threads = 1;  // internal parallelism of the candidate scan

    double effective_sigma() const { return gauss_sigma > 0.0 ? gauss_sigma : window / 6.4; }

    void validate() const {
        require(out_size >= 1, Errc::invalid_argument, "out_size must be >= 1");
        require(window >= 3 && window % 2 == 1, Errc::invalid_argument,
                "window must be odd and >= 3");
        require(tolerance >= 0.0, Errc::invalid_argument, "tolerance must be >= 0");
        require(seed_block >= 1 && seed_block <= out_size, Errc::invalid_argument,
                "seed_block must be in [1, out_size]");
        require(candidate_subsample >= 0, Errc::invalid_argument,
                "candidate_subsample must be >= 0");
    }
};

// One or two square exemplar patches whose pixels are the only values the
// synthesizer may emit.
struct ExemplarSet {
    std::vector<Image> patches;
};

// Center patch plus one uniformly located patch, side 96 when the image
// allows, otherwise 48.
inline ExemplarSet extract_example_patches(const Image& source, RngStream& rng) {
    require(source.min_dim() >= 48, Errc::image_too_small,
            "image " + std::to_string(source.width()) + "x" + std::to_string(source.height()) +
                " smaller than the 48px exemplar minimum");
    const int p = source.min_dim() >= 96 ? 96 : 48;
    const PatchSpec center{(source.width() - p) / 2, (source.height() - p) / 2, p};
    const PatchSpec random{static_cast<int>(rng.uniform_int(0, source.width() - p)),
                           static_cast<int>(rng.uniform_int(0, source.height() - p)), p};
    return ExemplarSet{{crop(source, center), crop(source, random)}};
}

namespace detail {

// Flattened exemplar candidate: a window-interior position whose center pixel
// is the value a match would copy.
struct CandidateField {
    // Per exemplar: image and its interior extent.
    struct Patch {
        const Image* img;
        int interior_w;
        int interior_h;
        std::size_t first_index;  // position in the global candidate enumeration
    };
    std::vector<Patch> patches;
    std::size_t total = 0;
    int half = 0;
};

inline CandidateField make_candidate_field(const ExemplarSet& exemplars, int window) {
    CandidateField field;
    field.half = window / 2;
    for (const Image& img : exemplars.patches) {
        require(img.width() == img.height(), Errc::invalid_argument,
                "exemplar patches must be square");
        require(img.width() >= window, Errc::exemplar_too_small,
                "exemplar side " + std::to_string(img.width()) + " smaller than window " +
                    std::to_string(window));
        CandidateField::Patch p;
        p.img = &img;
        p.interior_w = img.width() - window + 1;
        p.interior_h = img.height() - window + 1;
        p.first_index = field.total;
        field.total += static_cast<std::size_t>(p.interior_w) * p.interior_h;
        field.patches.push_back(p);
    }
    return field;
}

// Known-neighborhood of the pixel being synthesized: window offsets that are
// already filled, with Gaussian weights normalized over the known set.
struct Neighborhood {
    std::vector<int> dxs;
    std::vector<int> dys;
    std::vector<double> weights;
    std::vector<double> targets;  // 3 channels per known offset
};

}  // namespace detail

// Efros-Leung-style synthesis: copy a random seed block to the output center,
// then grow outward in onion layers (most known 8-neighbors first, row-major
// ties). Each pixel is matched against every window-interior exemplar
// neighborhood by masked Gaussian-weighted SSD; a uniform pick among all
// candidates within (1+tolerance)*best distance supplies the value.
inline Image synthesize(const ExemplarSet& exemplars, const SynthConfig& cfg, RngStream& rng) {
    cfg.validate();
    require(!exemplars.patches.empty() && exemplars.patches.size() <= 2, Errc::invalid_argument,
            "exemplar set must hold 1 or 2 patches");
    const detail::CandidateField field = detail::make_candidate_field(exemplars, cfg.window);
    for (const auto& p : field.patches)
        require(p.img->width() >= cfg.seed_block, Errc::exemplar_too_small,
                "exemplar smaller than seed block");

    const int out = cfg.out_size;
    const int half = cfg.window / 2;
    const int window = cfg.window;
    Image result(out, out);
    std::vector<std::uint8_t> known(static_cast<std::size_t>(out) * out, 0);
    auto known_at = [&](int x, int y) -> std::uint8_t& {
        return known[static_cast<std::size_t>(y) * out + x];
    };

    // Seed: one random seed_block^2 block from a random exemplar, copied to
    // the output center.
    {
        const int e = static_cast<int>(rng.uniform_int(0, field.patches.size() - 1));
        const Image& src = *field.patches[e].img;
        const int sb = std::min(cfg.seed_block, out);
        const int sx = static_cast<int>(rng.uniform_int(0, src.width() - sb));
        const int sy = static_cast<int>(rng.uniform_int(0, src.height() - sb));
        const int ox = (out - sb) / 2, oy = (out - sb) / 2;
        for (int y = 0; y < sb; ++y)
            for (int x = 0; x < sb; ++x) {
                result.at(ox + x, oy + y) = src.at(sx + x, sy + y);
                known_at(ox + x, oy + y) = 1;
            }
    }

    // Precomputed Gaussian window weights.
    std::vector<double> gauss(static_cast<std::size_t>(window) * window);
    {
        const double sigma = cfg.effective_sigma();
        for (int dy = -half; dy <= half; ++dy)
            for (int dx = -half; dx <= half; ++dx)
                gauss[static_cast<std::size_t>(dy + half) * window + (dx + half)] =
                    std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
    }

    std::size_t remaining = static_cast<std::size_t>(out) * out;
    for (std::uint8_t k : known) remaining -= k;

    std::vector<double> distances(field.total);
    std::vector<std::uint8_t> aborted(field.total);
    std::vector<std::size_t> pool;
    std::vector<std::size_t> subsample_indices;

    struct Frontier {
        int x, y, known_count;
    };
    std::vector<Frontier> layer;

    while (remaining > 0) {
        // Snapshot the current onion layer: unfilled pixels adjacent to a
        // known one, most known 8-neighbors first, ties row-major.
        layer.clear();
        for (int y = 0; y < out; ++y)
            for (int x = 0; x < out; ++x) {
                if (known_at(x, y)) continue;
                int c = 0;
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dx = -1; dx <= 1; ++dx) {
                        if (dx == 0 && dy == 0) continue;
                        const int nx = x + dx, ny = y + dy;
                        if (nx >= 0 && nx < out && ny >= 0 && ny < out && known_at(nx, ny)) ++c;
                    }
                if (c > 0) layer.push_back({x, y, c});
            }
        require(!layer.empty(), Errc::degenerate_output, "synthesis frontier is empty");
        std::stable_sort(layer.begin(), layer.end(), [](const Frontier& a, const Frontier& b) {
            return a.known_count > b.known_count;
        });

        for (const Frontier& f : layer) {
            // Gather the known neighborhood of (f.x, f.y) at fill time.
            detail::Neighborhood nb;
            double wsum = 0.0;
            for (int dy = -half; dy <= half; ++dy)
                for (int dx = -half; dx <= half; ++dx) {
                    if (dx == 0 && dy == 0) continue;
                    const int nx = f.x + dx, ny = f.y + dy;
                    if (nx < 0 || nx >= out || ny < 0 || ny >= out || !known_at(nx, ny)) continue;
                    const double w =
                        gauss[static_cast<std::size_t>(dy + half) * window + (dx + half)];
                    nb.dxs.push_back(dx);
                    nb.dys.push_back(dy);
                    nb.weights.push_back(w);
                    const Rgb& t = result.at(nx, ny);
                    nb.targets.push_back(t.r);
                    nb.targets.push_back(t.g);
                    nb.targets.push_back(t.b);
                    wsum += w;
                }
            for (double& w : nb.weights) w /= wsum;

            // Which candidates to scan: all, or a random subset of the global
            // enumeration when candidate_subsample caps it.
            const std::size_t* scan_ix = nullptr;
            std::size_t scan_n = field.total;
            if (cfg.candidate_subsample > 0 &&
                static_cast<std::size_t>(cfg.candidate_subsample) < field.total) {
                scan_n = static_cast<std::size_t>(cfg.candidate_subsample);
                subsample_indices.resize(field.total);
                for (std::size_t i = 0; i < field.total; ++i) subsample_indices[i] = i;
                for (std::size_t i = 0; i < scan_n; ++i) {
                    const std::size_t j = static_cast<std::size_t>(
                        rng.uniform_int(static_cast<std::int64_t>(i),
                                        static_cast<std::int64_t>(field.total) - 1));
                    std::swap(subsample_indices[i], subsample_indices[j]);
                }
                scan_ix = subsample_indices.data();
            }

            const double slack = 1.0 + cfg.tolerance;
            // Scan candidates in parallel chunks. Each chunk tracks its own
            // running best and aborts a candidate once its partial sum exceeds
            // slack * chunk best — any such candidate provably exceeds
            // slack * global best too, so the final pool is scan-order- and
            // chunk-independent.
            const unsigned threads = resolve_thread_count(cfg.n_threads);
            const std::size_t chunk =
                threads <= 1 ? scan_n : (scan_n + threads - 1) / threads;
            const std::size_t n_chunks = chunk == 0 ? 0 : (scan_n + chunk - 1) / chunk;
            parallel_for(n_chunks, threads, [&](std::size_t ci) {
                double chunk_best = std::numeric_limits<double>::infinity();
                const std::size_t lo = ci * chunk;
                const std::size_t hi = std::min(lo + chunk, scan_n);
                for (std::size_t s = lo; s < hi; ++s) {
                    const std::size_t cand = scan_ix ? scan_ix[s] : s;
                    // Locate the candidate inside its exemplar.
                    const detail::CandidateField::Patch* patch = &field.patches.back();
                    for (const auto& p : field.patches)
                        if (cand < p.first_index +
                                       static_cast<std::size_t>(p.interior_w) * p.interior_h) {
                            patch = &p;
                            break;
                        }
                    const std::size_t local = cand - patch->first_index;
                    const int cx =
                        static_cast<int>(local % patch->interior_w) + half;
                    const int cy =
                        static_cast<int>(local / patch->interior_w) + half;
                    const Image& img = *patch->img;

                    const double limit = slack * chunk_best;
                    double dist = 0.0;
                    bool abort = false;
                    for (std::size_t t = 0; t < nb.dxs.size(); ++t) {
                        const Rgb& e = img.at(cx + nb.dxs[t], cy + nb.dys[t]);
                        const double dr = nb.targets[t * 3] - e.r;
                        const double dg = nb.targets[t * 3 + 1] - e.g;
                        const double db = nb.targets[t * 3 + 2] - e.b;
                        dist += nb.weights[t] * (dr * dr + dg * dg + db * db);
                        if (dist > limit) {
                            abort = true;
                            break;
                        }
                    }
                    aborted[cand] = abort ? 1 : 0;
                    distances[cand] = dist;
                    if (!abort && dist < chunk_best) chunk_best = dist;
                }
            });

            double best = std::numeric_limits<double>::infinity();
            for (std::size_t s = 0; s < scan_n; ++s) {
                const std::size_t cand = scan_ix ? scan_ix[s] : s;
                if (!aborted[cand] && distances[cand] < best) best = distances[cand];
            }
            pool.clear();
            for (std::size_t s = 0; s < scan_n; ++s) {
                const std::size_t cand = scan_ix ? scan_ix[s] : s;
                if (!aborted[cand] && distances[cand] <= slack * best) pool.push_back(cand);
            }
            require(!pool.empty(), Errc::degenerate_output, "empty candidate pool");

            const std::size_t pick =
                pool[static_cast<std::size_t>(rng.uniform_int(0, pool.size() - 1))];
            const detail::CandidateField::Patch* patch = &field.patches.back();
            for (const auto& p : field.patches)
                if (pick < p.first_index +
                               static_cast<std::size_t>(p.interior_w) * p.interior_h) {
                    patch = &p;
                    break;
                }
            const std::size_t local = pick - patch->first_index;
            result.at(f.x, f.y) = patch->img->at(
                static_cast<int>(local % patch->interior_w) + half,
                static_cast<int>(local / patch->interior_w) + half);
            known_at(f.x, f.y) = 1;
            --remaining;
        }
    }
    return result;
}

inline Image generate_texture_negative(const Image& source, const SynthConfig& cfg,
                                       RngStream& rng) {
    cfg.validate();
    const ExemplarSet exemplars = extract_example_patches(source, rng);
    return synthesize(exemplars, cfg, rng);
}

}  // namespace nsn
