#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "nsn/error.hpp"
#include "nsn/image.hpp"
#include "nsn/rng.hpp"

namespace nsn {

// Configuration for patch-based negative generation: tile (ceil(out/d))^2
// patches of a uniformly sampled side d into an out_size x out_size image.
struct TileConfig {
    int d_min = 16;
    int d_max = 72;
    int out_size = 224;
    double hflip_prob = 0.0;
    double vflip_prob = 0.0;
    double rot90_prob = 0.0;

    void validate() const {
        require(d_min >= 1 && d_min <= d_max && d_max <= out_size, Errc::invalid_argument,
                "need 1 <= d_min <= d_max <= out_size");
        for (double p : {hflip_prob, vflip_prob, rot90_prob})
            require(p >= 0.0 && p <= 1.0, Errc::invalid_argument,
                    "augmentation probabilities must be in [0,1]");
    }

    // Flips only help for small patches, so the default enables a 50% hflip
    // when d_max <= 28 and no augmentation otherwise.
    static TileConfig make_default(int d_min = 16, int d_max = 72, int out_size = 224) {
        TileConfig cfg;
        cfg.d_min = d_min;
        cfg.d_max = d_max;
        cfg.out_size = out_size;
        cfg.hflip_prob = (d_max <= 28) ? 0.5 : 0.0;
        cfg.validate();
        return cfg;
    }
};

inline int sample_patch_size(const TileConfig& cfg, RngStream& rng) {
    cfg.validate();
    return static_cast<int>(rng.uniform_int(cfg.d_min, cfg.d_max));
}

struct PatchLocations {
    std::vector<PatchSpec> specs;
    bool overlap_fallback = false;  // set when disjoint placement was infeasible
};

// Draws `count` in-bounds d x d locations, pairwise non-overlapping whenever
// geometrically achievable. Strategy: rejection sampling first (unbiased among
// feasible placements); if its attempt budget runs out but an aligned d-grid
// has enough cells, place on shuffled grid cells (still disjoint); otherwise
// accept overlapping draws and flag the result.
inline PatchLocations sample_patch_locations(int img_w, int img_h, int d, int count,
                                             RngStream& rng) {
    require(img_w >= 1 && img_h >= 1 && count >= 1, Errc::invalid_argument,
            "image dims and count must be >= 1");
    require(d >= 1 && d <= std::min(img_w, img_h), Errc::patch_too_large,
            "patch size " + std::to_string(d) + " exceeds " + std::to_string(img_w) + "x" +
                std::to_string(img_h) + " image");

    PatchLocations out;
    out.specs.reserve(count);
    const std::int64_t max_failures = 100LL * count;
    std::int64_t failures = 0;
    while (static_cast<int>(out.specs.size()) < count && failures < max_failures) {
        PatchSpec cand{static_cast<int>(rng.uniform_int(0, img_w - d)),
                       static_cast<int>(rng.uniform_int(0, img_h - d)), d};
        bool clash = false;
        for (const auto& s : out.specs)
            if (patches_overlap(s, cand)) {
                clash = true;
                break;
            }
        if (clash)
            ++failures;
        else
            out.specs.push_back(cand);
    }
    if (static_cast<int>(out.specs.size()) == count) return out;

    const int grid_cols = img_w / d, grid_rows = img_h / d;
    if (static_cast<std::int64_t>(grid_cols) * grid_rows >= count) {
        // Disjoint placement exists on the aligned grid even though rejection
        // sampling kept clashing (e.g. an exact tiling where random draws
        // almost never line up).
        std::vector<PatchSpec> cells;
        cells.reserve(static_cast<std::size_t>(grid_cols) * grid_rows);
        for (int gy = 0; gy < grid_rows; ++gy)
            for (int gx = 0; gx < grid_cols; ++gx) cells.push_back({gx * d, gy * d, d});
        rng.shuffle(cells);
        out.specs.assign(cells.begin(), cells.begin() + count);
        return out;
    }

    out.overlap_fallback = true;
    while (static_cast<int>(out.specs.size()) < count)
        out.specs.push_back({static_cast<int>(rng.uniform_int(0, img_w - d)),
                             static_cast<int>(rng.uniform_int(0, img_h - d)), d});
    return out;
}

// Applies each enabled flip/rotation per its probability. All transforms are
// pixel permutations; the rotation, when triggered, picks a quarter-turn count
// uniformly from {0,1,2,3}.
inline Image apply_patch_augment(const Image& patch, const TileConfig& cfg, RngStream& rng) {
    cfg.validate();
    require(patch.width() == patch.height(), Errc::invalid_argument, "patch must be square");
    Image out = patch;
    if (rng.bernoulli(cfg.hflip_prob)) out = hflip(out);
    if (rng.bernoulli(cfg.vflip_prob)) out = vflip(out);
    if (rng.bernoulli(cfg.rot90_prob))
        out = rot90(out, static_cast<int>(rng.uniform_int(0, 3)));
    return out;
}

inline int tile_grid_side(int out_size, int d) { return (out_size + d - 1) / d; }

// Crops every spec from the source, augments it, lays the patches row-major
// onto a g*d x g*d canvas (g = ceil(out_size/d)), and center-crops to
// out_size x out_size.
inline Image tile_patches(const Image& source, const std::vector<PatchSpec>& specs,
                          const TileConfig& cfg, RngStream& rng) {
    cfg.validate();
    require(!specs.empty(), Errc::spec_count_mismatch, "no patch specs given");
    const int d = specs[0].d;
    const int g = tile_grid_side(cfg.out_size, d);
    require(static_cast<int>(specs.size()) == g * g, Errc::spec_count_mismatch,
            "expected " + std::to_string(g * g) + " specs for d=" + std::to_string(d) +
                ", got " + std::to_string(specs.size()));
    for (const auto& s : specs)
        require(s.d == d, Errc::invalid_argument, "specs must share one patch size");

    Image canvas(g * d, g * d);
    for (int p = 0; p < g * g; ++p) {
        const Image patch = apply_patch_augment(crop(source, specs[p]), cfg, rng);
        const int ox = (p % g) * d, oy = (p / g) * d;
        for (int y = 0; y < d; ++y)
            for (int x = 0; x < d; ++x) canvas.at(ox + x, oy + y) = patch.at(x, y);
    }
    const int off = (g * d - cfg.out_size) / 2;
    return crop(canvas, {off, off, cfg.out_size});
}

struct PatchNegative {
    Image image;
    int d = 0;
    bool overlap_fallback = false;
};

// Full patch pipeline: sample d, clamp it to the source's smaller side, draw
// (ceil(out/d))^2 locations, tile, center-crop.
inline PatchNegative generate_patch_negative_detailed(const Image& source, const TileConfig& cfg,
                                                      RngStream& rng) {
    cfg.validate();
    require(source.min_dim() >= cfg.d_min, Errc::image_too_small,
            "image " + std::to_string(source.width()) + "x" + std::to_string(source.height()) +
                " smaller than d_min=" + std::to_string(cfg.d_min));
    int d = sample_patch_size(cfg, rng);
    d = std::min(d, source.min_dim());
    const int g = tile_grid_side(cfg.out_size, d);
    PatchLocations locs =
        sample_patch_locations(source.width(), source.height(), d, g * g, rng);
    PatchNegative out;
    out.image = tile_patches(source, locs.specs, cfg, rng);
    out.d = d;
    out.overlap_fallback = locs.overlap_fallback;
    return out;
}

inline Image generate_patch_negative(const Image& source, const TileConfig& cfg, RngStream& rng) {
    return generate_patch_negative_detailed(source, cfg, rng).image;
}

}  // namespace nsn
