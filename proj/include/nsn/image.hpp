#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "nsn/error.hpp"

namespace nsn {

struct Rgb {
    std::uint8_t r = 0;
    std::uint8_t g = 0;
    std::uint8_t b = 0;

    friend auto operator<=>(const Rgb&, const Rgb&) = default;
};

// Square region of side `d` with top-left corner (x, y) inside some image.
struct PatchSpec {
    int x = 0;
    int y = 0;
    int d = 1;

    friend bool operator==(const PatchSpec&, const PatchSpec&) = default;
};

inline bool patches_overlap(const PatchSpec& a, const PatchSpec& b) {
    return a.x < b.x + b.d && b.x < a.x + a.d && a.y < b.y + b.d && b.y < a.y + a.d;
}

// 8-bit RGB raster, row-major. Treated as an immutable value: every
// transformation below returns a new image.
class Image {
public:
    Image() = default;

    Image(int width, int height, Rgb fill = {})
        : width_(width), height_(height) {
        require(width >= 1 && height >= 1, Errc::invalid_argument, "image dimensions must be >= 1");
        pixels_.assign(static_cast<std::size_t>(width) * height, fill);
    }

    Image(int width, int height, std::vector<Rgb> pixels)
        : width_(width), height_(height), pixels_(std::move(pixels)) {
        require(width >= 1 && height >= 1, Errc::invalid_argument, "image dimensions must be >= 1");
        require(pixels_.size() == static_cast<std::size_t>(width) * height,
                Errc::invalid_argument, "pixel count does not match width*height");
    }

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    int min_dim() const noexcept { return width_ < height_ ? width_ : height_; }

    const Rgb& at(int x, int y) const {
        return pixels_[static_cast<std::size_t>(y) * width_ + x];
    }
    Rgb& at(int x, int y) {
        return pixels_[static_cast<std::size_t>(y) * width_ + x];
    }

    const std::vector<Rgb>& pixels() const noexcept { return pixels_; }

    friend bool operator==(const Image&, const Image&) = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<Rgb> pixels_;
};

inline bool spec_in_bounds(const Image& image, const PatchSpec& spec) {
    return spec.d >= 1 && spec.x >= 0 && spec.y >= 0 &&
           spec.x + spec.d <= image.width() && spec.y + spec.d <= image.height();
}

inline Image crop(const Image& image, const PatchSpec& spec) {
    if (!spec_in_bounds(image, spec)) {
        raise(Errc::out_of_bounds,
              "patch (" + std::to_string(spec.x) + "," + std::to_string(spec.y) + "," +
                  std::to_string(spec.d) + ") exceeds " + std::to_string(image.width()) + "x" +
                  std::to_string(image.height()) + " image");
    }
    Image out(spec.d, spec.d);
    for (int j = 0; j < spec.d; ++j)
        for (int i = 0; i < spec.d; ++i) out.at(i, j) = image.at(spec.x + i, spec.y + j);
    return out;
}

inline Image hflip(const Image& image) {
    Image out(image.width(), image.height());
    for (int y = 0; y < image.height(); ++y)
        for (int x = 0; x < image.width(); ++x) out.at(x, y) = image.at(image.width() - 1 - x, y);
    return out;
}

inline Image vflip(const Image& image) {
    Image out(image.width(), image.height());
    for (int y = 0; y < image.height(); ++y)
        for (int x = 0; x < image.width(); ++x) out.at(x, y) = image.at(x, image.height() - 1 - y);
    return out;
}

// Counter-clockwise rotation by quarter_turns * 90 degrees. Pure pixel
// permutation, no resampling.
inline Image rot90(const Image& image, int quarter_turns) {
    int k = quarter_turns % 4;
    if (k < 0) k += 4;
    if (k == 0) return image;
    const int w = image.width(), h = image.height();
    if (k == 2) {
        Image out(w, h);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) out.at(x, y) = image.at(w - 1 - x, h - 1 - y);
        return out;
    }
    Image out(h, w);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (k == 1) {
                out.at(y, w - 1 - x) = image.at(x, y);
            } else {  // k == 3
                out.at(h - 1 - y, x) = image.at(x, y);
            }
        }
    return out;
}

}  // namespace nsn
