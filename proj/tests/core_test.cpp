#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "nsn/error.hpp"
#include "nsn/image.hpp"
#include "nsn/image_io.hpp"
#include "nsn/rng.hpp"

namespace fs = std::filesystem;
using namespace nsn;

namespace {

std::string fixture(const std::string& name) { return std::string(NSN_FIXTURE_DIR) + "/" + name; }

fs::path temp_dir() {
    static int counter = 0;
    fs::path dir = fs::temp_directory_path() / ("nsn_core_" + std::to_string(++counter));
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string read_bytes(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

Image random_image(int w, int h, RngStream& rng) {
    Image img(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            img.at(x, y) = Rgb{static_cast<std::uint8_t>(rng.uniform_int(0, 255)),
                               static_cast<std::uint8_t>(rng.uniform_int(0, 255)),
                               static_cast<std::uint8_t>(rng.uniform_int(0, 255))};
    return img;
}

}  // namespace

// --- image decode -------------------------------------------------------------

TEST(LoadImage, DecodesKnownRgbPixels) {
    const Image img = load_image(fixture("rgb2x2.png"));
    ASSERT_EQ(img.width(), 2);
    ASSERT_EQ(img.height(), 2);
    EXPECT_EQ(img.at(0, 0), (Rgb{10, 20, 30}));
    EXPECT_EQ(img.at(1, 0), (Rgb{40, 50, 60}));
    EXPECT_EQ(img.at(0, 1), (Rgb{70, 80, 90}));
    EXPECT_EQ(img.at(1, 1), (Rgb{200, 210, 220}));
}

TEST(LoadImage, MissingFileIsFileNotFound) {
    try {
        load_image(fixture("does_not_exist.png"));
        FAIL() << "expected FileNotFound";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::file_not_found);
    }
}

TEST(LoadImage, GrayscaleExpandsToThreeChannels) {
    const Image img = load_image(fixture("gray77.png"));
    ASSERT_EQ(img.width(), 3);
    ASSERT_EQ(img.height(), 2);
    for (const Rgb& p : img.pixels()) EXPECT_EQ(p, (Rgb{77, 77, 77}));
}

TEST(LoadImage, AlphaIsDiscarded) {
    const Image img = load_image(fixture("rgba2x1.png"));
    ASSERT_EQ(img.width(), 2);
    EXPECT_EQ(img.at(0, 0), (Rgb{1, 2, 3}));
    EXPECT_EQ(img.at(1, 0), (Rgb{9, 8, 7}));
}

TEST(LoadImage, PaletteExpandsToRgb) {
    const Image img = load_image(fixture("palette2x2.png"));
    EXPECT_EQ(img.at(0, 0), (Rgb{255, 0, 0}));
    EXPECT_EQ(img.at(1, 0), (Rgb{0, 255, 0}));
    EXPECT_EQ(img.at(0, 1), (Rgb{0, 255, 0}));
    EXPECT_EQ(img.at(1, 1), (Rgb{255, 0, 0}));
}

TEST(LoadImage, SixteenBitStripsToEight) {
    const Image img = load_image(fixture("white16.png"));
    ASSERT_EQ(img.width(), 1);
    EXPECT_EQ(img.at(0, 0), (Rgb{255, 255, 255}));
}

TEST(LoadImage, JpegDecodesToRgb) {
    const Image img = load_image(fixture("uniform8x8.jpg"));
    ASSERT_EQ(img.width(), 8);
    ASSERT_EQ(img.height(), 8);
    for (const Rgb& p : img.pixels()) {
        EXPECT_NEAR(p.r, 128, 1);
        EXPECT_NEAR(p.g, 128, 1);
        EXPECT_NEAR(p.b, 128, 1);
    }
}

TEST(LoadImage, CorruptPngIsDecodeError) {
    const fs::path dir = temp_dir();
    const fs::path bad = dir / "bad.png";
    {
        std::ofstream out(bad, std::ios::binary);
        out.write("\x89PNG\r\n\x1a\n garbage garbage garbage", 32);
    }
    try {
        load_image(bad.string());
        FAIL() << "expected DecodeError";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::decode_error);
    }
}

TEST(LoadImage, NonImageFileIsFormatError) {
    const fs::path dir = temp_dir();
    const fs::path bad = dir / "not_an_image.png";
    {
        std::ofstream out(bad, std::ios::binary);
        out << "plain text";
    }
    try {
        load_image(bad.string());
        FAIL() << "expected FormatError";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::format_error);
    }
}

// --- image save ----------------------------------------------------------------

TEST(SaveImage, RoundTripsRandomImageExactly) {
    RngStream rng(11);
    const Image img = random_image(16, 16, rng);
    const fs::path path = temp_dir() / "roundtrip.png";
    save_png(img, path.string());
    EXPECT_EQ(load_image(path.string()), img);
}

TEST(SaveImage, OnePixelImageRoundTrips) {
    const Image img(1, 1, Rgb{5, 6, 7});
    const fs::path path = temp_dir() / "tiny.png";
    save_png(img, path.string());
    EXPECT_EQ(load_image(path.string()), img);
}

TEST(SaveImage, UnwritableDirectoryIsIoError) {
    const Image img(1, 1);
    try {
        save_png(img, "/nonexistent_dir_zz/x.png");
        FAIL() << "expected IoError";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::io_error);
    }
}

TEST(SaveImage, RepeatedSavesAreByteIdentical) {
    RngStream rng(12);
    const Image img = random_image(24, 9, rng);
    const fs::path dir = temp_dir();
    save_png(img, (dir / "a.png").string());
    save_png(img, (dir / "b.png").string());
    EXPECT_EQ(read_bytes(dir / "a.png"), read_bytes(dir / "b.png"));
}

// --- crop / flips / rotation ---------------------------------------------------

TEST(Crop, IdentityCropReturnsWholeImage) {
    RngStream rng(13);
    const Image img = random_image(7, 7, rng);
    EXPECT_EQ(crop(img, {0, 0, 7}), img);
}

TEST(Crop, CoordinateArithmetic) {
    Image img(4, 4);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x)
            img.at(x, y) = Rgb{static_cast<std::uint8_t>(x), static_cast<std::uint8_t>(y), 0};
    const Image out = crop(img, {1, 1, 2});
    ASSERT_EQ(out.width(), 2);
    EXPECT_EQ(out.at(0, 0), (Rgb{1, 1, 0}));
    EXPECT_EQ(out.at(1, 0), (Rgb{2, 1, 0}));
    EXPECT_EQ(out.at(0, 1), (Rgb{1, 2, 0}));
    EXPECT_EQ(out.at(1, 1), (Rgb{2, 2, 0}));
}

TEST(Crop, OutOfBoundsSpecIsRejected) {
    const Image img(4, 4);
    try {
        crop(img, {3, 3, 2});
        FAIL() << "expected OutOfBounds";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::out_of_bounds);
    }
}

TEST(Crop, RepeatedCallsAgree) {
    RngStream rng(14);
    const Image img = random_image(10, 10, rng);
    EXPECT_EQ(crop(img, {2, 3, 5}), crop(img, {2, 3, 5}));
}

TEST(Flips, InvolutionsAndGroupProperties) {
    RngStream rng(15);
    const Image img = random_image(6, 4, rng);
    EXPECT_EQ(hflip(hflip(img)), img);
    EXPECT_EQ(vflip(vflip(img)), img);
    EXPECT_EQ(rot90(rot90(rot90(rot90(img, 1), 1), 1), 1), img);
    EXPECT_EQ(rot90(img, 4), img);
    EXPECT_EQ(rot90(img, 0), img);
    EXPECT_EQ(rot90(rot90(img, 1), 3), img);
    EXPECT_EQ(rot90(img, -1), rot90(img, 3));
    EXPECT_EQ(rot90(rot90(img, 1), 1), rot90(img, 2));
}

TEST(Flips, Rot90SwapsDimensions) {
    RngStream rng(16);
    const Image img = random_image(6, 4, rng);
    const Image r = rot90(img, 1);
    EXPECT_EQ(r.width(), 4);
    EXPECT_EQ(r.height(), 6);
    // Counter-clockwise: source (x, y) lands at (y, w-1-x).
    EXPECT_EQ(r.at(0, 5), img.at(0, 0));
    EXPECT_EQ(r.at(3, 0), img.at(5, 3));
}

TEST(Flips, HflipPermutesColumns) {
    Image img(2, 2);
    img.at(0, 0) = Rgb{1, 0, 0};   // A
    img.at(1, 0) = Rgb{2, 0, 0};   // B
    img.at(0, 1) = Rgb{3, 0, 0};   // C
    img.at(1, 1) = Rgb{4, 0, 0};   // D
    const Image out = hflip(img);
    EXPECT_EQ(out.at(0, 0), (Rgb{2, 0, 0}));
    EXPECT_EQ(out.at(1, 0), (Rgb{1, 0, 0}));
    EXPECT_EQ(out.at(0, 1), (Rgb{4, 0, 0}));
    EXPECT_EQ(out.at(1, 1), (Rgb{3, 0, 0}));
}

// --- rng -----------------------------------------------------------------------

TEST(Rng, SameSeedSameSequence) {
    RngStream a(99), b(99);
    for (int i = 0; i < 1000; ++i) ASSERT_EQ(a.next_u64(), b.next_u64());
    RngStream c(99), d(100);
    EXPECT_NE(c.next_u64(), d.next_u64());
}

TEST(Rng, UniformIntStaysInClosedRange) {
    RngStream rng(1);
    std::set<std::int64_t> seen;
    for (int i = 0; i < 2000; ++i) {
        const std::int64_t v = rng.uniform_int(-3, 5);
        ASSERT_GE(v, -3);
        ASSERT_LE(v, 5);
        seen.insert(v);
    }
    EXPECT_EQ(seen.size(), 9u);  // all values of the closed range appear
    EXPECT_EQ(rng.uniform_int(7, 7), 7);
}

TEST(Rng, UniformDoubleInUnitInterval) {
    RngStream rng(2);
    for (int i = 0; i < 10000; ++i) {
        const double v = rng.uniform_double();
        ASSERT_GE(v, 0.0);
        ASSERT_LT(v, 1.0);
    }
}

TEST(Rng, BernoulliEdgeCases) {
    RngStream rng(3);
    for (int i = 0; i < 100; ++i) {
        EXPECT_FALSE(rng.bernoulli(0.0));
        EXPECT_TRUE(rng.bernoulli(1.0));
    }
}

TEST(Rng, NormalMomentsMatchStandardGaussian) {
    RngStream rng(4);
    const int n = 100000;
    double sum = 0.0, sumsq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double v = rng.normal();
        sum += v;
        sumsq += v * v;
    }
    const double mean = sum / n;
    const double var = sumsq / n - mean * mean;
    EXPECT_NEAR(mean, 0.0, 3.0 / std::sqrt(static_cast<double>(n)));
    EXPECT_NEAR(var, 1.0, 3.0 * std::sqrt(2.0 / n));
}

TEST(Rng, ShuffleIsAPermutation) {
    RngStream rng(5);
    std::vector<int> v{1, 2, 3, 4, 5, 6, 7, 8};
    std::vector<int> shuffled = v;
    rng.shuffle(shuffled);
    std::vector<int> sorted = shuffled;
    std::sort(sorted.begin(), sorted.end());
    EXPECT_EQ(sorted, v);

    RngStream r1(6), r2(6);
    std::vector<int> a{1, 2, 3, 4, 5}, b{1, 2, 3, 4, 5};
    r1.shuffle(a);
    r2.shuffle(b);
    EXPECT_EQ(a, b);
}

// --- derive_seed ----------------------------------------------------------------

TEST(DeriveSeed, DeterministicPerInputs) {
    EXPECT_EQ(derive_seed(42, "a"), derive_seed(42, "a"));
    EXPECT_NE(derive_seed(42, "a"), derive_seed(42, "b"));
    EXPECT_NE(derive_seed(42, "a"), derive_seed(43, "a"));
}

TEST(DeriveSeed, NoCollisionsAcrossLabelCorpus) {
    std::set<std::uint64_t> seen;
    for (int i = 0; i < 10000; ++i) seen.insert(derive_seed(7, "img/" + std::to_string(i) + ".png"));
    EXPECT_EQ(seen.size(), 10000u);
}

TEST(DeriveSeed, NoCollisionsAcrossSeedCorpus) {
    std::set<std::uint64_t> seen;
    for (std::uint64_t s = 0; s < 10000; ++s) seen.insert(derive_seed(s, "a"));
    EXPECT_EQ(seen.size(), 10000u);
}

// --- error plumbing --------------------------------------------------------------

TEST(Errors, NamesMatchTheirCodes) {
    EXPECT_EQ(errc_name(Errc::file_not_found), "FileNotFound");
    EXPECT_EQ(errc_name(Errc::image_too_small), "ImageTooSmall");
    EXPECT_EQ(errc_name(Errc::missing_non_semantic), "MissingNonSemantic");
    EXPECT_EQ(errc_name(Errc::no_decisions), "NoDecisions");
    EXPECT_EQ(errc_name(Errc::degenerate_output), "DegenerateOutput");
    const Error e(Errc::out_of_bounds, "msg");
    EXPECT_EQ(e.code(), Errc::out_of_bounds);
    EXPECT_NE(std::string(e.what()).find("msg"), std::string::npos);
}

TEST(Image, ConstructorValidatesDimensions) {
    EXPECT_THROW(Image(0, 5), Error);
    EXPECT_THROW(Image(5, 0), Error);
    EXPECT_THROW(Image(2, 2, std::vector<Rgb>(3)), Error);
}
