#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "nsn/analysis.hpp"
#include "nsn/embedding_io.hpp"
#include "nsn/error.hpp"
#include "nsn/image_io.hpp"
#include "nsn/patch_tile.hpp"
#include "nsn/rng.hpp"
#include "nsn/texture_synth.hpp"
#include "nsn/thread_pool.hpp"
#include "nsn/toy_trainer.hpp"

namespace nsn {

struct PipelineConfig {
    std::string input_dir;
    std::string output_dir;
    std::vector<std::string> methods;  // any of "texture", "patch"
    std::uint64_t global_seed = 0;
    unsigned workers = 1;
    TileConfig tile = TileConfig::make_default();
    SynthConfig synth;

    void validate() const {
        require(workers >= 1, Errc::invalid_argument, "workers must be >= 1");
        require(!methods.empty(), Errc::invalid_argument, "no generation method selected");
        for (const auto& m : methods)
            require(m == "texture" || m == "patch", Errc::invalid_argument,
                    "unknown method '" + m + "'");
        tile.validate();
        synth.validate();
    }
};

struct GenerateSummary {
    std::size_t files_written = 0;
    std::size_t failures = 0;
};

namespace detail {

inline bool has_image_extension(const std::filesystem::path& p) {
    std::string ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

inline nlohmann::json tile_params_json(const TileConfig& cfg) {
    return nlohmann::json{{"d_min", cfg.d_min},
                          {"d_max", cfg.d_max},
                          {"out_size", cfg.out_size},
                          {"hflip_prob", cfg.hflip_prob},
                          {"vflip_prob", cfg.vflip_prob},
                          {"rot90_prob", cfg.rot90_prob}};
}

inline nlohmann::json synth_params_json(const SynthConfig& cfg) {
    return nlohmann::json{{"out_size", cfg.out_size},
                          {"window", cfg.window},
                          {"gauss_sigma", cfg.effective_sigma()},
                          {"tolerance", cfg.tolerance},
                          {"seed_block", cfg.seed_block},
                          {"candidate_subsample", cfg.candidate_subsample}};
}

}  // namespace detail

// Walks input_dir recursively (sorted by relative path), generates every
// selected negative kind per image into output_dir/<method>/, and writes one
// JSONL manifest line per (file, method) job. Per-file failures are recorded
// in the manifest, not fatal.
inline GenerateSummary generate_command(const PipelineConfig& cfg) {
    cfg.validate();
    namespace fs = std::filesystem;
    require(fs::exists(cfg.input_dir) && fs::is_directory(cfg.input_dir), Errc::input_dir_missing,
            "input directory not found: " + cfg.input_dir);

    std::error_code ec;
    fs::create_directories(cfg.output_dir, ec);
    require(!ec && fs::is_directory(cfg.output_dir), Errc::output_not_writable,
            "cannot create output directory: " + cfg.output_dir);

    std::vector<fs::path> rel_files;
    for (const auto& entry : fs::recursive_directory_iterator(cfg.input_dir))
        if (entry.is_regular_file() && detail::has_image_extension(entry.path()))
            rel_files.push_back(entry.path().lexically_relative(cfg.input_dir));
    std::sort(rel_files.begin(), rel_files.end(),
              [](const fs::path& a, const fs::path& b) {
                  return a.generic_string() < b.generic_string();
              });

    struct Job {
        fs::path rel;
        std::string method;
    };
    std::vector<Job> jobs;
    jobs.reserve(rel_files.size() * cfg.methods.size());
    for (const auto& rel : rel_files)
        for (const auto& m : cfg.methods) jobs.push_back({rel, m});

    // Create every output parent directory up front so workers never race on
    // directory creation.
    for (const auto& job : jobs) {
        const fs::path out_parent =
            (fs::path(cfg.output_dir) / job.method / job.rel).parent_path();
        fs::create_directories(out_parent, ec);
        require(!ec, Errc::output_not_writable,
                "cannot create output directory: " + out_parent.string());
    }

    std::vector<nlohmann::json> manifest(jobs.size());
    parallel_for(jobs.size(), cfg.workers, [&](std::size_t ji) {
        const Job& job = jobs[ji];
        const std::string rel = job.rel.generic_string();
        const std::uint64_t seed = derive_seed(cfg.global_seed, rel + "|" + job.method);
        fs::path out_rel = fs::path(job.method) / job.rel;
        out_rel.replace_extension(".png");

        nlohmann::json entry{{"input", rel},
                             {"method", job.method},
                             {"seed", seed},
                             {"params", job.method == "patch"
                                            ? detail::tile_params_json(cfg.tile)
                                            : detail::synth_params_json(cfg.synth)},
                             {"flags", nlohmann::json::array()}};
        try {
            RngStream rng(seed);
            const Image source = load_image((fs::path(cfg.input_dir) / job.rel).string());
            Image out;
            if (job.method == "patch") {
                PatchNegative neg = generate_patch_negative_detailed(source, cfg.tile, rng);
                if (neg.overlap_fallback) entry["flags"].push_back("overlap-fallback");
                entry["params"]["d"] = neg.d;
                out = std::move(neg.image);
            } else {
                out = generate_texture_negative(source, cfg.synth, rng);
            }
            save_png(out, (fs::path(cfg.output_dir) / out_rel).string());
            entry["output"] = out_rel.generic_string();
            entry["status"] = "ok";
        } catch (const Error& e) {
            entry["status"] = "failed";
            entry["error"] = errc_name(e.code());
            entry["message"] = e.what();
        }
        manifest[ji] = std::move(entry);
    });

    // Serialize the manifest after the workers drain, in job order, so its
    // bytes are independent of scheduling.
    {
        const std::string manifest_path =
            (fs::path(cfg.output_dir) / "manifest.jsonl").string();
        detail::FilePtr f = detail::open_file(manifest_path, "wb");
        for (const auto& entry : manifest) {
            const std::string line = entry.dump() + "\n";
            require(std::fwrite(line.data(), 1, line.size(), f.get()) == line.size(),
                    Errc::io_error, "short write: " + manifest_path);
        }
    }

    GenerateSummary summary;
    for (const auto& entry : manifest)
        if (entry.at("status") == "ok")
            ++summary.files_written;
        else
            ++summary.failures;
    return summary;
}

// Pairs the i-th embedding of file a with the i-th of file b, writes the
// similarity summary as JSON, and prints the mean at 5 decimals.
inline SimilaritySummary analyze_command(const std::string& path_a, const std::string& path_b,
                                         const std::string& out_path) {
    const std::vector<Embedding> a = to_embeddings(read_embeddings(path_a));
    const std::vector<Embedding> b = to_embeddings(read_embeddings(path_b));
    const SimilaritySummary summary = similarity_summary(a, b);
    write_json(to_json(summary), out_path);
    std::printf("mean %.5f\n", summary.mean);
    return summary;
}

// Runs the (alpha, seed) sweep and writes the sorted results CSV.
inline std::vector<SweepCell> toy_command(const std::vector<double>& alphas,
                                          const std::vector<std::uint64_t>& seeds,
                                          const ToyDataConfig& dcfg, const TrainConfig& tcfg,
                                          const std::string& out_path, unsigned workers = 1) {
    std::vector<SweepCell> cells = run_toy_sweep(alphas, seeds, dcfg, tcfg, workers);
    write_sweep_csv(cells, out_path);
    return cells;
}

}  // namespace nsn
