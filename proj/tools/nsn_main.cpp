#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "nsn/pipeline.hpp"

namespace {

// Exit codes: 0 success, 1 fatal IO/config error, 2 usage error.
constexpr int kExitFatal = 1;
constexpr int kExitUsage = 2;

nlohmann::json load_config(const std::string& path) {
    if (path.empty()) return nlohmann::json::object();
    std::ifstream in(path);
    if (!in) nsn::raise(nsn::Errc::file_not_found, "config file not found: " + path);
    nlohmann::json j = nlohmann::json::parse(in, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded())
        nsn::raise(nsn::Errc::format_error, "config file is not valid JSON: " + path);
    if (!j.is_object())
        nsn::raise(nsn::Errc::format_error, "config file must hold a JSON object: " + path);
    return j;
}

// Fills `target` from the config file when the flag was not given on the
// command line (flags override config values).
template <typename T>
void overlay(const nlohmann::json& cfg, const CLI::Option* opt, const char* key, T& target) {
    if (opt->count() == 0 && cfg.contains(key)) target = cfg.at(key).get<T>();
}

void require_usage(bool cond, const std::string& message) {
    if (!cond) nsn::raise(nsn::Errc::invalid_argument, message);
}

template <typename T>
std::vector<T> parse_list(const std::string& text, const char* what) {
    std::vector<T> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t comma = text.find(',', pos);
        if (comma == std::string::npos) comma = text.size();
        std::string field = text.substr(pos, comma - pos);
        const auto first = field.find_first_not_of(" \t");
        const auto last = field.find_last_not_of(" \t");
        field = first == std::string::npos ? "" : field.substr(first, last - first + 1);
        require_usage(!field.empty(), std::string("empty value in --") + what + " list");
        T v{};
        const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
        require_usage(ec == std::errc() && ptr == field.data() + field.size(),
                      "bad value '" + field + "' in --" + what + " list");
        out.push_back(v);
        if (comma == text.size()) break;
        pos = comma + 1;
    }
    return out;
}

int run(int argc, char** argv) {
    CLI::App app{"Non-semantic negative sample generation and analysis"};
    app.require_subcommand(1);

    // --- generate -------------------------------------------------------------
    auto* gen = app.add_subcommand("generate",
                                   "Generate texture/patch negatives for an image directory");
    std::string gen_config, input, output, method = "both";
    std::uint64_t gen_seed = 0;
    unsigned workers = 1;
    int d_min = 16, d_max = 72, out_size = 224, window = 11;
    double tolerance = 0.1;
    auto* gen_config_opt = gen->add_option("--config", gen_config, "JSON config file");
    auto* input_opt = gen->add_option("--input", input, "Input image directory");
    auto* output_opt = gen->add_option("--output", output, "Output directory");
    auto* method_opt =
        gen->add_option("--method", method, "Negative kind: texture, patch, or both");
    auto* seed_opt = gen->add_option("--seed", gen_seed, "Global seed");
    auto* workers_opt = gen->add_option("--workers", workers, "Parallel worker count");
    auto* d_min_opt = gen->add_option("--d-min", d_min, "Smallest patch size");
    auto* d_max_opt = gen->add_option("--d-max", d_max, "Largest patch size");
    auto* out_size_opt = gen->add_option("--out-size", out_size, "Output image side");
    auto* window_opt = gen->add_option("--window", window, "Synthesis neighborhood side (odd)");
    auto* tolerance_opt =
        gen->add_option("--tolerance", tolerance, "Synthesis candidate distance slack");

    // --- analyze ----------------------------------------------------------------
    auto* ana = app.add_subcommand("analyze",
                                   "Cosine-similarity summary of two embedding files");
    std::string ana_config, file_a, file_b, ana_out;
    auto* ana_config_opt = ana->add_option("--config", ana_config, "JSON config file");
    auto* a_opt = ana->add_option("--a", file_a, "First embedding file (.csv or binary)");
    auto* b_opt = ana->add_option("--b", file_b, "Second embedding file (.csv or binary)");
    auto* ana_out_opt = ana->add_option("--out", ana_out, "Output JSON path");

    // --- toy --------------------------------------------------------------------
    auto* toy = app.add_subcommand("toy", "Train toy encoders over an (alpha, seed) sweep");
    std::string toy_config, toy_out, alphas_str, seeds_str;
    int steps = 2000;
    auto* toy_config_opt = toy->add_option("--config", toy_config, "JSON config file");
    auto* alphas_opt = toy->add_option("--alphas", alphas_str, "Alpha values, comma separated");
    auto* seeds_opt = toy->add_option("--seeds", seeds_str, "Seeds, comma separated");
    auto* steps_opt = toy->add_option("--steps", steps, "SGD steps per cell");
    auto* toy_out_opt = toy->add_option("--out", toy_out, "Output CSV path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);  // prints help, exit 0
    } catch (const CLI::ParseError& e) {
        app.exit(e);  // prints the parse error to stderr
        return kExitUsage;
    }

    if (gen->parsed()) {
        const nlohmann::json cfg_json = load_config(gen_config);
        (void)gen_config_opt;
        overlay(cfg_json, input_opt, "input", input);
        overlay(cfg_json, output_opt, "output", output);
        overlay(cfg_json, method_opt, "method", method);
        overlay(cfg_json, seed_opt, "seed", gen_seed);
        overlay(cfg_json, workers_opt, "workers", workers);
        overlay(cfg_json, d_min_opt, "d_min", d_min);
        overlay(cfg_json, d_max_opt, "d_max", d_max);
        overlay(cfg_json, out_size_opt, "out_size", out_size);
        overlay(cfg_json, window_opt, "window", window);
        overlay(cfg_json, tolerance_opt, "tolerance", tolerance);
        require_usage(!input.empty(), "generate requires --input");
        require_usage(!output.empty(), "generate requires --output");
        require_usage(method == "texture" || method == "patch" || method == "both",
                      "--method must be texture, patch, or both");

        nsn::PipelineConfig cfg;
        cfg.input_dir = input;
        cfg.output_dir = output;
        if (method == "both")
            cfg.methods = {"texture", "patch"};
        else
            cfg.methods = {method};
        cfg.global_seed = gen_seed;
        cfg.workers = workers;
        cfg.tile = nsn::TileConfig::make_default(d_min, d_max, out_size);
        cfg.synth.out_size = out_size;
        cfg.synth.window = window;
        cfg.synth.tolerance = tolerance;
        const unsigned hw = nsn::resolve_thread_count(0);
        cfg.synth.n_threads = hw > workers ? hw / workers : 1;

        const nsn::GenerateSummary summary = nsn::generate_command(cfg);
        std::printf("wrote %zu files, %zu failures\n", summary.files_written, summary.failures);
        return 0;
    }

    if (ana->parsed()) {
        const nlohmann::json cfg_json = load_config(ana_config);
        (void)ana_config_opt;
        overlay(cfg_json, a_opt, "a", file_a);
        overlay(cfg_json, b_opt, "b", file_b);
        overlay(cfg_json, ana_out_opt, "out", ana_out);
        require_usage(!file_a.empty(), "analyze requires --a");
        require_usage(!file_b.empty(), "analyze requires --b");
        require_usage(!ana_out.empty(), "analyze requires --out");
        nsn::analyze_command(file_a, file_b, ana_out);
        return 0;
    }

    if (toy->parsed()) {
        const nlohmann::json cfg_json = load_config(toy_config);
        (void)toy_config_opt;
        overlay(cfg_json, steps_opt, "steps", steps);
        overlay(cfg_json, toy_out_opt, "out", toy_out);
        std::vector<double> alphas;
        std::vector<std::uint64_t> seeds;
        if (alphas_opt->count() > 0)
            alphas = parse_list<double>(alphas_str, "alphas");
        else if (cfg_json.contains("alphas"))
            alphas = cfg_json.at("alphas").get<std::vector<double>>();
        if (seeds_opt->count() > 0)
            seeds = parse_list<std::uint64_t>(seeds_str, "seeds");
        else if (cfg_json.contains("seeds"))
            seeds = cfg_json.at("seeds").get<std::vector<std::uint64_t>>();
        require_usage(!alphas.empty(), "toy requires a nonempty --alphas sweep");
        require_usage(!seeds.empty(), "toy requires a nonempty --seeds list");
        require_usage(!toy_out.empty(), "toy requires --out");
        require_usage(steps >= 0, "--steps must be >= 0");

        nsn::ToyDataConfig dcfg;
        nsn::TrainConfig tcfg;
        tcfg.steps = steps;
        nsn::toy_command(alphas, seeds, dcfg, tcfg, toy_out);
        std::printf("wrote %zu sweep rows to %s\n", alphas.size() * seeds.size(),
                    toy_out.c_str());
        return 0;
    }

    nsn::raise(nsn::Errc::invalid_argument, "no subcommand selected");
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const nsn::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return e.code() == nsn::Errc::invalid_argument ? kExitUsage : kExitFatal;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitFatal;
    }
}
