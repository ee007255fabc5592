#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "nsn/embedding.hpp"
#include "nsn/embedding_io.hpp"
#include "nsn/error.hpp"

namespace nsn {

inline double cosine_similarity(const Embedding& a, const Embedding& b) {
    require(a.dim() == b.dim(), Errc::dim_mismatch, "embedding dims differ");
    return std::clamp(dot(a, b), -1.0, 1.0);
}

// Histogram of per-index cosine similarities: 100 uniform bins over [-1, 1]
// plus the full-precision mean.
struct SimilaritySummary {
    std::array<double, 101> bin_edges{};
    std::array<std::uint64_t, 100> counts{};
    double mean = 0.0;
    std::size_t n = 0;
};

inline SimilaritySummary similarity_summary(const std::vector<Embedding>& queries,
                                            const std::vector<Embedding>& paired) {
    require(queries.size() == paired.size(), Errc::length_mismatch,
            "query/paired counts differ: " + std::to_string(queries.size()) + " vs " +
                std::to_string(paired.size()));
    require(!queries.empty(), Errc::empty_input, "no embedding pairs");

    SimilaritySummary s;
    for (std::size_t i = 0; i <= 100; ++i) s.bin_edges[i] = -1.0 + 2.0 * i / 100.0;
    s.n = queries.size();
    double sum = 0.0;  // fixed left-to-right order so the mean is bit-stable
    for (std::size_t i = 0; i < queries.size(); ++i) {
        const double sim = cosine_similarity(queries[i], paired[i]);
        sum += sim;
        auto bin = static_cast<std::size_t>((sim + 1.0) / 2.0 * 100.0);
        if (bin >= 100) bin = 99;  // sim == 1 lands in the top bin
        ++s.counts[bin];
    }
    s.mean = sum / static_cast<double>(s.n);
    return s;
}

// One cue-conflict stimulus: the classifier's prediction plus the conflicting
// shape and texture labels.
struct StimulusRecord {
    int predicted = 0;
    int shape_label = 0;
    int texture_label = 0;
};

struct ShapeBiasReport {
    double shape_bias = 0.0;        // shape decisions / (shape + texture decisions)
    double shape_accuracy = 0.0;    // shape matches / all records
    double texture_accuracy = 0.0;  // texture matches / all records
    std::size_t decisions = 0;
    std::size_t total = 0;
};

inline ShapeBiasReport shape_bias(const std::vector<StimulusRecord>& records) {
    require(!records.empty(), Errc::empty_input, "no stimulus records");
    std::size_t shape_hits = 0, texture_hits = 0;
    for (const auto& r : records) {
        require(r.shape_label != r.texture_label, Errc::invalid_argument,
                "stimulus record without cue conflict");
        if (r.predicted == r.shape_label) ++shape_hits;
        if (r.predicted == r.texture_label) ++texture_hits;
    }
    const std::size_t decisions = shape_hits + texture_hits;
    // Records matching neither cue carry no shape-vs-texture information and
    // are excluded from the denominator.
    require(decisions > 0, Errc::no_decisions, "no record matches either cue label");
    ShapeBiasReport rep;
    rep.shape_bias = static_cast<double>(shape_hits) / static_cast<double>(decisions);
    rep.shape_accuracy = static_cast<double>(shape_hits) / static_cast<double>(records.size());
    rep.texture_accuracy =
        static_cast<double>(texture_hits) / static_cast<double>(records.size());
    rep.decisions = decisions;
    rep.total = records.size();
    return rep;
}

using ClassMap = std::map<int, int>;  // finer-class id -> coarse-class id

struct CoarseFinerAccuracy {
    double coarse = 0.0;
    double finer = 0.0;
};

inline CoarseFinerAccuracy coarse_finer_accuracy(const std::vector<int>& predictions,
                                                 const std::vector<int>& labels,
                                                 const ClassMap& map) {
    require(predictions.size() == labels.size(), Errc::length_mismatch,
            "prediction/label counts differ");
    require(!predictions.empty(), Errc::empty_input, "no prediction records");
    auto coarse_of = [&](int id) {
        const auto it = map.find(id);
        require(it != map.end(), Errc::unmapped_class,
                "class " + std::to_string(id) + " has no coarse mapping");
        return it->second;
    };
    std::size_t coarse_hits = 0, finer_hits = 0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        if (predictions[i] == labels[i]) ++finer_hits;
        if (coarse_of(predictions[i]) == coarse_of(labels[i])) ++coarse_hits;
    }
    const double n = static_cast<double>(predictions.size());
    return {static_cast<double>(coarse_hits) / n, static_cast<double>(finer_hits) / n};
}

struct PerClassAccuracy {
    std::map<int, double> accuracy;        // label -> accuracy over its records
    std::vector<std::uint64_t> histogram;  // accuracy histogram over [0,1]
};

inline PerClassAccuracy per_class_accuracy(const std::vector<int>& predictions,
                                           const std::vector<int>& labels, int bins = 40) {
    require(predictions.size() == labels.size(), Errc::length_mismatch,
            "prediction/label counts differ");
    require(!predictions.empty(), Errc::empty_input, "no prediction records");
    require(bins >= 1, Errc::invalid_argument, "bins must be >= 1");

    std::map<int, std::pair<std::uint64_t, std::uint64_t>> tally;  // label -> (hits, total)
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        auto& [hits, total] = tally[labels[i]];
        ++total;
        if (predictions[i] == labels[i]) ++hits;
    }
    PerClassAccuracy out;
    out.histogram.assign(static_cast<std::size_t>(bins), 0);
    for (const auto& [label, ht] : tally) {
        const double acc = static_cast<double>(ht.first) / static_cast<double>(ht.second);
        out.accuracy[label] = acc;
        auto bin = static_cast<std::size_t>(acc * bins);
        if (bin >= static_cast<std::size_t>(bins)) bin = static_cast<std::size_t>(bins) - 1;
        ++out.histogram[bin];
    }
    return out;
}

// --- CSV readers for prediction records -------------------------------------

namespace detail {

inline std::vector<std::vector<int>> read_int_csv(const std::string& path, std::size_t columns) {
    FilePtr f = open_file(path, "rb");
    std::string content;
    char chunk[4096];
    std::size_t got;
    while ((got = std::fread(chunk, 1, sizeof chunk, f.get())) > 0) content.append(chunk, got);

    std::vector<std::vector<int>> rows;
    std::size_t pos = 0;
    while (pos < content.size()) {
        std::size_t eol = content.find('\n', pos);
        if (eol == std::string::npos) eol = content.size();
        std::string_view line(content.data() + pos, eol - pos);
        pos = eol + 1;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;

        std::vector<int> row;
        std::size_t field_start = 0;
        while (field_start <= line.size()) {
            std::size_t comma = line.find(',', field_start);
            if (comma == std::string_view::npos) comma = line.size();
            std::string_view field = line.substr(field_start, comma - field_start);
            while (!field.empty() && std::isspace(static_cast<unsigned char>(field.front())))
                field.remove_prefix(1);
            while (!field.empty() && std::isspace(static_cast<unsigned char>(field.back())))
                field.remove_suffix(1);
            int v = 0;
            const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
            require(ec == std::errc() && ptr == field.data() + field.size(), Errc::format_error,
                    "bad integer field '" + std::string(field) + "' in " + path);
            row.push_back(v);
            if (comma == line.size()) break;
            field_start = comma + 1;
        }
        require(row.size() == columns, Errc::format_error,
                "expected " + std::to_string(columns) + " columns in " + path);
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace detail

// CSV rows (predicted, shape_label, texture_label).
inline std::vector<StimulusRecord> read_stimulus_csv(const std::string& path) {
    std::vector<StimulusRecord> records;
    for (const auto& row : detail::read_int_csv(path, 3))
        records.push_back({row[0], row[1], row[2]});
    return records;
}

// CSV rows (predicted, label).
inline std::pair<std::vector<int>, std::vector<int>> read_prediction_csv(const std::string& path) {
    std::pair<std::vector<int>, std::vector<int>> out;
    for (const auto& row : detail::read_int_csv(path, 2)) {
        out.first.push_back(row[0]);
        out.second.push_back(row[1]);
    }
    return out;
}

// --- JSON serialization ------------------------------------------------------

inline nlohmann::json to_json(const SimilaritySummary& s) {
    return nlohmann::json{{"bin_edges", s.bin_edges},
                          {"counts", s.counts},
                          {"mean", s.mean},
                          {"n", s.n}};
}

inline nlohmann::json to_json(const ShapeBiasReport& r) {
    return nlohmann::json{{"shape_bias", r.shape_bias},
                          {"shape_accuracy", r.shape_accuracy},
                          {"texture_accuracy", r.texture_accuracy},
                          {"decisions", r.decisions},
                          {"total", r.total}};
}

inline void write_json(const nlohmann::json& j, const std::string& path) {
    detail::FilePtr f = detail::open_file(path, "wb");
    const std::string text = j.dump(2) + "\n";
    require(std::fwrite(text.data(), 1, text.size(), f.get()) == text.size(), Errc::io_error,
            "short write: " + path);
}

}  // namespace nsn
