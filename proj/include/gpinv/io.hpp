#ifndef GPINV_IO_HPP
#define GPINV_IO_HPP

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "gpinv/emulator.hpp"
#include "gpinv/posterior.hpp"
#include "gpinv/summaries.hpp"
#include "gpinv/tmcmc.hpp"

// Data ingestion and result serialization. Matrices travel as CSV (one row
// per line, '#' comment lines allowed, columns in the l = m1*k + m2 order);
// run manifests and summaries as JSON. Every output embeds the config hash
// and seed, and contains no timestamps, so reruns are byte-identical.

namespace gpinv::io {

using nlohmann::json;

Mat read_csv_matrix(const std::string& path);
void write_csv_matrix(const std::string& path, const Mat& m,
                      const std::vector<std::string>& comments = {});

struct TmcmcSettings {
    std::uint64_t seed = 0;
    long burn_in = 5000;
    long iterations = 20000;
    long thin = 1;
    Vec scale_s;            // d, defaults 2% of box width
    Vec scale_b;            // d, defaults 0.05
    double scale_sigma = -1.0;  // <0: default 0.01 * data variance scale
    Vec explicit_scales;    // full d* override when nonempty
    double move_prob = 0.5;
    Vec explicit_move_probs;
    Vec init_s;             // empty: box centre (nudged to finite density)
    Vec init_b;             // empty: ones
    Mat init_sigma;         // empty: init_sigma_scale * V * I
    double init_sigma_scale = 1e-3;
};

struct SynthSettings {
    bool present = false;
    json spec;
};

struct RunConfig {
    Dims dims;
    std::string design_path, training_path, test_path;
    Bounds bounds;
    Vec coord_scales;
    ErrorModel error;
    TmcmcSettings tmcmc;

    double hpd_level = 0.95;
    bool radial_unit_transform = false;
    int radial_coord = 0;

    std::vector<Vec> predict_points;
    std::vector<std::string> predict_labels;
    bool predict_augmented = true;
    Vec q_plugin;  // empty: posterior medians of b from the chain

    LooConfig loo;

    std::string output_dir = "out";
    std::string chain_path;  // consumed by summarize/predict

    SynthSettings synth;

    json resolved;  // canonical configuration, the hashing basis
};

// Accepts either a raw configuration or a run manifest (object with a
// "config" key). Relative data paths resolve against the file's directory.
RunConfig parse_config_file(const std::string& path);
RunConfig parse_config_json(const json& j, const std::string& base_dir);

// Raw JSON with manifest unwrapping; lets the CLI apply flag overrides
// before resolution.
json load_raw_config(const std::string& path, std::string* base_dir);

std::string config_hash_hex(const RunConfig& config);

// Reads the three data files and validates them against the declared dims.
// Design vectors outside the declared bounds produce warnings, not errors.
InverseProblem load_problem(const RunConfig& config, std::vector<std::string>* warnings = nullptr);

// Fully resolved sampler configuration (scales, move probabilities, init --
// nudged deterministically off design points when required).
TmcmcConfig resolve_tmcmc(const RunConfig& config, const InverseProblem& problem);

struct ChainFile {
    Mat samples;
    Vec log_post;
    std::vector<long> iterations;
    std::vector<std::string> names;
    std::string config_hash;
    std::uint64_t seed = 0;
};

void write_chain_csv(const std::string& path, const Chain& chain, long thin,
                     const std::vector<std::string>& names, const std::string& config_hash,
                     std::uint64_t seed);
ChainFile read_chain_csv(const std::string& path);

void write_manifest(const std::string& path, const RunConfig& config,
                    const std::string& config_hash, const Chain& chain);

struct CoordinateSummary {
    std::string name;
    MarginalSummary marginal;
    double mode = 0.0;
    HpdRegion hpd;
    bool has_omega_b = false;
    HpdRegion omega_b;
    double omega_b_mode = 0.0;
};

std::vector<CoordinateSummary> summarize_chain(const ChainFile& chain, const RunConfig& config);

void write_summary(const std::string& dir, const std::vector<CoordinateSummary>& summaries,
                   const std::string& config_hash, std::uint64_t seed);

void write_model_fit(const std::string& dir, const ModelFitReport& report, const Vec& v_test,
                     const std::string& config_hash, std::uint64_t seed);

void write_loo_report(const std::string& dir, const LooReport& report,
                      const std::string& config_hash, std::uint64_t seed);

}  // namespace gpinv::io

#endif
