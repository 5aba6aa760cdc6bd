#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "gpinv/io.hpp"
#include "gpinv/oracle.hpp"

// Subcommands: sample, summarize, predict, loo, synth. All take --config;
// sample accepts --seed/--iterations/--burn-in overrides; everything accepts
// --output. Exit codes: 0 success, 2 config/parse error, 3 numerical
// failure, 4 invalid initial state.

namespace {

using namespace gpinv;
namespace fs = std::filesystem;

bool verbose() {
    const char* v = std::getenv("GPINV_VERBOSE");
    return v && *v && std::string(v) != "0";
}

struct Overrides {
    std::string output;
    long long seed = -1;
    long iterations = -1;
    long burn_in = -1;
};

io::RunConfig load_config(const std::string& path, const Overrides& ov) {
    std::string base_dir;
    io::json j = io::load_raw_config(path, &base_dir);
    if (ov.seed >= 0) j["tmcmc"]["seed"] = static_cast<std::uint64_t>(ov.seed);
    if (ov.iterations >= 0) j["tmcmc"]["iterations"] = ov.iterations;
    if (ov.burn_in >= 0) j["tmcmc"]["burn_in"] = ov.burn_in;
    if (!ov.output.empty()) j["output"] = ov.output;
    return io::parse_config_json(j, base_dir);
}

void ensure_output_dir(const io::RunConfig& cfg) {
    std::error_code ec;
    fs::create_directories(cfg.output_dir, ec);
    if (ec) throw ConfigError("cannot create output directory " + cfg.output_dir);
}

void print_warnings(const std::vector<std::string>& warnings) {
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
}

int cmd_sample(const std::string& config_path, const Overrides& ov) {
    io::RunConfig cfg = load_config(config_path, ov);
    ensure_output_dir(cfg);
    std::vector<std::string> warnings;
    InverseProblem problem = io::load_problem(cfg, &warnings);
    print_warnings(warnings);

    TmcmcConfig mc = io::resolve_tmcmc(cfg, problem);
    if (verbose()) {
        std::cerr << "sampling " << mc.burn_in << "+" << mc.iterations << " iterations, d*="
                  << mc.init.size() << "\n";
    }
    LogTarget target = make_log_target(problem);
    Chain chain = run_chain(target, mc);

    const std::string hash = io::config_hash_hex(cfg);
    const auto names = PosteriorState::packed_names(problem.dims().d, problem.dims().k);
    io::write_chain_csv((fs::path(cfg.output_dir) / "chain.csv").string(), chain, mc.thin, names,
                        hash, mc.seed);
    io::write_manifest((fs::path(cfg.output_dir) / "manifest.json").string(), cfg, hash, chain);

    const double rate = chain.proposal_count > 0
                            ? static_cast<double>(chain.accept_count) / chain.proposal_count
                            : 0.0;
    std::cout << "stored " << chain.size() << " samples, acceptance rate " << fmt_g7(rate)
              << ", output " << cfg.output_dir << "\n";
    return 0;
}

io::ChainFile open_chain(const io::RunConfig& cfg) {
    std::string path = cfg.chain_path;
    if (path.empty()) path = (fs::path(cfg.output_dir) / "chain.csv").string();
    return io::read_chain_csv(path);
}

int cmd_summarize(const std::string& config_path, const Overrides& ov) {
    io::RunConfig cfg = load_config(config_path, ov);
    ensure_output_dir(cfg);
    io::ChainFile chain = open_chain(cfg);
    auto summaries = io::summarize_chain(chain, cfg);
    io::write_summary(cfg.output_dir, summaries, chain.config_hash, chain.seed);
    std::cout << "summarized " << chain.samples.rows() << " samples over "
              << summaries.size() << " coordinates, output " << cfg.output_dir << "\n";
    return 0;
}

int cmd_predict(const std::string& config_path, const Overrides& ov) {
    io::RunConfig cfg = load_config(config_path, ov);
    ensure_output_dir(cfg);
    std::vector<std::string> warnings;
    InverseProblem problem = io::load_problem(cfg, &warnings);
    print_warnings(warnings);
    const Dims& dm = problem.dims();

    Vec q_plugin = cfg.q_plugin;
    std::vector<Vec> points = cfg.predict_points;
    std::vector<std::string> labels = cfg.predict_labels;

    std::string hash = io::config_hash_hex(cfg);
    std::uint64_t seed = cfg.tmcmc.seed;
    Vec s_tilde;
    if (q_plugin.size() == 0 || points.empty()) {
        // plug-in smoothness = per-coordinate posterior medians; evaluation
        // points default to the chain mode and median
        io::ChainFile chain = open_chain(cfg);
        hash = chain.config_hash.empty() ? hash : chain.config_hash;
        seed = chain.seed;
        if (q_plugin.size() == 0) {
            q_plugin.resize(dm.d);
            for (int l = 0; l < dm.d; ++l) {
                Vec col = chain.samples.col(dm.d + l);
                std::vector<double> v(col.data(), col.data() + col.size());
                q_plugin[l] = empirical_quantile(v, 0.5);
            }
        }
        Vec s_mode(dm.d), s_median(dm.d);
        for (int l = 0; l < dm.d; ++l) {
            Vec col = chain.samples.col(l);
            std::vector<double> v(col.data(), col.data() + col.size());
            s_mode[l] = cfg.bounds.lower.size() == dm.d
                            ? posterior_mode(v, cfg.bounds.lower[l], cfg.bounds.upper[l])
                            : posterior_mode(v);
            s_median[l] = empirical_quantile(v, 0.5);
        }
        points.insert(points.begin(), s_median);
        labels.insert(labels.begin(), "median");
        points.insert(points.begin(), s_mode);
        labels.insert(labels.begin(), "mode");
        s_tilde = s_median;
    } else {
        s_tilde = points.front();
    }

    EmulatorFit emu = cfg.predict_augmented
                          ? fit_augmented(problem.training(), problem.test(), s_tilde, q_plugin,
                                          problem.coord_scales())
                          : fit(problem.training(), q_plugin, problem.coord_scales());
    ModelFitReport report = model_fit_report(emu, problem.test(), points, dm.j, dm.k, labels);
    io::write_model_fit(cfg.output_dir, report, problem.test(), hash, seed);
    std::cout << "predicted at " << points.size() << " points, output " << cfg.output_dir
              << "\n";
    return 0;
}

int cmd_loo(const std::string& config_path, const Overrides& ov) {
    io::RunConfig cfg = load_config(config_path, ov);
    ensure_output_dir(cfg);
    std::vector<std::string> warnings;
    InverseProblem problem = io::load_problem(cfg, &warnings);
    print_warnings(warnings);

    LooReport report = loo_cross_validate(problem.training(), problem.bounds(), cfg.loo,
                                          problem.error(), problem.coord_scales());
    const std::string hash = io::config_hash_hex(cfg);
    io::write_loo_report(cfg.output_dir, report, hash, cfg.loo.seed);
    std::cout << "loo folds ok " << report.ok_folds << "/" << report.folds.size()
              << ", coverage";
    for (long l = 0; l < report.coverage.size(); ++l) {
        std::cout << " " << fmt_g7(report.coverage[l]);
    }
    std::cout << ", output " << cfg.output_dir << "\n";
    return 0;
}

int cmd_synth(const std::string& config_path, const Overrides& ov) {
    io::RunConfig cfg = load_config(config_path, ov);
    if (!cfg.synth.present) throw ConfigError("synth subcommand requires a 'synth' section");
    ensure_output_dir(cfg);
    const io::json& sj = cfg.synth.spec;

    oracle::SyntheticSpec spec;
    spec.dims.n = sj.value("n", 25);
    spec.dims.j = sj.value("j", 4);
    spec.dims.k = sj.value("k", 2);
    spec.dims.d = sj.value("d", 2);
    spec.noise_sd = sj.value("noise_sd", 0.0);
    spec.seed = sj.value("seed", 0ULL);
    const std::string family = sj.value("family", "sinusoid_sum");
    if (family == "linear") spec.family = oracle::MapFamily::linear;
    else if (family == "sinusoid_sum") spec.family = oracle::MapFamily::sinusoid_sum;
    else if (family == "cosine_even") spec.family = oracle::MapFamily::cosine_even;
    else if (family == "periodic") spec.family = oracle::MapFamily::periodic;
    else throw ConfigError("synth.family must be linear|sinusoid_sum|cosine_even|periodic");
    const std::string rule = sj.value("design_rule", "grid");
    if (rule == "grid") spec.design_rule = oracle::DesignRule::grid;
    else if (rule == "latin_hypercube") spec.design_rule = oracle::DesignRule::latin_hypercube;
    else throw ConfigError("synth.design_rule must be grid|latin_hypercube");

    if (sj.contains("s_true")) {
        auto st = sj.at("s_true");
        spec.s_true.resize(static_cast<long>(st.size()));
        for (size_t i = 0; i < st.size(); ++i) spec.s_true[static_cast<long>(i)] = st[i];
    } else {
        throw ConfigError("synth.s_true is required");
    }
    if (sj.contains("box")) {
        auto lo = sj.at("box").at("lower");
        auto hi = sj.at("box").at("upper");
        spec.box.lower.resize(static_cast<long>(lo.size()));
        spec.box.upper.resize(static_cast<long>(hi.size()));
        for (size_t i = 0; i < lo.size(); ++i) spec.box.lower[static_cast<long>(i)] = lo[i];
        for (size_t i = 0; i < hi.size(); ++i) spec.box.upper[static_cast<long>(i)] = hi[i];
    } else {
        spec.box.lower = Vec::Zero(spec.dims.d);
        spec.box.upper = Vec::Ones(spec.dims.d);
    }

    oracle::SyntheticData data = oracle::synth_generate(spec);
    const std::string hash = io::config_hash_hex(cfg);
    std::vector<std::string> stamp = {"config_hash=" + hash +
                                      " seed=" + std::to_string(spec.seed)};
    std::vector<std::string> design_comments = stamp;
    design_comments.push_back("design vectors, one per row, d columns");
    std::vector<std::string> training_comments = stamp;
    training_comments.push_back("vectorized observations, columns in l = m1*k + m2 order");
    io::write_csv_matrix((fs::path(cfg.output_dir) / "design.csv").string(),
                         data.training.design, design_comments);
    io::write_csv_matrix((fs::path(cfg.output_dir) / "training.csv").string(),
                         data.training.data, training_comments);
    io::write_csv_matrix((fs::path(cfg.output_dir) / "test.csv").string(),
                         data.test.transpose(), training_comments);
    io::json truth;
    truth["config_hash"] = hash;
    truth["seed"] = spec.seed;
    truth["s_true"] = std::vector<double>(spec.s_true.data(),
                                          spec.s_true.data() + spec.s_true.size());
    truth["family"] = family;
    truth["noise_sd"] = spec.noise_sd;
    std::ofstream out(fs::path(cfg.output_dir) / "truth.json");
    out << truth.dump(2) << "\n";
    std::cout << "synthetic problem written to " << cfg.output_dir << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"matrix-variate GP inverse problems: marginalized posterior + TMCMC"};
    app.require_subcommand(1);

    std::string config_path;
    Overrides ov;

    auto add_common = [&](CLI::App* sub, bool sampler_flags) {
        sub->add_option("--config", config_path, "JSON configuration or run manifest")
            ->required();
        sub->add_option("--output", ov.output, "output directory override");
        if (sampler_flags) {
            sub->add_option("--seed", ov.seed, "RNG seed override");
            sub->add_option("--iterations", ov.iterations, "stored iteration count override");
            sub->add_option("--burn-in", ov.burn_in, "burn-in override");
        }
    };

    auto* sample = app.add_subcommand("sample", "run the TMCMC sampler, write chain + manifest");
    add_common(sample, true);
    auto* summarize =
        app.add_subcommand("summarize", "posterior summaries (moments, modes, HPD regions)");
    add_common(summarize, false);
    auto* predict = app.add_subcommand("predict", "emulator predictions and model-fit report");
    add_common(predict, false);
    auto* loo = app.add_subcommand("loo", "leave-one-out cross-validation of the pipeline");
    add_common(loo, false);
    auto* synth = app.add_subcommand("synth", "generate a synthetic problem in the CLI format");
    add_common(synth, false);

    CLI11_PARSE(app, argc, argv);

    try {
        if (sample->parsed()) return cmd_sample(config_path, ov);
        if (summarize->parsed()) return cmd_summarize(config_path, ov);
        if (predict->parsed()) return cmd_predict(config_path, ov);
        if (loo->parsed()) return cmd_loo(config_path, ov);
        if (synth->parsed()) return cmd_synth(config_path, ov);
    } catch (const gpinv::Error& e) {
        std::cerr << "error: " << e.category() << ": " << e.what() << "\n";
        if (e.category() == "numerical") return 3;
        if (e.category() == "invalid-init") return 4;
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: internal: " << e.what() << "\n";
        return 3;
    }
    return 2;
}
