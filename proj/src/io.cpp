#include "gpinv/io.hpp"

#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

namespace gpinv::io {

namespace fs = std::filesystem;

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

double parse_field(const std::string& field, const std::string& path, long line, int col) {
    const char* begin = field.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    while (end && *end && std::isspace(static_cast<unsigned char>(*end))) ++end;
    if (end == begin || (end && *end != '\0')) {
        std::ostringstream os;
        os << path << ":" << line << ":" << col + 1 << ": not a number: '" << field << "'";
        throw ParseError(os.str());
    }
    if (!std::isfinite(v)) {
        std::ostringstream os;
        os << path << ":" << line << ":" << col + 1 << ": non-finite value rejected";
        throw ParseError(os.str());
    }
    return v;
}

bool is_comment_or_blank(const std::string& line) {
    for (char ch : line) {
        if (std::isspace(static_cast<unsigned char>(ch))) continue;
        return ch == '#';
    }
    return true;
}

}  // namespace

Mat read_csv_matrix(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path + ": cannot open");
    std::vector<std::vector<double>> rows;
    std::string line;
    long lineno = 0;
    size_t ncols = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (is_comment_or_blank(line)) continue;
        const auto fields = split_fields(line);
        std::vector<double> row(fields.size());
        for (size_t c = 0; c < fields.size(); ++c) {
            row[c] = parse_field(fields[c], path, lineno, static_cast<int>(c));
        }
        if (rows.empty()) {
            ncols = row.size();
        } else if (row.size() != ncols) {
            std::ostringstream os;
            os << path << ":" << lineno << ": expected " << ncols << " columns, got "
               << row.size();
            throw ParseError(os.str());
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ParseError(path + ": no data rows");
    Mat m(static_cast<long>(rows.size()), static_cast<long>(ncols));
    for (size_t r = 0; r < rows.size(); ++r) {
        for (size_t c = 0; c < ncols; ++c) {
            m(static_cast<long>(r), static_cast<long>(c)) = rows[r][c];
        }
    }
    return m;
}

void write_csv_matrix(const std::string& path, const Mat& m,
                      const std::vector<std::string>& comments) {
    std::ofstream out(path);
    if (!out) throw ConfigError(path + ": cannot open for writing");
    for (const auto& c : comments) out << "# " << c << "\n";
    for (long r = 0; r < m.rows(); ++r) {
        for (long c = 0; c < m.cols(); ++c) {
            if (c) out << ",";
            out << fmt_g17(m(r, c));
        }
        out << "\n";
    }
}

namespace {

Vec json_to_vec(const json& j, const std::string& key) {
    if (!j.is_array()) throw ConfigError(key + " must be an array of numbers");
    Vec v(static_cast<long>(j.size()));
    for (size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) throw ConfigError(key + " must be an array of numbers");
        v[static_cast<long>(i)] = j[i].get<double>();
    }
    return v;
}

json vec_to_json(const Vec& v) {
    json out = json::array();
    for (long i = 0; i < v.size(); ++i) out.push_back(v[i]);
    return out;
}

Mat json_to_mat(const json& j, const std::string& key) {
    if (!j.is_array() || j.empty()) throw ConfigError(key + " must be a matrix (array of rows)");
    const long rows = static_cast<long>(j.size());
    Vec first = json_to_vec(j[0], key);
    Mat m(rows, first.size());
    m.row(0) = first.transpose();
    for (long r = 1; r < rows; ++r) {
        Vec row = json_to_vec(j[static_cast<size_t>(r)], key);
        if (row.size() != m.cols()) throw ConfigError(key + " rows must have equal length");
        m.row(r) = row.transpose();
    }
    return m;
}

json mat_to_json(const Mat& m) {
    json out = json::array();
    for (long r = 0; r < m.rows(); ++r) out.push_back(vec_to_json(m.row(r).transpose()));
    return out;
}

std::string resolve_path(const std::string& base_dir, const std::string& p) {
    if (p.empty() || fs::path(p).is_absolute() || base_dir.empty()) return p;
    return (fs::path(base_dir) / p).string();
}

}  // namespace

json load_raw_config(const std::string& path, std::string* base_dir) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path + ": cannot open config");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ParseError(path + ": invalid JSON: " + e.what());
    }
    if (j.contains("config")) j = j["config"];  // run manifest
    if (base_dir) *base_dir = fs::path(path).parent_path().string();
    return j;
}

RunConfig parse_config_file(const std::string& path) {
    std::string base_dir;
    json j = load_raw_config(path, &base_dir);
    return parse_config_json(j, base_dir);
}

RunConfig parse_config_json(const json& j, const std::string& base_dir) {
    RunConfig cfg;
    try {
        if (j.contains("dims")) {
            const auto& dj = j.at("dims");
            cfg.dims.d = dj.value("d", 0);
            cfg.dims.j = dj.value("j", 0);
            cfg.dims.k = dj.value("k", 0);
        }
        if (j.contains("data")) {
            const auto& dj = j.at("data");
            cfg.design_path = resolve_path(base_dir, dj.value("design", ""));
            cfg.training_path = resolve_path(base_dir, dj.value("training", ""));
            cfg.test_path = resolve_path(base_dir, dj.value("test", ""));
        }
        if (j.contains("bounds")) {
            cfg.bounds.lower = json_to_vec(j.at("bounds").at("lower"), "bounds.lower");
            cfg.bounds.upper = json_to_vec(j.at("bounds").at("upper"), "bounds.upper");
        }
        if (j.contains("coord_scales")) {
            cfg.coord_scales = json_to_vec(j.at("coord_scales"), "coord_scales");
        }
        if (j.contains("error_model")) {
            const auto& ej = j.at("error_model");
            const std::string kind = ej.value("kind", "none");
            if (kind == "none") {
                cfg.error.kind = ErrorModel::Kind::none;
            } else if (kind == "scalar") {
                cfg.error.kind = ErrorModel::Kind::scalar;
                cfg.error.phi = ej.value("phi", 0.0);
            } else if (kind == "kron") {
                cfg.error.kind = ErrorModel::Kind::kron;
                cfg.error.sigma1 = json_to_mat(ej.at("sigma1"), "error_model.sigma1");
                cfg.error.sigma2 = json_to_mat(ej.at("sigma2"), "error_model.sigma2");
            } else {
                throw ConfigError("error_model.kind must be none|scalar|kron");
            }
        }
        if (j.contains("tmcmc")) {
            const auto& tj = j.at("tmcmc");
            cfg.tmcmc.seed = tj.value("seed", 0ULL);
            cfg.tmcmc.burn_in = tj.value("burn_in", 5000L);
            cfg.tmcmc.iterations = tj.value("iterations", 20000L);
            cfg.tmcmc.thin = tj.value("thin", 1L);
            cfg.tmcmc.move_prob = tj.value("move_prob", 0.5);
            if (tj.contains("move_probs")) {
                cfg.tmcmc.explicit_move_probs = json_to_vec(tj.at("move_probs"), "tmcmc.move_probs");
            }
            if (tj.contains("scales")) {
                const auto& sj = tj.at("scales");
                if (sj.is_array()) {
                    cfg.tmcmc.explicit_scales = json_to_vec(sj, "tmcmc.scales");
                } else {
                    if (sj.contains("s")) cfg.tmcmc.scale_s = json_to_vec(sj.at("s"), "scales.s");
                    if (sj.contains("b")) cfg.tmcmc.scale_b = json_to_vec(sj.at("b"), "scales.b");
                    if (sj.contains("sigma")) cfg.tmcmc.scale_sigma = sj.at("sigma").get<double>();
                }
            }
            if (tj.contains("init")) {
                const auto& ij = tj.at("init");
                if (ij.contains("s")) cfg.tmcmc.init_s = json_to_vec(ij.at("s"), "init.s");
                if (ij.contains("b")) cfg.tmcmc.init_b = json_to_vec(ij.at("b"), "init.b");
                if (ij.contains("sigma")) cfg.tmcmc.init_sigma = json_to_mat(ij.at("sigma"), "init.sigma");
                cfg.tmcmc.init_sigma_scale = ij.value("sigma_scale", 1e-3);
            }
        }
        if (j.contains("summaries")) {
            const auto& sj = j.at("summaries");
            cfg.hpd_level = sj.value("hpd_level", 0.95);
            cfg.radial_unit_transform = sj.value("radial_unit_transform", false);
            cfg.radial_coord = sj.value("radial_coord", 0);
        }
        if (j.contains("predict")) {
            const auto& pj = j.at("predict");
            cfg.predict_augmented = pj.value("augmented", true);
            if (pj.contains("q_plugin")) {
                cfg.q_plugin = json_to_vec(pj.at("q_plugin"), "predict.q_plugin");
            }
            if (pj.contains("points")) {
                for (const auto& pt : pj.at("points")) {
                    cfg.predict_points.push_back(json_to_vec(pt, "predict.points"));
                }
            }
            if (pj.contains("labels")) {
                for (const auto& lb : pj.at("labels")) {
                    cfg.predict_labels.push_back(lb.get<std::string>());
                }
            }
        }
        if (j.contains("loo")) {
            const auto& lj = j.at("loo");
            cfg.loo.burn_in = lj.value("burn_in", 5000L);
            cfg.loo.iterations = lj.value("iterations", 20000L);
            cfg.loo.thin = lj.value("thin", 1L);
            cfg.loo.seed = lj.value("seed", 0ULL);
            cfg.loo.level = lj.value("level", 0.95);
            cfg.loo.init_sigma_scale = lj.value("init_sigma_scale", 1e-3);
            cfg.loo.move_prob = lj.value("move_prob", 0.5);
            if (lj.contains("init_b")) cfg.loo.init_b = json_to_vec(lj.at("init_b"), "loo.init_b");
            if (lj.contains("scales")) cfg.loo.scales = json_to_vec(lj.at("scales"), "loo.scales");
        }
        if (j.contains("output")) cfg.output_dir = resolve_path(base_dir, j.at("output").get<std::string>());
        if (j.contains("chain")) cfg.chain_path = resolve_path(base_dir, j.at("chain").get<std::string>());
        if (j.contains("synth")) {
            cfg.synth.present = true;
            cfg.synth.spec = j.at("synth");
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }

    // canonical resolved configuration: the hashing and manifest basis
    json r;
    r["dims"] = {{"d", cfg.dims.d}, {"j", cfg.dims.j}, {"k", cfg.dims.k}};
    r["data"] = {{"design", cfg.design_path},
                 {"training", cfg.training_path},
                 {"test", cfg.test_path}};
    if (cfg.bounds.lower.size() > 0) {
        r["bounds"] = {{"lower", vec_to_json(cfg.bounds.lower)},
                       {"upper", vec_to_json(cfg.bounds.upper)}};
    }
    if (cfg.coord_scales.size() > 0) r["coord_scales"] = vec_to_json(cfg.coord_scales);
    switch (cfg.error.kind) {
        case ErrorModel::Kind::none:
            r["error_model"] = {{"kind", "none"}};
            break;
        case ErrorModel::Kind::scalar:
            r["error_model"] = {{"kind", "scalar"}, {"phi", cfg.error.phi}};
            break;
        case ErrorModel::Kind::kron:
            r["error_model"] = {{"kind", "kron"},
                                {"sigma1", mat_to_json(cfg.error.sigma1)},
                                {"sigma2", mat_to_json(cfg.error.sigma2)}};
            break;
    }
    json tj;
    tj["seed"] = cfg.tmcmc.seed;
    tj["burn_in"] = cfg.tmcmc.burn_in;
    tj["iterations"] = cfg.tmcmc.iterations;
    tj["thin"] = cfg.tmcmc.thin;
    tj["move_prob"] = cfg.tmcmc.move_prob;
    if (cfg.tmcmc.explicit_move_probs.size() > 0) {
        tj["move_probs"] = vec_to_json(cfg.tmcmc.explicit_move_probs);
    }
    if (cfg.tmcmc.explicit_scales.size() > 0) {
        tj["scales"] = vec_to_json(cfg.tmcmc.explicit_scales);
    } else {
        json sj;
        if (cfg.tmcmc.scale_s.size() > 0) sj["s"] = vec_to_json(cfg.tmcmc.scale_s);
        if (cfg.tmcmc.scale_b.size() > 0) sj["b"] = vec_to_json(cfg.tmcmc.scale_b);
        if (cfg.tmcmc.scale_sigma > 0) sj["sigma"] = cfg.tmcmc.scale_sigma;
        if (!sj.empty()) tj["scales"] = sj;
    }
    json ij;
    if (cfg.tmcmc.init_s.size() > 0) ij["s"] = vec_to_json(cfg.tmcmc.init_s);
    if (cfg.tmcmc.init_b.size() > 0) ij["b"] = vec_to_json(cfg.tmcmc.init_b);
    if (cfg.tmcmc.init_sigma.size() > 0) ij["sigma"] = mat_to_json(cfg.tmcmc.init_sigma);
    ij["sigma_scale"] = cfg.tmcmc.init_sigma_scale;
    tj["init"] = ij;
    r["tmcmc"] = tj;
    r["summaries"] = {{"hpd_level", cfg.hpd_level},
                      {"radial_unit_transform", cfg.radial_unit_transform},
                      {"radial_coord", cfg.radial_coord}};
    if (!cfg.predict_points.empty() || cfg.q_plugin.size() > 0) {
        json pj;
        pj["augmented"] = cfg.predict_augmented;
        if (cfg.q_plugin.size() > 0) pj["q_plugin"] = vec_to_json(cfg.q_plugin);
        json pts = json::array();
        for (const auto& pt : cfg.predict_points) pts.push_back(vec_to_json(pt));
        pj["points"] = pts;
        if (!cfg.predict_labels.empty()) pj["labels"] = cfg.predict_labels;
        r["predict"] = pj;
    }
    json lj;
    lj["burn_in"] = cfg.loo.burn_in;
    lj["iterations"] = cfg.loo.iterations;
    lj["thin"] = cfg.loo.thin;
    lj["seed"] = cfg.loo.seed;
    lj["level"] = cfg.loo.level;
    lj["init_sigma_scale"] = cfg.loo.init_sigma_scale;
    lj["move_prob"] = cfg.loo.move_prob;
    if (cfg.loo.init_b.size() > 0) lj["init_b"] = vec_to_json(cfg.loo.init_b);
    if (cfg.loo.scales.size() > 0) lj["scales"] = vec_to_json(cfg.loo.scales);
    r["loo"] = lj;
    r["output"] = cfg.output_dir;
    if (!cfg.chain_path.empty()) r["chain"] = cfg.chain_path;
    if (cfg.synth.present) r["synth"] = cfg.synth.spec;
    cfg.resolved = std::move(r);
    return cfg;
}

std::string config_hash_hex(const RunConfig& config) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a(config.resolved.dump())));
    return buf;
}

InverseProblem load_problem(const RunConfig& config, std::vector<std::string>* warnings) {
    if (config.design_path.empty() || config.training_path.empty() || config.test_path.empty()) {
        throw ConfigError("data.design, data.training and data.test paths are required");
    }
    Mat design = read_csv_matrix(config.design_path);
    Mat training = read_csv_matrix(config.training_path);
    Mat test = read_csv_matrix(config.test_path);

    const Dims& dm = config.dims;
    if (dm.d < 1 || dm.j < 1 || dm.k < 1) {
        throw ConfigError("dims.d, dims.j, dims.k must all be >= 1");
    }
    if (design.cols() != dm.d) {
        throw DimensionMismatch("design file has " + std::to_string(design.cols()) +
                                " columns, dims.d = " + std::to_string(dm.d));
    }
    if (training.cols() != dm.jk()) {
        throw DimensionMismatch("training file has " + std::to_string(training.cols()) +
                                " columns, jk = " + std::to_string(dm.jk()));
    }
    if (training.rows() != design.rows()) {
        throw DimensionMismatch("training rows (" + std::to_string(training.rows()) +
                                ") != design rows (" + std::to_string(design.rows()) + ")");
    }
    if (test.rows() != 1 || test.cols() != dm.jk()) {
        throw DimensionMismatch("test file must be 1 x jk");
    }

    TrainingSet ts;
    ts.design = design;
    ts.data = training;
    ts.dims = dm;
    ts.dims.n = static_cast<int>(design.rows());

    if (warnings && config.bounds.lower.size() == dm.d) {
        for (long i = 0; i < design.rows(); ++i) {
            if (!config.bounds.contains(design.row(i).transpose())) {
                warnings->push_back("design vector " + std::to_string(i) +
                                    " lies outside the declared bounds");
            }
        }
    }
    return InverseProblem(std::move(ts), test.row(0).transpose(), config.bounds, config.error,
                          config.coord_scales);
}

TmcmcConfig resolve_tmcmc(const RunConfig& config, const InverseProblem& problem) {
    const Dims& dm = problem.dims();
    const int dstar = PosteriorState::packed_size(dm.d, dm.k);
    const double v_scale = problem.data_variance_scale();

    TmcmcConfig mc;
    mc.seed = config.tmcmc.seed;
    mc.burn_in = config.tmcmc.burn_in;
    mc.iterations = config.tmcmc.iterations;
    mc.thin = config.tmcmc.thin;

    if (config.tmcmc.explicit_scales.size() > 0) {
        if (config.tmcmc.explicit_scales.size() != dstar) {
            throw ConfigError("tmcmc.scales must have length d* = " + std::to_string(dstar));
        }
        mc.scales = config.tmcmc.explicit_scales;
    } else {
        mc.scales = default_proposal_scales(problem.bounds(), dm.k, v_scale);
        if (config.tmcmc.scale_s.size() == dm.d) mc.scales.head(dm.d) = config.tmcmc.scale_s;
        if (config.tmcmc.scale_b.size() == dm.d) {
            mc.scales.segment(dm.d, dm.d) = config.tmcmc.scale_b;
        }
        if (config.tmcmc.scale_sigma > 0) {
            mc.scales.tail(dm.k * (dm.k + 1) / 2).setConstant(config.tmcmc.scale_sigma);
        }
    }
    if (config.tmcmc.explicit_move_probs.size() > 0) {
        if (config.tmcmc.explicit_move_probs.size() != dstar) {
            throw ConfigError("tmcmc.move_probs must have length d*");
        }
        mc.move_probs = config.tmcmc.explicit_move_probs;
    } else {
        mc.move_probs = Vec::Constant(dstar, config.tmcmc.move_prob);
    }

    PosteriorState init;
    init.s = config.tmcmc.init_s.size() == dm.d
                 ? config.tmcmc.init_s
                 : Vec(0.5 * (problem.bounds().lower + problem.bounds().upper));
    init.b = config.tmcmc.init_b.size() == dm.d ? config.tmcmc.init_b : Vec::Ones(dm.d);
    if (config.tmcmc.init_sigma.rows() == dm.k && config.tmcmc.init_sigma.cols() == dm.k) {
        init.sigma = config.tmcmc.init_sigma;
    } else {
        init.sigma = config.tmcmc.init_sigma_scale * v_scale * Mat::Identity(dm.k, dm.k);
    }

    // deterministic nudge off design points / bad starts
    constexpr double neg_inf = -std::numeric_limits<double>::infinity();
    if (log_posterior(problem, init) == neg_inf) {
        RngStream rng(mix_seed(mc.seed, 0xC0FFEE));
        for (int tries = 0; tries < 200; ++tries) {
            for (int l = 0; l < dm.d; ++l) {
                init.s[l] = problem.bounds().lower[l] +
                            rng.uniform() * problem.bounds().width(l);
            }
            if (log_posterior(problem, init) != neg_inf) break;
        }
    }
    mc.init = init.pack();
    return mc;
}

void write_chain_csv(const std::string& path, const Chain& chain, long thin,
                     const std::vector<std::string>& names, const std::string& config_hash,
                     std::uint64_t seed) {
    std::ofstream out(path);
    if (!out) throw ConfigError(path + ": cannot open for writing");
    out << "# gpinv chain\n";
    out << "# config_hash=" << config_hash << " seed=" << seed << "\n";
    out << "iteration";
    for (const auto& n : names) out << "," << n;
    out << ",log_post\n";
    for (long r = 0; r < chain.size(); ++r) {
        out << (r + 1) * thin;
        for (long c = 0; c < chain.samples.cols(); ++c) {
            out << "," << fmt_g17(chain.samples(r, c));
        }
        out << "," << fmt_g17(chain.log_post[r]) << "\n";
    }
}

ChainFile read_chain_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path + ": cannot open");
    ChainFile cf;
    std::string line;
    long lineno = 0;
    bool header_seen = false;
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.rfind("# config_hash=", 0) == 0) {
            std::istringstream ss(line.substr(2));
            std::string tok;
            while (ss >> tok) {
                if (tok.rfind("config_hash=", 0) == 0) cf.config_hash = tok.substr(12);
                if (tok.rfind("seed=", 0) == 0) cf.seed = std::stoull(tok.substr(5));
            }
            continue;
        }
        if (is_comment_or_blank(line)) continue;
        if (!header_seen) {
            auto fields = split_fields(line);
            if (fields.size() < 3 || fields.front() != "iteration" || fields.back() != "log_post") {
                throw ParseError(path + ": malformed chain header");
            }
            cf.names.assign(fields.begin() + 1, fields.end() - 1);
            header_seen = true;
            continue;
        }
        auto fields = split_fields(line);
        if (fields.size() != cf.names.size() + 2) {
            throw ParseError(path + ":" + std::to_string(lineno) + ": wrong column count");
        }
        std::vector<double> row(fields.size());
        for (size_t c = 0; c < fields.size(); ++c) {
            row[c] = parse_field(fields[c], path, lineno, static_cast<int>(c));
        }
        rows.push_back(std::move(row));
    }
    if (!header_seen || rows.empty()) throw ParseError(path + ": empty chain");
    const long n = static_cast<long>(rows.size());
    const long dim = static_cast<long>(cf.names.size());
    cf.samples.resize(n, dim);
    cf.log_post.resize(n);
    cf.iterations.resize(n);
    for (long r = 0; r < n; ++r) {
        cf.iterations[r] = static_cast<long>(rows[r][0]);
        for (long c = 0; c < dim; ++c) cf.samples(r, c) = rows[r][c + 1];
        cf.log_post[r] = rows[r].back();
    }
    return cf;
}

void write_manifest(const std::string& path, const RunConfig& config,
                    const std::string& config_hash, const Chain& chain) {
    json m;
    m["config"] = config.resolved;
    m["config_hash"] = config_hash;
    m["seed"] = config.tmcmc.seed;
    m["stored_samples"] = chain.size();
    m["proposals"] = chain.proposal_count;
    m["accepts"] = chain.accept_count;
    m["acceptance_rate"] = chain.proposal_count > 0
                               ? static_cast<double>(chain.accept_count) / chain.proposal_count
                               : 0.0;
    m["chain"] = "chain.csv";
    std::ofstream out(path);
    if (!out) throw ConfigError(path + ": cannot open for writing");
    out << m.dump(2) << "\n";
}

std::vector<CoordinateSummary> summarize_chain(const ChainFile& chain, const RunConfig& config) {
    const long n = chain.samples.rows();
    if (n < 2) throw EmptyChain("summarize: chain too short");
    std::vector<CoordinateSummary> out;
    const int d = config.dims.d;
    for (long c = 0; c < chain.samples.cols(); ++c) {
        CoordinateSummary cs;
        cs.name = c < static_cast<long>(chain.names.size()) ? chain.names[c]
                                                            : "coord" + std::to_string(c);
        Vec col = chain.samples.col(c);
        cs.marginal = marginal_summary(col);
        std::vector<double> v(col.data(), col.data() + n);
        // the prior box is the declared support for s coordinates; other
        // coordinates fall back to the sample range
        if (c < d && config.bounds.lower.size() == d) {
            cs.hpd = hpd_region(v, config.hpd_level, config.bounds.lower[c],
                                config.bounds.upper[c]);
            cs.mode = posterior_mode(v, config.bounds.lower[c], config.bounds.upper[c]);
        } else {
            cs.hpd = hpd_region(v, config.hpd_level);
            cs.mode = posterior_mode(v);
        }
        if (config.radial_unit_transform && c == config.radial_coord) {
            cs.has_omega_b = true;
            cs.omega_b = bar_frequency(cs.hpd);
            cs.omega_b_mode = bar_frequency(cs.mode);
        }
        out.push_back(std::move(cs));
    }
    return out;
}

void write_summary(const std::string& dir, const std::vector<CoordinateSummary>& summaries,
                   const std::string& config_hash, std::uint64_t seed) {
    json sj;
    sj["config_hash"] = config_hash;
    sj["seed"] = seed;
    json coords = json::array();
    for (const auto& cs : summaries) {
        json c;
        c["name"] = cs.name;
        c["mean"] = cs.marginal.mean;
        c["variance"] = cs.marginal.variance;
        c["ci95"] = {cs.marginal.ci_low, cs.marginal.ci_high};
        c["mode"] = cs.mode;
        json intervals = json::array();
        for (const auto& [lo, hi] : cs.hpd.intervals) intervals.push_back({lo, hi});
        c["hpd"] = {{"level", cs.hpd.level}, {"intervals", intervals}, {"mass", cs.hpd.mass}};
        if (cs.has_omega_b) {
            json oi = json::array();
            for (const auto& [lo, hi] : cs.omega_b.intervals) oi.push_back({lo, hi});
            c["omega_b"] = {{"mode", cs.omega_b_mode}, {"intervals", oi}};
        }
        coords.push_back(std::move(c));
    }
    sj["coordinates"] = coords;
    {
        std::ofstream out(fs::path(dir) / "summary.json");
        if (!out) throw ConfigError("cannot write summary.json");
        out << sj.dump(2) << "\n";
    }
    {
        // Table-2/3 shape: moments and central intervals, 7 significant digits
        std::ofstream out(fs::path(dir) / "summary.csv");
        if (!out) throw ConfigError("cannot write summary.csv");
        out << "# config_hash=" << config_hash << " seed=" << seed << "\n";
        out << "name,mean,variance,ci_low,ci_high\n";
        for (const auto& cs : summaries) {
            out << cs.name << "," << fmt_g7(cs.marginal.mean) << ","
                << fmt_g7(cs.marginal.variance) << "," << fmt_g7(cs.marginal.ci_low) << ","
                << fmt_g7(cs.marginal.ci_high) << "\n";
        }
    }
    {
        // Table-1 shape: mode and possibly disjoint HPD intervals
        std::ofstream out(fs::path(dir) / "hpd.csv");
        if (!out) throw ConfigError("cannot write hpd.csv");
        out << "# config_hash=" << config_hash << " seed=" << seed << "\n";
        out << "name,mode,level,interval,lo,hi,omega_b_lo,omega_b_hi\n";
        for (const auto& cs : summaries) {
            int idx = 0;
            for (const auto& [lo, hi] : cs.hpd.intervals) {
                out << cs.name << "," << fmt_g7(cs.mode) << "," << fmt_g7(cs.hpd.level) << ","
                    << idx << "," << fmt_g17(lo) << "," << fmt_g17(hi);
                if (cs.has_omega_b) {
                    out << "," << fmt_g17(cs.omega_b.intervals[idx].first) << ","
                        << fmt_g17(cs.omega_b.intervals[idx].second);
                } else {
                    out << ",,";
                }
                out << "\n";
                ++idx;
            }
        }
    }
}

void write_model_fit(const std::string& dir, const ModelFitReport& report, const Vec& v_test,
                     const std::string& config_hash, std::uint64_t seed) {
    {
        std::ofstream out(fs::path(dir) / "modelfit.csv");
        if (!out) throw ConfigError("cannot write modelfit.csv");
        out << "# config_hash=" << config_hash << " seed=" << seed << "\n";
        out << "point,component,observation,predicted,observed\n";
        for (const auto& pf : report.points) {
            for (int m1 = 0; m1 < report.j; ++m1) {
                for (int t = 0; t < report.k; ++t) {
                    out << pf.label << "," << (t + 1) << "," << (m1 + 1) << ","
                        << fmt_g17(pf.predicted[m1 * report.k + t]) << ","
                        << fmt_g17(v_test[m1 * report.k + t]) << "\n";
                }
            }
        }
    }
    json mj;
    mj["config_hash"] = config_hash;
    mj["seed"] = seed;
    json pts = json::array();
    for (const auto& pf : report.points) {
        json p;
        p["label"] = pf.label;
        p["s"] = vec_to_json(pf.s);
        p["rmse"] = vec_to_json(pf.rmse);
        pts.push_back(std::move(p));
    }
    mj["points"] = pts;
    std::ofstream out(fs::path(dir) / "modelfit.json");
    if (!out) throw ConfigError("cannot write modelfit.json");
    out << mj.dump(2) << "\n";
}

void write_loo_report(const std::string& dir, const LooReport& report,
                      const std::string& config_hash, std::uint64_t seed) {
    {
        std::ofstream out(fs::path(dir) / "loo.csv");
        if (!out) throw ConfigError("cannot write loo.csv");
        out << "# config_hash=" << config_hash << " seed=" << seed << "\n";
        out << "fold,ok,coord,covered,acceptance_rate\n";
        for (const auto& fold : report.folds) {
            if (!fold.ok) {
                out << fold.index << ",0,,," << "\n";
                continue;
            }
            for (size_t l = 0; l < fold.covered.size(); ++l) {
                out << fold.index << ",1," << (l + 1) << "," << (fold.covered[l] ? 1 : 0) << ","
                    << fmt_g7(fold.acceptance_rate) << "\n";
            }
        }
    }
    json lj;
    lj["config_hash"] = config_hash;
    lj["seed"] = seed;
    lj["ok_folds"] = report.ok_folds;
    lj["coverage"] = vec_to_json(report.coverage);
    json folds = json::array();
    for (const auto& fold : report.folds) {
        json f;
        f["index"] = fold.index;
        f["ok"] = fold.ok;
        if (!fold.ok) f["error"] = fold.error;
        if (fold.ok) {
            f["covered"] = fold.covered;
            f["acceptance_rate"] = fold.acceptance_rate;
        }
        folds.push_back(std::move(f));
    }
    lj["folds"] = folds;
    std::ofstream out(fs::path(dir) / "loo.json");
    if (!out) throw ConfigError("cannot write loo.json");
    out << lj.dump(2) << "\n";
}

}  // namespace gpinv::io
