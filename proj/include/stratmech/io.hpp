#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "stratmech/core.hpp"
#include "stratmech/detail/numfmt.hpp"
#include "stratmech/distributions.hpp"
#include "stratmech/learning.hpp"
#include "stratmech/linear_design.hpp"
#include "stratmech/metrics.hpp"
#include "stratmech/threshold_design.hpp"

namespace stratmech {

// Invalid or missing configuration; maps to exit code 1.
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ───────────────────────── configuration ─────────────────────────

struct DesignConfig {
    std::string method = "threshold_alg1";  // linear | threshold_baseline | threshold_alg1 | bruteforce
    double eps = 0.05;
    std::size_t angular_steps = 4096;
    double R = 1.0;
    std::size_t direction_grid = 2048;
    std::size_t bias_grid = 4096;
};

struct SweepConfig {
    std::vector<std::size_t> m_list;
    std::size_t trials = 10;
    std::size_t holdout_m = 0;
    std::string method = "threshold_alg1";
    double eps = 0.3;
};

struct VerifyConfig {
    std::size_t bands = 50;
    std::vector<double> eps_list = {0.1, 0.01, 0.001};
    std::size_t closed_form_checks = 20;
};

struct RunConfig {
    GeneratorSpec population;
    std::size_t m = 0;
    SmoothingSpec smoothing;
    std::optional<QualityFunction> quality;
    std::optional<Projection> projection;
    double cost_c = 0.0;
    DesignConfig design;
    SweepConfig sweep;
    VerifyConfig verify;
    std::uint64_t seed = 0;
    bool population_seed_set = false;  // explicit population.seed beats the derived one
    std::string output_dir = ".";

    CostModel cost() const {
        if (!(cost_c > 0.0)) throw config_error("config: cost.c must be set and positive");
        return CostModel(cost_c);
    }
    const QualityFunction& need_quality() const {
        if (!quality) throw config_error("config: quality section is required for this command");
        return *quality;
    }
    const Projection& need_projection() const {
        if (!projection) throw config_error("config: projection section is required for this command");
        return *projection;
    }
    // generator with the seed resolved: explicit population.seed, else derived
    // from the master seed so every command is a pure function of the config
    GeneratorSpec resolved_population() const {
        GeneratorSpec g = population;
        if (!population_seed_set) g.seed = detail::derive_seed(seed, 0x9e1ull);
        return g;
    }
};

namespace detail {

using nlohmann::json;

[[noreturn]] inline void cfg_fail(const std::string& ctx, const std::string& what) {
    throw config_error("config: " + ctx + ": " + what);
}

inline const json& need_field(const json& j, const char* key, const std::string& ctx) {
    const auto it = j.find(key);
    if (it == j.end()) cfg_fail(ctx, std::string("missing field '") + key + "'");
    return *it;
}

inline double as_number(const json& j, const std::string& ctx) {
    if (!j.is_number()) cfg_fail(ctx, "expected a number");
    return j.get<double>();
}

inline std::size_t as_count(const json& j, const std::string& ctx) {
    if (!j.is_number_unsigned()) cfg_fail(ctx, "expected a nonnegative integer");
    return j.get<std::size_t>();
}

inline std::string as_string(const json& j, const std::string& ctx) {
    if (!j.is_string()) cfg_fail(ctx, "expected a string");
    return j.get<std::string>();
}

inline FeatureVector as_vector(const json& j, const std::string& ctx) {
    if (!j.is_array() || j.empty()) cfg_fail(ctx, "expected a non-empty array of numbers");
    FeatureVector v;
    v.reserve(j.size());
    for (const auto& e : j) v.push_back(as_number(e, ctx));
    return v;
}

inline GeneratorSpec parse_population(const json& j, std::size_t& m_out, bool& seed_set) {
    GeneratorSpec g;
    const std::string kind = as_string(need_field(j, "kind", "population"), "population.kind");
    if (kind == "uniform_ball")
        g.kind = GeneratorSpec::Kind::uniform_ball;
    else if (kind == "uniform_box")
        g.kind = GeneratorSpec::Kind::uniform_box;
    else if (kind == "line_segment")
        g.kind = GeneratorSpec::Kind::line_segment;
    else if (kind == "gaussian_mixture")
        g.kind = GeneratorSpec::Kind::gaussian_mixture;
    else if (kind == "file")
        g.kind = GeneratorSpec::Kind::file;
    else
        cfg_fail("population.kind", "unknown kind '" + kind + "'");

    if (g.kind == GeneratorSpec::Kind::file) {
        g.path = as_string(need_field(j, "path", "population"), "population.path");
        return g;
    }
    g.n = as_count(need_field(j, "n", "population"), "population.n");
    g.r = as_number(need_field(j, "r", "population"), "population.r");
    if (auto it = j.find("m"); it != j.end()) m_out = as_count(*it, "population.m");
    if (auto it = j.find("seed"); it != j.end()) {
        g.seed = it->get<std::uint64_t>();
        seed_set = true;
    }
    if (auto it = j.find("axis"); it != j.end()) g.axis = as_count(*it, "population.axis");
    if (auto it = j.find("spread"); it != j.end()) g.spread = as_number(*it, "population.spread");
    if (auto it = j.find("centers"); it != j.end()) {
        if (!it->is_array()) cfg_fail("population.centers", "expected an array of points");
        for (const auto& c : *it) g.centers.push_back(as_vector(c, "population.centers"));
    }
    return g;
}

inline QualityFunction parse_quality(const json& j) {
    FeatureVector w = as_vector(need_field(j, "w", "quality"), "quality.w");
    const double b = as_number(need_field(j, "b", "quality"), "quality.b");
    Transform t = Transform::identity;
    double scale = 1.0;
    if (auto it = j.find("transform"); it != j.end()) {
        const std::string name = as_string(*it, "quality.transform");
        if (name == "identity")
            t = Transform::identity;
        else if (name == "logistic")
            t = Transform::logistic;
        else if (name == "sign")
            t = Transform::sign;
        else
            cfg_fail("quality.transform", "unknown transform '" + name + "'");
    }
    if (auto it = j.find("scale"); it != j.end()) scale = as_number(*it, "quality.scale");
    try {
        return QualityFunction(std::move(w), b, t, scale);
    } catch (const std::invalid_argument& e) {
        cfg_fail("quality", e.what());
    }
}

inline Projection parse_projection(const json& j) {
    const json& rows = need_field(j, "rows", "projection");
    if (!rows.is_array() || rows.empty()) cfg_fail("projection.rows", "expected a non-empty array of rows");
    std::vector<std::vector<double>> basis;
    for (const auto& r : rows) basis.push_back(as_vector(r, "projection.rows"));
    const std::size_t dim = basis.front().size();
    try {
        return Projection(dim, std::move(basis));
    } catch (const std::invalid_argument& e) {
        cfg_fail("projection", e.what());
    }
}

}  // namespace detail

inline RunConfig parse_config(const std::string& text, const std::string& name) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw config_error("config: " + name + ": " + e.what());
    }
    if (!j.is_object()) throw config_error("config: " + name + ": top level must be an object");

    RunConfig cfg;
    if (auto it = j.find("seed"); it != j.end()) cfg.seed = it->get<std::uint64_t>();
    if (auto it = j.find("output_dir"); it != j.end()) cfg.output_dir = detail::as_string(*it, "output_dir");
    if (auto it = j.find("population"); it != j.end())
        cfg.population = detail::parse_population(*it, cfg.m, cfg.population_seed_set);
    if (auto it = j.find("smoothing"); it != j.end())
        cfg.smoothing.sigma = detail::as_number(detail::need_field(*it, "sigma", "smoothing"), "smoothing.sigma");
    if (auto it = j.find("quality"); it != j.end()) cfg.quality = detail::parse_quality(*it);
    if (auto it = j.find("projection"); it != j.end()) cfg.projection = detail::parse_projection(*it);
    if (auto it = j.find("cost"); it != j.end())
        cfg.cost_c = detail::as_number(detail::need_field(*it, "c", "cost"), "cost.c");

    if (auto it = j.find("design"); it != j.end()) {
        const auto& d = *it;
        if (auto f = d.find("method"); f != d.end()) cfg.design.method = detail::as_string(*f, "design.method");
        if (auto f = d.find("eps"); f != d.end()) cfg.design.eps = detail::as_number(*f, "design.eps");
        if (auto f = d.find("angular_steps"); f != d.end())
            cfg.design.angular_steps = detail::as_count(*f, "design.angular_steps");
        if (auto f = d.find("R"); f != d.end()) cfg.design.R = detail::as_number(*f, "design.R");
        if (auto f = d.find("direction_grid"); f != d.end())
            cfg.design.direction_grid = detail::as_count(*f, "design.direction_grid");
        if (auto f = d.find("bias_grid"); f != d.end()) cfg.design.bias_grid = detail::as_count(*f, "design.bias_grid");
    }
    if (auto it = j.find("sweep"); it != j.end()) {
        const auto& s = *it;
        if (auto f = s.find("m_list"); f != s.end()) {
            if (!f->is_array()) detail::cfg_fail("sweep.m_list", "expected an array");
            for (const auto& e : *f) cfg.sweep.m_list.push_back(detail::as_count(e, "sweep.m_list"));
        }
        if (auto f = s.find("trials"); f != s.end()) cfg.sweep.trials = detail::as_count(*f, "sweep.trials");
        if (auto f = s.find("holdout_m"); f != s.end()) cfg.sweep.holdout_m = detail::as_count(*f, "sweep.holdout_m");
        if (auto f = s.find("method"); f != s.end()) cfg.sweep.method = detail::as_string(*f, "sweep.method");
        if (auto f = s.find("eps"); f != s.end()) cfg.sweep.eps = detail::as_number(*f, "sweep.eps");
    }
    if (auto it = j.find("verify"); it != j.end()) {
        const auto& v = *it;
        if (auto f = v.find("bands"); f != v.end()) cfg.verify.bands = detail::as_count(*f, "verify.bands");
        if (auto f = v.find("eps_list"); f != v.end()) {
            if (!f->is_array()) detail::cfg_fail("verify.eps_list", "expected an array");
            cfg.verify.eps_list.clear();
            for (const auto& e : *f) cfg.verify.eps_list.push_back(detail::as_number(e, "verify.eps_list"));
        }
        if (auto f = v.find("closed_form_checks"); f != v.end())
            cfg.verify.closed_form_checks = detail::as_count(*f, "verify.closed_form_checks");
    }
    return cfg;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw config_error("config: cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path);
}

// ───────────────────────── JSON emission ─────────────────────────
// Writers are hand-rolled so every double goes through format_double (17
// significant digits) and reruns are byte-identical.

namespace detail {

inline std::string json_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size() + 2);
    for (char ch : s) {
        switch (ch) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            default:
                if (static_cast<unsigned char>(ch) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof(buf), "\\u%04x", ch);
                    out += buf;
                } else {
                    out += ch;
                }
        }
    }
    return out;
}

inline void json_vector(std::ostream& out, const FeatureVector& v) {
    out << '[';
    for (std::size_t i = 0; i < v.size(); ++i) out << (i ? "," : "") << format_double(v[i]);
    out << ']';
}

}  // namespace detail

inline void write_mechanism_json(std::ostream& out, const ThresholdMechanism& g) {
    out << "{\n  \"type\": \"threshold\",\n  \"w\": ";
    detail::json_vector(out, g.w);
    out << ",\n  \"b\": " << detail::format_double(g.b) << ",\n  \"R\": null\n}\n";
}

inline void write_mechanism_json(std::ostream& out, const LinearMechanism& g) {
    out << "{\n  \"type\": \"linear\",\n  \"w\": ";
    detail::json_vector(out, g.w);
    out << ",\n  \"b\": " << detail::format_double(g.b) << ",\n  \"R\": " << detail::format_double(g.R) << "\n}\n";
}

struct MechanismFile {
    bool is_linear = false;
    FeatureVector w;
    double b = 0.0;
    double R = 1.0;

    ThresholdMechanism threshold() const { return ThresholdMechanism(w, b); }
    LinearMechanism linear() const { return LinearMechanism(w, b, R); }
};

inline MechanismFile read_mechanism_json(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw data_error("mechanism: cannot open '" + path + "'");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw data_error("mechanism: " + path + ": " + e.what());
    }
    MechanismFile mf;
    const std::string type = j.value("type", "");
    if (type == "linear")
        mf.is_linear = true;
    else if (type != "threshold")
        throw data_error("mechanism: " + path + ": type must be 'linear' or 'threshold'");
    if (!j.contains("w") || !j["w"].is_array() || j["w"].empty())
        throw data_error("mechanism: " + path + ": missing direction w");
    for (const auto& e : j["w"]) {
        if (!e.is_number()) throw data_error("mechanism: " + path + ": non-numeric entry in w");
        mf.w.push_back(e.get<double>());
    }
    if (!j.contains("b") || !j["b"].is_number()) throw data_error("mechanism: " + path + ": missing bias b");
    mf.b = j["b"].get<double>();
    if (mf.is_linear) {
        if (!j.contains("R") || !j["R"].is_number()) throw data_error("mechanism: " + path + ": linear needs cap R");
        mf.R = j["R"].get<double>();
    }
    return mf;
}

inline SampleSet load_dataset(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw data_error("dataset: cannot open '" + path + "'");
    return read_dataset_csv(in, path);
}

// ───────────────────────── commands ─────────────────────────

namespace detail {

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw data_error("cannot write '" + path.string() + "'");
    out << content;
    if (!out) throw data_error("write failed for '" + path.string() + "'");
}

inline std::filesystem::path ensure_outdir(const RunConfig& cfg) {
    std::filesystem::path dir(cfg.output_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw data_error("cannot create output dir '" + cfg.output_dir + "': " + ec.message());
    return dir;
}

inline void report_candidates(std::ostream& out, const std::vector<Candidate>& cands) {
    constexpr std::size_t kCap = 1000;
    const std::size_t keep = std::min(cands.size(), kCap);
    out << "  \"candidates_total\": " << cands.size() << ",\n";
    out << "  \"candidates_truncated\": " << (cands.size() > kCap ? "true" : "false") << ",\n";
    out << "  \"candidates\": [";
    for (std::size_t i = 0; i < keep; ++i) {
        out << (i ? ",\n    " : "\n    ") << "{\"w\": ";
        json_vector(out, cands[i].w);
        out << ", \"b\": " << format_double(cands[i].b) << ", \"gain\": " << format_double(cands[i].gain) << '}';
    }
    out << (keep ? "\n  ]" : "]");
}

}  // namespace detail

// Writes dataset.csv and dataset.json (provenance sidecar) into output_dir.
inline void cmd_gen(const RunConfig& cfg) {
    if (cfg.m == 0) throw config_error("config: population.m must be >= 1 for gen");
    const GeneratorSpec spec = cfg.resolved_population();
    SampleSet s = sample(spec, cfg.m);
    if (cfg.smoothing.sigma > 0.0)
        s = smooth(s, cfg.smoothing, detail::derive_seed(spec.seed, 0x5eedull));
    const auto dir = detail::ensure_outdir(cfg);

    std::ostringstream csv;
    write_dataset_csv(s, csv);
    detail::write_file(dir / "dataset.csv", csv.str());

    std::ostringstream side;
    side << "{\n";
    side << "  \"generator\": \"" << detail::json_escape(s.provenance.generator) << "\",\n";
    side << "  \"n\": " << s.n << ",\n";
    side << "  \"m\": " << s.size() << ",\n";
    side << "  \"r\": " << detail::format_double(s.provenance.r) << ",\n";
    side << "  \"seed\": " << s.provenance.seed << ",\n";
    side << "  \"sigma\": " << detail::format_double(s.provenance.sigma) << ",\n";
    side << "  \"smooth_seed\": " << s.provenance.smooth_seed << ",\n";
    side << "  \"sampler\": \"" << detail::json_escape(s.provenance.sampler) << "\"";
    if (spec.kind == GeneratorSpec::Kind::gaussian_mixture) {
        side << ",\n  \"spread\": " << detail::format_double(spec.spread) << ",\n  \"centers\": [";
        for (std::size_t i = 0; i < spec.centers.size(); ++i) {
            side << (i ? "," : "");
            detail::json_vector(side, spec.centers[i]);
        }
        side << "]";
    }
    if (spec.kind == GeneratorSpec::Kind::line_segment) side << ",\n  \"axis\": " << spec.axis;
    if (spec.kind == GeneratorSpec::Kind::file) side << ",\n  \"path\": \"" << detail::json_escape(spec.path) << "\"";
    side << "\n}\n";
    detail::write_file(dir / "dataset.json", side.str());
}

// Writes mechanism.json and report.json; wall time goes to stderr so outputs
// stay byte-identical across reruns.
inline void cmd_design(const RunConfig& cfg, const std::string& dataset_path) {
    const SampleSet s = load_dataset(dataset_path);
    const QualityFunction& f = cfg.need_quality();
    const Projection& p = cfg.need_projection();
    if (s.n != p.n) throw data_error("dataset dimension " + std::to_string(s.n) + " does not match projection");
    const CostModel cm = cfg.cost();
    const double r = cfg.population.r > 0.0 ? cfg.population.r : s.r;
    const auto dir = detail::ensure_outdir(cfg);
    const auto t0 = std::chrono::steady_clock::now();

    std::ostringstream mech, rep;
    rep << "{\n  \"method\": \"" << detail::json_escape(cfg.design.method) << "\",\n";
    if (cfg.design.method == "linear") {
        const LinearMechanism g = optimal_linear(p, f, cfg.design.R);
        write_mechanism_json(mech, g);
        const LinearRegime regime = linear_regime(g, cm);
        rep << "  \"gain\": " << detail::format_double(0.0) << ",\n";
        rep << "  \"regime\": \"" << regime_name(regime) << "\",\n";
        rep << "  \"oracle_calls\": 0,\n  \"epsilon_prime\": 0,\n";
        rep << "  \"candidates_total\": 0,\n  \"candidates_truncated\": false,\n  \"candidates\": [],\n";
    } else if (cfg.design.method == "bruteforce") {
        const auto [g, gain] = bruteforce_opt(s, p, f, cm, cfg.design.direction_grid, cfg.design.bias_grid);
        write_mechanism_json(mech, g);
        rep << "  \"gain\": " << detail::format_double(gain) << ",\n";
        rep << "  \"oracle_calls\": 0,\n  \"epsilon_prime\": 0,\n";
        rep << "  \"candidates_total\": 0,\n  \"candidates_truncated\": false,\n  \"candidates\": [],\n";
    } else if (cfg.design.method == "threshold_baseline" || cfg.design.method == "threshold_alg1") {
        const DesignReport drep =
            cfg.design.method == "threshold_baseline"
                ? baseline_4rc(s, p, f, cm, r)
                : algorithm1(s, p, f, cm, cfg.smoothing.sigma, r, cfg.design.eps, cfg.design.angular_steps);
        write_mechanism_json(mech, drep.chosen);
        rep << "  \"gain\": " << detail::format_double(drep.gain) << ",\n";
        rep << "  \"oracle_calls\": " << drep.oracle_calls << ",\n";
        rep << "  \"epsilon_prime\": " << detail::format_double(drep.epsilon_prime) << ",\n";
        detail::report_candidates(rep, drep.candidates);
        rep << ",\n";
    } else {
        throw config_error("config: design.method must be one of linear, threshold_baseline, threshold_alg1, bruteforce");
    }
    rep << "  \"timing\": null\n}\n";

    detail::write_file(dir / "mechanism.json", mech.str());
    detail::write_file(dir / "report.json", rep.str());
    const auto t1 = std::chrono::steady_clock::now();
    std::cerr << "design: " << std::chrono::duration<double>(t1 - t0).count() << " s\n";
}

// Writes eval.json with the simulated value, baseline, gain, and Monte Carlo
// standard error. Unbounded linear regimes flag instead of reporting numbers.
inline void cmd_eval(const RunConfig& cfg, const std::string& mechanism_path, const std::string& dataset_path) {
    const MechanismFile mf = read_mechanism_json(mechanism_path);
    const SampleSet s = load_dataset(dataset_path);
    const QualityFunction& f = cfg.need_quality();
    if (s.n != mf.w.size()) throw data_error("dataset dimension does not match mechanism direction");
    if (s.n != f.w.size()) throw data_error("dataset dimension does not match quality direction");
    const CostModel cm = cfg.cost();
    const auto dir = detail::ensure_outdir(cfg);

    std::ostringstream out;
    out << "{\n";
    if (mf.is_linear) {
        const GainReport rep = val(mf.linear(), s, f, cm);
        out << "  \"val\": " << (rep.unbounded_flag ? "null" : detail::format_double(rep.val)) << ",\n";
        out << "  \"baseline\": " << detail::format_double(rep.baseline) << ",\n";
        out << "  \"gain\": " << (rep.unbounded_flag ? "null" : detail::format_double(rep.gain)) << ",\n";
        out << "  \"se\": " << detail::format_double(0.0) << ",\n";
        out << "  \"unbounded_flag\": " << (rep.unbounded_flag ? "true" : "false") << ",\n";
    } else {
        const ThresholdMechanism g = mf.threshold();
        const GainReport rep = val(g, s, f, cm);
        const double se = gain_standard_error(g, s, f, cm);
        out << "  \"val\": " << detail::format_double(rep.val) << ",\n";
        out << "  \"baseline\": " << detail::format_double(rep.baseline) << ",\n";
        out << "  \"gain\": " << detail::format_double(rep.gain) << ",\n";
        out << "  \"se\": " << detail::format_double(se) << ",\n";
        out << "  \"unbounded_flag\": false,\n";
    }
    out << "  \"m\": " << s.size() << "\n}\n";
    detail::write_file(dir / "eval.json", out.str());
}

// Writes sweep.csv (all rows) and sweep_median.csv (median gap per m).
inline void cmd_sweep(const RunConfig& cfg) {
    if (cfg.sweep.m_list.empty()) throw config_error("config: sweep.m_list must be non-empty");
    DesignMethod method;
    if (cfg.sweep.method == "threshold_alg1")
        method = DesignMethod::threshold_alg1;
    else if (cfg.sweep.method == "threshold_baseline")
        method = DesignMethod::threshold_baseline;
    else
        throw config_error("config: sweep.method must be threshold_alg1 or threshold_baseline");

    SweepParams par;
    par.m_list = cfg.sweep.m_list;
    par.trials = cfg.sweep.trials;
    par.holdout_m = cfg.sweep.holdout_m;
    par.method = method;
    par.sigma = cfg.smoothing.sigma;
    par.r = cfg.population.r;
    par.eps = cfg.sweep.eps;
    par.angular_steps = cfg.design.angular_steps;
    par.seed = cfg.seed;

    const SweepResult res = convergence_sweep(cfg.resolved_population(), cfg.smoothing, cfg.need_projection(),
                                              cfg.need_quality(), cfg.cost(), par);
    const auto dir = detail::ensure_outdir(cfg);
    std::ostringstream rows, med;
    write_sweep_csv(res, rows);
    write_median_csv(res, med);
    detail::write_file(dir / "sweep.csv", rows.str());
    detail::write_file(dir / "sweep_median.csv", med.str());
}

// Smoothness and closed-form spot checks; returns true iff everything passed.
// Band bounds need sigma > 0 and are skipped (and marked skipped) otherwise.
inline bool cmd_verify(const RunConfig& cfg, const std::string& dataset_path) {
    const SampleSet s = load_dataset(dataset_path);
    const double sigma = cfg.smoothing.sigma;
    const double r = cfg.population.r > 0.0 ? cfg.population.r : s.r;
    const auto dir = detail::ensure_outdir(cfg);
    detail::Rng rng(detail::derive_seed(cfg.seed, 0xc4ecull));
    bool all_pass = true;

    std::ostringstream out;
    out << "{\n  \"sigma\": " << detail::format_double(sigma) << ",\n";
    if (sigma > 0.0) {
        out << "  \"band_status\": \"checked\",\n  \"bands\": [";
        for (std::size_t i = 0; i < cfg.verify.bands; ++i) {
            FeatureVector w(s.n);
            double n2 = 0.0;
            do {
                n2 = 0.0;
                for (double& v : w) {
                    v = rng.normal();
                    n2 += v * v;
                }
            } while (n2 < 1e-12);
            const double inv = 1.0 / std::sqrt(n2);
            for (double& v : w) v *= inv;
            const double center = rng.uniform(-r, r);
            const double width = rng.uniform(0.1 * sigma, 3.0 * sigma);
            const BandCheck chk = verify_band_bound(s, w, center - 0.5 * width, center + 0.5 * width, sigma);
            all_pass = all_pass && chk.pass;
            out << (i ? ",\n    " : "\n    ") << "{\"empirical\": " << detail::format_double(chk.empirical)
                << ", \"bound\": " << detail::format_double(chk.bound) << ", \"pass\": "
                << (chk.pass ? "true" : "false") << '}';
        }
        out << "\n  ],\n";
        out << "  \"tails\": [";
        for (std::size_t i = 0; i < cfg.verify.eps_list.size(); ++i) {
            const TailCheck chk = verify_tail_bound(s, r, sigma, cfg.verify.eps_list[i]);
            all_pass = all_pass && chk.pass;
            out << (i ? ",\n    " : "\n    ") << "{\"eps\": " << detail::format_double(cfg.verify.eps_list[i])
                << ", \"H\": " << detail::format_double(chk.H) << ", \"empirical\": "
                << detail::format_double(chk.empirical) << ", \"pass\": " << (chk.pass ? "true" : "false") << '}';
        }
        out << "\n  ],\n";
    } else {
        out << "  \"band_status\": \"skipped: sigma=0\",\n  \"bands\": [],\n  \"tails\": [],\n";
    }

    // simulated gain against the closed form on random threshold mechanisms;
    // the identity is specific to identity-transform quality
    const QualityFunction& f = cfg.need_quality();
    if (f.w.size() != s.n) throw data_error("dataset dimension does not match quality direction");
    const CostModel cm = cfg.cost();
    const std::size_t cf_checks = f.transform == Transform::identity ? cfg.verify.closed_form_checks : 0;
    if (f.transform != Transform::identity)
        out << "  \"closed_form_status\": \"skipped: non-identity quality\",\n";
    out << "  \"closed_form\": [";
    for (std::size_t i = 0; i < cf_checks; ++i) {
        FeatureVector w(s.n);
        double n2 = 0.0;
        do {
            n2 = 0.0;
            for (double& v : w) {
                v = rng.normal();
                n2 += v * v;
            }
        } while (n2 < 1e-12);
        const double inv = 1.0 / std::sqrt(n2);
        for (double& v : w) v *= inv;
        const ThresholdMechanism g(w, rng.uniform(-r, r));
        const double sim = val(g, s, f, cm).gain;
        const double closed = gain_closed_form(g, s, f, cm);
        const bool pass = std::abs(sim - closed) <= 1e-9;
        all_pass = all_pass && pass;
        out << (i ? ",\n    " : "\n    ") << "{\"sim\": " << detail::format_double(sim)
            << ", \"closed\": " << detail::format_double(closed) << ", \"pass\": " << (pass ? "true" : "false")
            << '}';
    }
    out << (cf_checks ? "\n  ],\n" : "],\n");
    out << "  \"all_pass\": " << (all_pass ? "true" : "false") << "\n}\n";
    detail::write_file(dir / "verify.json", out.str());
    return all_pass;
}

}  // namespace stratmech
