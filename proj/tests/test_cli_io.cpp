#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include <json.hpp>

#include "stratmech/stratmech.hpp"

using namespace stratmech;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path p;
    explicit TempDir(const std::string& tag) : p(fs::temp_directory_path() / ("stratmech_io_" + tag)) {
        fs::remove_all(p);
        fs::create_directories(p);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(p, ec);
    }
    std::string str(const std::string& name) const { return (p / name).string(); }
};

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    REQUIRE(out.good());
    out << text;
}

std::size_t line_count(const std::string& text) {
    return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

void config_fails_with(const std::string& text, const std::string& needle) {
    try {
        parse_config(text, "cfg");
        FAIL("expected config_error for: " << text);
    } catch (const config_error& e) {
        const std::string what = e.what();
        INFO(what);
        CHECK(what.find(needle) != std::string::npos);
    }
}

}  // namespace

TEST_CASE("config parser fills every section") {
    const std::string text = R"({
      "seed": 99,
      "output_dir": "somewhere",
      "population": {"kind": "gaussian_mixture", "n": 3, "r": 2.0, "m": 120, "seed": 7,
                     "spread": 0.25, "centers": [[0.5, 0.0, 0.0], [-0.5, 0.1, 0.2]]},
      "smoothing": {"sigma": 0.4},
      "quality": {"w": [0.6, 0.8, 0.0], "b": 0.1, "transform": "logistic", "scale": 2.0},
      "projection": {"rows": [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]},
      "cost": {"c": 2.5},
      "design": {"method": "bruteforce", "eps": 0.2, "angular_steps": 128, "R": 1.5,
                 "direction_grid": 64, "bias_grid": 32},
      "sweep": {"m_list": [100, 200], "trials": 3, "holdout_m": 2000,
                "method": "threshold_baseline", "eps": 0.25},
      "verify": {"bands": 7, "eps_list": [0.5], "closed_form_checks": 4}
    })";
    const RunConfig cfg = parse_config(text, "full");

    CHECK(cfg.seed == 99);
    CHECK(cfg.output_dir == "somewhere");
    CHECK(cfg.population.kind == GeneratorSpec::Kind::gaussian_mixture);
    CHECK(cfg.population.n == 3);
    CHECK(cfg.population.r == 2.0);
    CHECK(cfg.m == 120);
    CHECK(cfg.population.spread == 0.25);
    REQUIRE(cfg.population.centers.size() == 2);
    CHECK(cfg.population.centers[1] == FeatureVector{-0.5, 0.1, 0.2});
    CHECK(cfg.population_seed_set);
    CHECK(cfg.resolved_population().seed == 7);
    CHECK(cfg.smoothing.sigma == 0.4);

    REQUIRE(cfg.quality.has_value());
    CHECK(cfg.quality->w == FeatureVector{0.6, 0.8, 0.0});
    CHECK(cfg.quality->b == 0.1);
    CHECK(cfg.quality->transform == Transform::logistic);
    CHECK(cfg.quality->scale == 2.0);

    REQUIRE(cfg.projection.has_value());
    CHECK(cfg.projection->n == 3);
    CHECK(cfg.projection->k == 2);
    CHECK(cfg.cost_c == 2.5);
    CHECK(cfg.cost().c == 2.5);

    CHECK(cfg.design.method == "bruteforce");
    CHECK(cfg.design.eps == 0.2);
    CHECK(cfg.design.angular_steps == 128);
    CHECK(cfg.design.R == 1.5);
    CHECK(cfg.design.direction_grid == 64);
    CHECK(cfg.design.bias_grid == 32);

    CHECK(cfg.sweep.m_list == std::vector<std::size_t>{100, 200});
    CHECK(cfg.sweep.trials == 3);
    CHECK(cfg.sweep.holdout_m == 2000);
    CHECK(cfg.sweep.method == "threshold_baseline");
    CHECK(cfg.sweep.eps == 0.25);

    CHECK(cfg.verify.bands == 7);
    CHECK(cfg.verify.eps_list == std::vector<double>{0.5});
    CHECK(cfg.verify.closed_form_checks == 4);
}

TEST_CASE("config defaults apply and missing sections fail on demand") {
    const RunConfig cfg = parse_config("{}", "empty");
    CHECK(cfg.seed == 0);
    CHECK(cfg.output_dir == ".");
    CHECK(cfg.m == 0);
    CHECK(cfg.smoothing.sigma == 0.0);
    CHECK(cfg.cost_c == 0.0);
    CHECK_FALSE(cfg.quality.has_value());
    CHECK_FALSE(cfg.projection.has_value());

    CHECK(cfg.design.method == "threshold_alg1");
    CHECK(cfg.design.eps == 0.05);
    CHECK(cfg.design.angular_steps == 4096);
    CHECK(cfg.design.R == 1.0);
    CHECK(cfg.design.direction_grid == 2048);
    CHECK(cfg.design.bias_grid == 4096);
    CHECK(cfg.sweep.trials == 10);
    CHECK(cfg.sweep.holdout_m == 0);
    CHECK(cfg.sweep.method == "threshold_alg1");
    CHECK(cfg.sweep.eps == 0.3);
    CHECK(cfg.verify.bands == 50);
    CHECK(cfg.verify.eps_list == std::vector<double>{0.1, 0.01, 0.001});
    CHECK(cfg.verify.closed_form_checks == 20);

    CHECK_THROWS_AS(cfg.need_quality(), config_error);
    CHECK_THROWS_AS(cfg.need_projection(), config_error);
    CHECK_THROWS_AS(cfg.cost(), config_error);

    // master seed feeds the population stream unless the population pins one
    CHECK(cfg.resolved_population().seed == detail::derive_seed(0, 0x9e1ull));
    RunConfig seeded = parse_config(R"({"seed": 42})", "seeded");
    CHECK(seeded.resolved_population().seed == detail::derive_seed(42, 0x9e1ull));
}

TEST_CASE("config errors name the offending field") {
    config_fails_with("{", "cfg");
    config_fails_with("[]", "top level must be an object");
    config_fails_with(R"({"population": {}})", "missing field 'kind'");
    config_fails_with(R"({"population": {"kind": "pancake"}})", "unknown kind 'pancake'");
    config_fails_with(R"({"population": {"kind": "uniform_ball", "r": 1.0}})", "missing field 'n'");
    config_fails_with(R"({"population": {"kind": "uniform_ball", "n": -2, "r": 1.0}})", "nonnegative integer");
    config_fails_with(R"({"population": {"kind": "file"}})", "missing field 'path'");
    config_fails_with(R"({"quality": {"w": [1.0, 0.0]}})", "missing field 'b'");
    config_fails_with(R"({"quality": {"w": [1.0, 1.0], "b": 0.0}})", "unit");
    config_fails_with(R"({"quality": {"w": [], "b": 0.0}})", "non-empty array");
    config_fails_with(R"({"quality": {"w": [1.0, 0.0], "b": 0.0, "transform": "step"}})", "unknown transform 'step'");
    config_fails_with(R"({"projection": {}})", "missing field 'rows'");
    config_fails_with(R"({"projection": {"rows": [[1.0, 0.5]]}})", "orthonormal");
    config_fails_with(R"({"cost": {}})", "missing field 'c'");
    config_fails_with(R"({"sweep": {"m_list": 5}})", "expected an array");
    config_fails_with(R"({"verify": {"bands": "lots"}})", "nonnegative integer");
}

TEST_CASE("gen writes the dataset and a faithful sidecar") {
    TempDir td("gen");
    std::ostringstream text;
    text << R"({"population": {"kind": "uniform_ball", "n": 2, "r": 1.0, "m": 3, "seed": 777},)"
         << R"( "output_dir": ")" << td.str("a") << R"("})";
    RunConfig cfg = parse_config(text.str(), "gen");
    cmd_gen(cfg);

    const std::string csv = read_file(td.p / "a" / "dataset.csv");
    CHECK(csv.rfind("x1,x2\n", 0) == 0);
    CHECK(line_count(csv) == 4);

    GeneratorSpec direct;
    direct.kind = GeneratorSpec::Kind::uniform_ball;
    direct.n = 2;
    direct.r = 1.0;
    direct.seed = 777;
    const SampleSet want = sample(direct, 3);
    std::ostringstream wantcsv;
    write_dataset_csv(want, wantcsv);
    CHECK(csv == wantcsv.str());

    const SampleSet got = load_dataset((td.p / "a" / "dataset.csv").string());
    REQUIRE(got.size() == 3);
    CHECK(got.n == 2);

    const nlohmann::json side = nlohmann::json::parse(read_file(td.p / "a" / "dataset.json"));
    CHECK(side["generator"] == "uniform_ball");
    CHECK(side["n"] == 2);
    CHECK(side["m"] == 3);
    CHECK(side["r"] == 1.0);
    CHECK(side["seed"] == 777);
    CHECK(side["sigma"] == 0.0);
    CHECK(side["sampler"] == want.provenance.sampler);

    cfg.output_dir = td.str("b");
    cmd_gen(cfg);
    CHECK(read_file(td.p / "b" / "dataset.csv") == csv);
    CHECK(read_file(td.p / "b" / "dataset.json") == read_file(td.p / "a" / "dataset.json"));
}

TEST_CASE("gen honours smoothing and the derived population seed") {
    TempDir td("gensmooth");
    std::ostringstream text;
    text << R"({"seed": 42, "population": {"kind": "uniform_ball", "n": 2, "r": 1.0, "m": 4},)"
         << R"( "smoothing": {"sigma": 0.25}, "output_dir": ")" << td.str("a") << R"("})";
    RunConfig cfg = parse_config(text.str(), "gen");
    cmd_gen(cfg);

    const nlohmann::json side = nlohmann::json::parse(read_file(td.p / "a" / "dataset.json"));
    const std::uint64_t pop_seed = detail::derive_seed(42, 0x9e1ull);
    CHECK(side["seed"] == pop_seed);
    CHECK(side["sigma"] == 0.25);
    CHECK(side["smooth_seed"] == detail::derive_seed(pop_seed, 0x5eedull));
    CHECK(side["sampler"] == std::string(detail::kSamplerName));

    RunConfig zero = cfg;
    zero.m = 0;
    CHECK_THROWS_AS(cmd_gen(zero), config_error);
}

TEST_CASE("gen records mixture geometry in the sidecar") {
    TempDir td("genmix");
    std::ostringstream text;
    text << R"({"population": {"kind": "gaussian_mixture", "n": 2, "r": 1.0, "m": 6, "seed": 8,)"
         << R"( "spread": 0.2, "centers": [[0.5, 0.0], [-0.25, 0.1]]},)"
         << R"( "output_dir": ")" << td.str("a") << R"("})";
    cmd_gen(parse_config(text.str(), "gen"));

    const nlohmann::json side = nlohmann::json::parse(read_file(td.p / "a" / "dataset.json"));
    CHECK(side["generator"] == "gaussian_mixture");
    CHECK(side["spread"] == 0.2);
    REQUIRE(side["centers"].size() == 2);
    CHECK(side["centers"][1][0] == -0.25);
    CHECK(side["centers"][1][1] == 0.1);
}

TEST_CASE("design linear writes the closed-form optimum") {
    TempDir td("deslin");
    std::ostringstream gen;
    gen << R"({"population": {"kind": "uniform_ball", "n": 3, "r": 1.0, "m": 5, "seed": 5},)"
        << R"( "output_dir": ")" << td.str("data") << R"("})";
    cmd_gen(parse_config(gen.str(), "gen"));

    const double a = std::sqrt(1.0 / 3.0);
    std::ostringstream body;
    body << R"({"population": {"kind": "uniform_ball", "n": 3, "r": 1.0},)"
         << R"( "quality": {"w": [)" << detail::format_double(a) << ',' << detail::format_double(a) << ','
         << detail::format_double(a) << R"(], "b": 0.0},)"
         << R"( "projection": {"rows": [[0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]},)"
         << R"( "cost": {"c": 10.0},)"
         << R"( "design": {"method": "linear", "R": 1.0},)"
         << R"( "output_dir": ")" << td.str("out") << R"("})";
    cmd_design(parse_config(body.str(), "design"), (td.p / "data" / "dataset.csv").string());

    const MechanismFile mf = read_mechanism_json((td.p / "out" / "mechanism.json").string());
    REQUIRE(mf.is_linear);
    REQUIRE(mf.w.size() == 3);
    CHECK(mf.w[0] == 0.0);
    CHECK(mf.w[1] == std::sqrt(0.5));
    CHECK(mf.w[2] == std::sqrt(0.5));
    CHECK(mf.b == 0.0);
    CHECK(mf.R == 1.0);
    CHECK(read_file(td.p / "out" / "mechanism.json").find("0.70710678118654757") != std::string::npos);

    const nlohmann::json rep = nlohmann::json::parse(read_file(td.p / "out" / "report.json"));
    CHECK(rep["method"] == "linear");
    CHECK(rep["regime"] == "inert");
    CHECK(rep["gain"] == 0.0);
    CHECK(rep["timing"].is_null());
}

TEST_CASE("design threshold reports match the library run byte for byte") {
    TempDir td("desalg");
    std::ostringstream gen;
    gen << R"({"population": {"kind": "gaussian_mixture", "n": 3, "r": 1.0, "m": 400, "seed": 24,)"
        << R"( "spread": 0.2, "centers": [[0.4, -0.1, 0.2], [-0.3, 0.3, -0.2]]},)"
        << R"( "smoothing": {"sigma": 0.3}, "output_dir": ")" << td.str("data") << R"("})";
    cmd_gen(parse_config(gen.str(), "gen"));
    const std::string data = (td.p / "data" / "dataset.csv").string();

    FeatureVector wf = {0.55, 0.6, 0.58};
    const double nrm = vec::norm(wf);
    for (double& v : wf) v /= nrm;
    std::ostringstream body;
    body << R"({"population": {"kind": "gaussian_mixture", "n": 3, "r": 1.0,)"
         << R"( "spread": 0.2, "centers": [[0.4, -0.1, 0.2], [-0.3, 0.3, -0.2]]},)"
         << R"( "smoothing": {"sigma": 0.3},)"
         << R"( "quality": {"w": [)" << detail::format_double(wf[0]) << ',' << detail::format_double(wf[1]) << ','
         << detail::format_double(wf[2]) << R"(], "b": 0.0},)"
         << R"( "projection": {"rows": [[0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]},)"
         << R"( "cost": {"c": 2.0},)"
         << R"( "design": {"method": "threshold_alg1", "eps": 0.35},)"
         << R"( "output_dir": ")" << td.str("out1") << R"("})";
    RunConfig cfg = parse_config(body.str(), "design");
    cmd_design(cfg, data);

    const SampleSet s = load_dataset(data);
    const QualityFunction f(wf, 0.0);
    const Projection p = Projection::coords(3, {1, 2});
    const DesignReport want = algorithm1(s, p, f, CostModel(2.0), 0.3, 1.0, 0.35, 4096);

    const MechanismFile mf = read_mechanism_json((td.p / "out1" / "mechanism.json").string());
    CHECK_FALSE(mf.is_linear);
    CHECK(mf.w == want.chosen.w);
    CHECK(mf.b == want.chosen.b);

    const nlohmann::json rep = nlohmann::json::parse(read_file(td.p / "out1" / "report.json"));
    CHECK(rep["method"] == "threshold_alg1");
    CHECK(rep["gain"].get<double>() == want.gain);
    CHECK(rep["oracle_calls"] == want.oracle_calls);
    CHECK(rep["oracle_calls"] == 1008);
    CHECK(rep["epsilon_prime"].get<double>() == want.epsilon_prime);
    CHECK(rep["candidates_total"] == want.candidates.size());
    CHECK(rep["candidates_truncated"] == true);
    REQUIRE(rep["candidates"].size() == 1000);
    CHECK(rep["candidates"][0]["gain"].get<double>() == want.candidates[0].gain);
    CHECK(rep["candidates"][0]["b"].get<double>() == want.candidates[0].b);
    CHECK(rep["timing"].is_null());

    cfg.output_dir = td.str("out2");
    cmd_design(cfg, data);
    CHECK(read_file(td.p / "out2" / "report.json") == read_file(td.p / "out1" / "report.json"));
    CHECK(read_file(td.p / "out2" / "mechanism.json") == read_file(td.p / "out1" / "mechanism.json"));
}

TEST_CASE("design validates method, dataset, and geometry") {
    TempDir td("deserr");
    std::ostringstream gen;
    gen << R"({"population": {"kind": "uniform_ball", "n": 2, "r": 1.0, "m": 10, "seed": 6},)"
        << R"( "output_dir": ")" << td.str("data") << R"("})";
    cmd_gen(parse_config(gen.str(), "gen"));
    const std::string data = (td.p / "data" / "dataset.csv").string();

    auto base = [&](const std::string& method, const std::string& proj_rows, const std::string& quality_w) {
        std::ostringstream body;
        body << R"({"population": {"kind": "uniform_ball", "n": 2, "r": 1.0},)"
             << R"( "quality": {"w": )" << quality_w << R"(, "b": 0.0},)"
             << R"( "projection": {"rows": )" << proj_rows << R"(},)"
             << R"( "cost": {"c": 2.0}, "design": {"method": ")" << method << R"("},)"
             << R"( "output_dir": ")" << td.str("out") << R"("})";
        return parse_config(body.str(), "design");
    };

    CHECK_THROWS_AS(cmd_design(base("nope", "[[1.0, 0.0]]", "[1.0, 0.0]"), data), config_error);
    CHECK_THROWS_AS(cmd_design(base("threshold_baseline", "[[1.0, 0.0]]", "[1.0, 0.0]"), td.str("nope.csv")),
                    data_error);
    // projection lives in 3 dimensions, dataset in 2
    CHECK_THROWS_AS(cmd_design(base("threshold_baseline", "[[0.0, 1.0, 0.0]]", "[0.0, 1.0, 0.0]"), data),
                    data_error);
    // quality direction orthogonal to the visible subspace
    CHECK_THROWS_AS(cmd_design(base("threshold_baseline", "[[0.0, 1.0]]", "[1.0, 0.0]"), data), degenerate_error);
}

TEST_CASE("eval reproduces the library gain report") {
    TempDir td("eval");
    std::ostringstream gen;
    gen << R"({"population": {"kind": "uniform_ball", "n": 2, "r": 1.0, "m": 50, "seed": 9},)"
        << R"( "output_dir": ")" << td.str("data") << R"("})";
    cmd_gen(parse_config(gen.str(), "gen"));
    const std::string data = (td.p / "data" / "dataset.csv").string();

    const ThresholdMechanism g({0.6, 0.8}, 0.1);
    {
        std::ofstream out(td.str("g.json"), std::ios::binary);
        write_mechanism_json(out, g);
    }
    std::ostringstream body;
    body << R"({"quality": {"w": [1.0, 0.0], "b": 0.0}, "cost": {"c": 2.0},)"
         << R"( "output_dir": ")" << td.str("out1") << R"("})";
    RunConfig cfg = parse_config(body.str(), "eval");
    cmd_eval(cfg, td.str("g.json"), data);

    const SampleSet s = load_dataset(data);
    const QualityFunction f({1.0, 0.0}, 0.0);
    const CostModel cm(2.0);
    const GainReport want = val(g, s, f, cm);

    const nlohmann::json ev = nlohmann::json::parse(read_file(td.p / "out1" / "eval.json"));
    CHECK(ev["val"].get<double>() == want.val);
    CHECK(ev["baseline"].get<double>() == want.baseline);
    CHECK(ev["gain"].get<double>() == want.gain);
    CHECK(ev["se"].get<double>() == gain_standard_error(g, s, f, cm));
    CHECK(ev["unbounded_flag"] == false);
    CHECK(ev["m"] == 50);

    // a threshold far from the data moves nobody
    const ThresholdMechanism far({0.6, 0.8}, 100.0);
    {
        std::ofstream out(td.str("far.json"), std::ios::binary);
        write_mechanism_json(out, far);
    }
    cfg.output_dir = td.str("out2");
    cmd_eval(cfg, td.str("far.json"), data);
    const nlohmann::json ev2 = nlohmann::json::parse(read_file(td.p / "out2" / "eval.json"));
    CHECK(ev2["gain"].get<double>() == 0.0);
    CHECK(ev2["val"].get<double>() == ev2["baseline"].get<double>());
}

TEST_CASE("eval flags the unbounded linear regime") {
    TempDir td("evallin");
    std::ostringstream gen;
    gen << R"({"population": {"kind": "uniform_ball", "n": 2, "r": 1.0, "m": 30, "seed": 12},)"
        << R"( "output_dir": ")" << td.str("data") << R"("})";
    cmd_gen(parse_config(gen.str(), "gen"));
    const std::string data = (td.p / "data" / "dataset.csv").string();

    const LinearMechanism g({0.6, 0.8}, 0.0, 1.0);
    {
        std::ofstream out(td.str("g.json"), std::ios::binary);
        write_mechanism_json(out, g);
    }

    std::ostringstream cheap;
    cheap << R"({"quality": {"w": [1.0, 0.0], "b": 0.0}, "cost": {"c": 0.5},)"
          << R"( "output_dir": ")" << td.str("out1") << R"("})";
    cmd_eval(parse_config(cheap.str(), "eval"), td.str("g.json"), data);
    const nlohmann::json ev = nlohmann::json::parse(read_file(td.p / "out1" / "eval.json"));
    CHECK(ev["val"].is_null());
    CHECK(ev["gain"].is_null());
    CHECK(ev["unbounded_flag"] == true);
    CHECK(ev["baseline"].is_number());

    std::ostringstream steep;
    steep << R"({"quality": {"w": [1.0, 0.0], "b": 0.0}, "cost": {"c": 2.0},)"
          << R"( "output_dir": ")" << td.str("out2") << R"("})";
    cmd_eval(parse_config(steep.str(), "eval"), td.str("g.json"), data);
    const nlohmann::json ev2 = nlohmann::json::parse(read_file(td.p / "out2" / "eval.json"));
    CHECK(ev2["unbounded_flag"] == false);
    CHECK(ev2["gain"].get<double>() == 0.0);
    CHECK(ev2["val"].get<double>() == ev2["baseline"].get<double>());

    // mechanism direction in 3 dimensions against a 2-dimensional dataset
    const LinearMechanism wide({0.6, 0.8, 0.0}, 0.0, 1.0);
    {
        std::ofstream out(td.str("wide.json"), std::ios::binary);
        write_mechanism_json(out, wide);
    }
    CHECK_THROWS_AS(cmd_eval(parse_config(steep.str(), "eval"), td.str("wide.json"), data), data_error);
}

TEST_CASE("mechanism files round trip and reject malformed input") {
    TempDir td("mech");

    const ThresholdMechanism g({0.6, -0.8}, -0.3);
    write_text(td.p / "t.json", [&] {
        std::ostringstream out;
        write_mechanism_json(out, g);
        return out.str();
    }());
    const MechanismFile t = read_mechanism_json(td.str("t.json"));
    CHECK_FALSE(t.is_linear);
    CHECK(t.w == g.w);
    CHECK(t.b == g.b);
    CHECK(t.threshold().w == g.w);

    const LinearMechanism lg({0.3, 0.4}, 0.25, 2.0);
    write_text(td.p / "l.json", [&] {
        std::ostringstream out;
        write_mechanism_json(out, lg);
        return out.str();
    }());
    const MechanismFile l = read_mechanism_json(td.str("l.json"));
    CHECK(l.is_linear);
    CHECK(l.w == lg.w);
    CHECK(l.b == lg.b);
    CHECK(l.R == lg.R);

    auto rejects = [&](const std::string& text, const std::string& needle) {
        write_text(td.p / "bad.json", text);
        try {
            read_mechanism_json(td.str("bad.json"));
            FAIL("expected data_error for: " << text);
        } catch (const data_error& e) {
            const std::string what = e.what();
            INFO(what);
            CHECK(what.find(needle) != std::string::npos);
        }
    };
    rejects("{}", "type must be");
    rejects("{{", "bad.json");
    rejects(R"({"type": "threshold"})", "missing direction w");
    rejects(R"({"type": "threshold", "w": [1.0, "x"], "b": 0.0})", "non-numeric entry in w");
    rejects(R"({"type": "threshold", "w": [1.0, 0.0]})", "missing bias b");
    rejects(R"({"type": "linear", "w": [0.5], "b": 0.0})", "linear needs cap R");
    CHECK_THROWS_AS(read_mechanism_json(td.str("absent.json")), data_error);
}

TEST_CASE("sweep emits deterministic row and median files") {
    TempDir td("sweep");
    std::ostringstream body;
    body << R"({"seed": 77,)"
         << R"( "population": {"kind": "gaussian_mixture", "n": 2, "r": 1.0,)"
         << R"( "spread": 0.15, "centers": [[0.3, 0.1], [-0.2, -0.3]]},)"
         << R"( "smoothing": {"sigma": 0.2},)"
         << R"( "quality": {"w": [0.8, 0.6], "b": 0.0},)"
         << R"( "projection": {"rows": [[1.0, 0.0], [0.0, 1.0]]},)"
         << R"( "cost": {"c": 2.0},)"
         << R"( "sweep": {"m_list": [40, 80], "trials": 2, "holdout_m": 800, "method": "threshold_baseline"},)"
         << R"( "output_dir": ")" << td.str("out1") << R"("})";
    RunConfig cfg = parse_config(body.str(), "sweep");
    cmd_sweep(cfg);

    const std::string rows = read_file(td.p / "out1" / "sweep.csv");
    const std::string med = read_file(td.p / "out1" / "sweep_median.csv");
    CHECK(rows.rfind("m,trial,empirical_gain,holdout_gain,gap\n", 0) == 0);
    CHECK(line_count(rows) == 5);
    CHECK(med.rfind("m,median_gap\n", 0) == 0);
    CHECK(line_count(med) == 3);

    SweepParams par;
    par.m_list = {40, 80};
    par.trials = 2;
    par.holdout_m = 800;
    par.method = DesignMethod::threshold_baseline;
    par.sigma = 0.2;
    par.r = 1.0;
    par.eps = cfg.sweep.eps;
    par.angular_steps = cfg.design.angular_steps;
    par.seed = 77;
    const SweepResult want = convergence_sweep(cfg.resolved_population(), cfg.smoothing, cfg.need_projection(),
                                               cfg.need_quality(), cfg.cost(), par);
    std::ostringstream wantrows, wantmed;
    write_sweep_csv(want, wantrows);
    write_median_csv(want, wantmed);
    CHECK(rows == wantrows.str());
    CHECK(med == wantmed.str());

    cfg.output_dir = td.str("out2");
    cmd_sweep(cfg);
    CHECK(read_file(td.p / "out2" / "sweep.csv") == rows);
    CHECK(read_file(td.p / "out2" / "sweep_median.csv") == med);

    RunConfig nolist = cfg;
    nolist.sweep.m_list.clear();
    CHECK_THROWS_AS(cmd_sweep(nolist), config_error);
    RunConfig badmethod = cfg;
    badmethod.sweep.method = "linear";
    CHECK_THROWS_AS(cmd_sweep(badmethod), config_error);
}

TEST_CASE("verify checks bands, tails, and the gain identity") {
    TempDir td("verify");
    std::ostringstream gen;
    gen << R"({"population": {"kind": "uniform_ball", "n": 2, "r": 1.0, "m": 4000, "seed": 31},)"
        << R"( "smoothing": {"sigma": 0.3}, "output_dir": ")" << td.str("data") << R"("})";
    cmd_gen(parse_config(gen.str(), "gen"));
    const std::string data = (td.p / "data" / "dataset.csv").string();

    std::ostringstream body;
    body << R"({"seed": 5, "population": {"kind": "uniform_ball", "n": 2, "r": 1.0},)"
         << R"( "smoothing": {"sigma": 0.3},)"
         << R"( "quality": {"w": [0.8, 0.6], "b": 0.0}, "cost": {"c": 2.0},)"
         << R"( "verify": {"bands": 10, "eps_list": [0.1, 0.5], "closed_form_checks": 5},)"
         << R"( "output_dir": ")" << td.str("out") << R"("})";
    RunConfig cfg = parse_config(body.str(), "verify");
    REQUIRE(cmd_verify(cfg, data));

    const nlohmann::json v = nlohmann::json::parse(read_file(td.p / "out" / "verify.json"));
    CHECK(v["sigma"] == 0.3);
    CHECK(v["band_status"] == "checked");
    REQUIRE(v["bands"].size() == 10);
    for (const auto& band : v["bands"]) {
        CHECK(band["pass"] == true);
        CHECK(band["empirical"].get<double>() <= band["bound"].get<double>());
    }
    REQUIRE(v["tails"].size() == 2);
    CHECK(v["tails"][0]["eps"] == 0.1);
    for (const auto& tail : v["tails"]) CHECK(tail["pass"] == true);
    REQUIRE(v["closed_form"].size() == 5);
    for (const auto& chk : v["closed_form"]) CHECK(chk["pass"] == true);
    CHECK(v["all_pass"] == true);
}

TEST_CASE("verify marks skipped sections and rejects bad data") {
    TempDir td("verifyskip");
    std::ostringstream gen;
    gen << R"({"population": {"kind": "uniform_ball", "n": 2, "r": 1.0, "m": 500, "seed": 32},)"
        << R"( "output_dir": ")" << td.str("data") << R"("})";
    cmd_gen(parse_config(gen.str(), "gen"));
    const std::string data = (td.p / "data" / "dataset.csv").string();

    std::ostringstream dry;
    dry << R"({"population": {"kind": "uniform_ball", "n": 2, "r": 1.0},)"
        << R"( "quality": {"w": [1.0, 0.0], "b": 0.0}, "cost": {"c": 2.0},)"
        << R"( "verify": {"bands": 3, "closed_form_checks": 4},)"
        << R"( "output_dir": ")" << td.str("out1") << R"("})";
    REQUIRE(cmd_verify(parse_config(dry.str(), "verify"), data));
    const nlohmann::json v1 = nlohmann::json::parse(read_file(td.p / "out1" / "verify.json"));
    CHECK(v1["band_status"] == "skipped: sigma=0");
    CHECK(v1["bands"].empty());
    CHECK(v1["tails"].empty());
    CHECK(v1["closed_form"].size() == 4);

    std::ostringstream sign;
    sign << R"({"population": {"kind": "uniform_ball", "n": 2, "r": 1.0},)"
         << R"( "quality": {"w": [1.0, 0.0], "b": 0.2, "transform": "sign"}, "cost": {"c": 2.0},)"
         << R"( "verify": {"bands": 3, "closed_form_checks": 4},)"
         << R"( "output_dir": ")" << td.str("out2") << R"("})";
    REQUIRE(cmd_verify(parse_config(sign.str(), "verify"), data));
    const nlohmann::json v2 = nlohmann::json::parse(read_file(td.p / "out2" / "verify.json"));
    CHECK(v2["closed_form_status"] == "skipped: non-identity quality");
    CHECK(v2["closed_form"].empty());
    CHECK(v2["all_pass"] == true);

    write_text(td.p / "nan.csv", "x1,x2\nnan,0.5\n");
    CHECK_THROWS_AS(cmd_verify(parse_config(dry.str(), "verify"), td.str("nan.csv")), data_error);
}

TEST_CASE("mech binary maps error classes to exit codes") {
    if (!fs::exists("./mech")) {
        WARN("./mech not present; run the suite from the build directory to cover process exit codes");
        return;
    }
    TempDir td("proc");
    auto run = [](const std::string& cmd) {
        const int rc = std::system((cmd + " >/dev/null 2>&1").c_str());
        return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    };

    write_text(td.p / "gen.json",
               R"({"population": {"kind": "uniform_ball", "n": 2, "r": 1.0, "m": 20, "seed": 3},)"
               R"( "output_dir": ")" + td.str("out") + R"("})");
    CHECK(run("./mech gen --config " + td.str("gen.json")) == 0);
    CHECK(fs::exists(td.p / "out" / "dataset.csv"));

    CHECK(run("./mech") == 1);
    CHECK(run("./mech gen --config " + td.str("missing.json")) == 1);
    write_text(td.p / "bad.json", R"({"population": {"kind": "nope"}})");
    CHECK(run("./mech gen --config " + td.str("bad.json")) == 1);

    write_text(td.p / "des.json",
               R"({"population": {"kind": "uniform_ball", "n": 2, "r": 1.0},)"
               R"( "quality": {"w": [1.0, 0.0], "b": 0.0},)"
               R"( "projection": {"rows": [[1.0, 0.0], [0.0, 1.0]]},)"
               R"( "cost": {"c": 2.0}, "design": {"method": "threshold_baseline"},)"
               R"( "output_dir": ")" + td.str("out") + R"("})");
    CHECK(run("./mech design --config " + td.str("des.json") + " --dataset " + td.str("nope.csv")) == 2);

    write_text(td.p / "deg.json",
               R"({"population": {"kind": "uniform_ball", "n": 2, "r": 1.0},)"
               R"( "quality": {"w": [1.0, 0.0], "b": 0.0},)"
               R"( "projection": {"rows": [[0.0, 1.0]]},)"
               R"( "cost": {"c": 2.0}, "design": {"method": "threshold_baseline"},)"
               R"( "output_dir": ")" + td.str("out") + R"("})");
    CHECK(run("./mech design --config " + td.str("deg.json") + " --dataset " +
              (td.p / "out" / "dataset.csv").string()) == 3);
}
