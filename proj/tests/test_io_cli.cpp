#include "doctest.h"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "firefront/cli.hpp"
#include "firefront/io.hpp"

using namespace firefront;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("firefront_test_" + std::to_string(Rng(std::random_device{}()).next_u64()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("snapshot round trip") {
    TempDir tmp;
    GridSpec g{0, 1, 0, 1, 7, 5, 0, 1, 3};
    ScalarField u(g);
    Rng rng(4);
    for (double& v : u.values) v = rng.normal(0.0, 2.0);
    write_snapshot(tmp.path / "s.txt", u, 0.375);
    const Snapshot back = read_snapshot(tmp.path / "s.txt");
    CHECK(back.t == 0.375);
    CHECK(back.field.spec.n_x == 7);
    CHECK(back.field.spec.n_y == 5);
    CHECK(back.field.values == u.values);  // %.17g round-trips doubles
}

TEST_CASE("isochrone CSV") {
    TempDir tmp;
    SUBCASE("grouping by timestamp") {
        std::ofstream out(tmp.path / "iso.csv");
        out << "t,x,y\n0.5,0.1,0.2\n0.25,0.3,0.4\n0.5,0.5,0.6\n";
        out.close();
        const IsochroneSet set = load_isochrones(tmp.path / "iso.csv");
        REQUIRE(set.groups.size() == 2);
        CHECK(set.groups[0].t == 0.25);  // sorted by time
        CHECK(set.groups[1].t == 0.5);
        CHECK(set.groups[1].points.size() == 2);
        CHECK(set.total_points() == 3);
    }
    SUBCASE("header-only file is an empty set") {
        std::ofstream(tmp.path / "empty.csv") << "t,x,y\n";
        CHECK(load_isochrones(tmp.path / "empty.csv").groups.empty());
    }
    SUBCASE("malformed rows name the line") {
        std::ofstream(tmp.path / "bad.csv") << "t,x,y\n0.5,oops,0.2\n";
        try {
            load_isochrones(tmp.path / "bad.csv");
            FAIL("expected IoError");
        } catch (const IoError& e) {
            CHECK(std::string(e.what()).find("line 2") != std::string::npos);
        }
    }
    SUBCASE("missing header is rejected") {
        std::ofstream(tmp.path / "nohdr.csv") << "0.5,0.1,0.2\n";
        CHECK_THROWS_AS(load_isochrones(tmp.path / "nohdr.csv"), IoError);
    }
    SUBCASE("comments and blank lines are skipped") {
        std::ofstream(tmp.path / "c.csv") << "t,x,y\n# front 0\n0.5,0.1,0.2\n\n0.5,0.2,0.3\n";
        CHECK(load_isochrones(tmp.path / "c.csv").total_points() == 2);
    }
}

TEST_CASE("fronts file feeds back into the isochrone loader") {
    TempDir tmp;
    GridSpec g{0, 1, 0, 1, 15, 15, 0, 1, 2};
    const ScalarField u = sdf_field(g, SdfSpec{SdfVariant::Cone, 0.2, 1, 1, 0, 0.5, 0.5});
    std::vector<std::vector<Polyline>> fronts = {extract_zero_level_set(u),
                                                 extract_zero_level_set(u),
                                                 extract_zero_level_set(u)};
    write_fronts_csv(tmp.path / "fronts.csv", {0.0, 0.5, 1.0}, fronts);
    const IsochroneSet set = load_isochrones(tmp.path / "fronts.csv");
    REQUIRE(set.groups.size() == 3);
    CHECK(set.groups[0].points.size() == fronts[0][0].pts.size());
}

TEST_CASE("checkpoint round trip is bit exact") {
    TempDir tmp;
    NetworkParams p = init_params(NetworkShape{9, 7, Activation::Relu}, 77);
    Rng rng(5);
    for (double& b : p.b1()) b = rng.normal();
    p.data[3] = 0x1.fffffffffffffp-3;  // awkward values
    p.data[4] = -0.0;
    p.data[5] = 1e-308;
    write_checkpoint(tmp.path / "c.ckpt", p);
    const NetworkParams back = read_checkpoint(tmp.path / "c.ckpt");
    CHECK(back.shape.h1 == 9);
    CHECK(back.shape.h2 == 7);
    CHECK(back.shape.activation == Activation::Relu);
    REQUIRE(back.data.size() == p.data.size());
    for (std::size_t k = 0; k < p.data.size(); ++k) {
        // bitwise comparison, -0.0 included
        CHECK(std::memcmp(&back.data[k], &p.data[k], sizeof(double)) == 0);
    }
    CHECK(!is_variational_checkpoint(tmp.path / "c.ckpt"));
}

TEST_CASE("variational checkpoint round trip") {
    TempDir tmp;
    VariationalParams phi(NetworkShape{5, 4, Activation::Tanh}, -3.0);
    Rng rng(6);
    for (double& v : phi.mu) v = rng.normal();
    for (double& v : phi.rho) v = rng.uniform(-4.0, 0.0);
    PriorConfig prior;
    prior.mix = 0.25;
    write_vcheckpoint(tmp.path / "c.vckpt", phi, prior);
    const VariationalCheckpoint back = read_vcheckpoint(tmp.path / "c.vckpt");
    CHECK(back.phi.mu == phi.mu);
    CHECK(back.phi.rho == phi.rho);
    CHECK(back.prior.sigma1 == prior.sigma1);
    CHECK(back.prior.sigma2 == prior.sigma2);
    CHECK(back.prior.mix == 0.25);
    CHECK(is_variational_checkpoint(tmp.path / "c.vckpt"));
    CHECK_THROWS_AS(read_checkpoint(tmp.path / "c.vckpt"), IoError);
}

TEST_CASE("experiment config round trip") {
    const Preset p = preset_config("synthetic2");
    ExperimentConfig cfg;
    cfg.grid = p.grid;
    cfg.scenario.kind = "synthetic2";
    cfg.scenario.seed = 9;
    cfg.sdf = p.sdf;
    cfg.reinit = p.reinit;
    cfg.train = p.train;
    cfg.oversample = p.oversample;
    ObservationConfig oc;
    oc.from_simulation = "ref";
    oc.times = {0.25, 0.5};
    oc.per_time = 17;
    oc.jitter = 0.001;
    oc.seed = 3;
    cfg.observations = oc;

    const nlohmann::json j1 = to_json(cfg);
    const ExperimentConfig back = config_from_json(j1);
    const nlohmann::json j2 = to_json(back);
    CHECK(j1 == j2);

    SUBCASE("custom scenarios round trip too") {
        ExperimentConfig c2 = cfg;
        c2.scenario.kind = "custom";
        c2.scenario.speed = {SpeedKind::XSplit, 0.0, 0.25, 0.15, 0.5};
        c2.scenario.wind.kind = WindKind::StepChange;
        c2.scenario.wind.wx0 = 0.0;
        c2.scenario.wind.wy0 = 0.4;
        c2.scenario.wind.wx1 = 0.4;
        c2.scenario.wind.wy1 = 0.0;
        c2.scenario.wind.t_change = 0.1;
        c2.scenario.obstructions = {{0.0, 0.2, 0.2, 0.8}};
        c2.observations.reset();
        c2.train.model.variant = Variant::PinnF;
        const nlohmann::json a = to_json(c2);
        CHECK(a == to_json(config_from_json(a)));
    }
}

TEST_CASE("config validation") {
    const Preset p = preset_config("synthetic");
    ExperimentConfig cfg;
    cfg.grid = p.grid;
    cfg.scenario.kind = "synthetic";
    cfg.sdf = p.sdf;
    cfg.train = p.train;
    cfg.oversample = p.oversample;
    cfg.validate();

    SUBCASE("bad grid") {
        cfg.grid.n_x = 0;
        CHECK_THROWS_AS(cfg.validate(), ConfigError);
    }
    SUBCASE("pinn_a needs observations") {
        cfg.train.model.variant = Variant::PinnA;
        CHECK_THROWS_AS(cfg.validate(), ConfigError);
        ObservationConfig oc;
        oc.file = "iso.csv";
        cfg.observations = oc;
        cfg.validate();
    }
}

TEST_CASE("build_forcing honours custom scenarios") {
    GridSpec g{0, 1, 0, 1, 10, 10, 0, 1, 8};
    ScenarioConfig sc;
    sc.kind = "custom";
    sc.speed = {SpeedKind::Constant, 0.3, 0.0, 0.0, 0.0};
    sc.wind.kind = WindKind::RandomWalk;
    sc.wind.walk_seed = 77;
    sc.obstructions = {{0.4, 0.6, 0.4, 0.6}};
    const ForcingField f = build_forcing(sc, g);
    CHECK(f(0.0, 0.5, 0.5).s == 0.0);  // obstructed
    CHECK(f(0.0, 0.1, 0.1).s == 0.3);
    CHECK(f(0.0, 0.1, 0.1).wx == doctest::Approx(1e-6));
    // the walk table covers every time level
    CHECK(f.wind.walk.size() == 9);
}

TEST_CASE("sample_observations") {
    IsochroneSet full;
    for (int g = 0; g < 4; ++g) {
        IsochroneSet::Group grp;
        grp.t = 0.25 * (g + 1);
        for (int k = 0; k < 100; ++k)
            grp.points.push_back({0.01 * k, 0.5});
        full.groups.push_back(grp);
    }
    SUBCASE("even subsampling without jitter") {
        const IsochroneSet s = cli::sample_observations(full, {0.5, 1.0}, 10, 0.0, 1, 0.01);
        REQUIRE(s.groups.size() == 2);
        CHECK(s.groups[0].t == 0.5);
        CHECK(s.groups[0].points.size() == 10);
        CHECK(s.groups[0].points[0][0] == 0.0);
        CHECK(s.groups[0].points[1][0] == doctest::Approx(0.10));
    }
    SUBCASE("requested time too far from any front") {
        CHECK_THROWS_AS(cli::sample_observations(full, {0.37}, 10, 0.0, 1, 0.01),
                        ConfigError);
    }
    SUBCASE("jitter is deterministic per seed") {
        const IsochroneSet a = cli::sample_observations(full, {0.5}, 5, 0.01, 9, 0.01);
        const IsochroneSet b = cli::sample_observations(full, {0.5}, 5, 0.01, 9, 0.01);
        CHECK(a.groups[0].points == b.groups[0].points);
    }
}

TEST_CASE("observation_batch validates bounds and attaches forcing") {
    GridSpec g{0, 1, 0, 1, 10, 10, 0, 1, 4};
    const ForcingField f = build_scenario("synthetic", g, 1);
    IsochroneSet iso;
    iso.groups.push_back({0.5, {{0.6, 0.7}}});
    const SampleBatch b = cli::observation_batch(iso, f, g);
    REQUIRE(b.n() == 1);
    CHECK(b.row(0)[0] == 0.5);
    CHECK(b.row(0)[3] == 0.4);
    CHECK(b.row(0)[4] == 0.4);  // easterly wind after the change

    IsochroneSet outside;
    outside.groups.push_back({0.5, {{1.5, 0.5}}});
    CHECK_THROWS_AS(cli::observation_batch(outside, f, g), ConfigError);
}

TEST_CASE("pgm heatmap export") {
    TempDir tmp;
    GridSpec g{0, 1, 0, 1, 6, 4, 0, 1, 1};
    ScalarField u(g);
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 4; ++j) u.at(i, j) = i - 2.5;
    write_pgm(tmp.path / "u.pgm", u);
    std::ifstream in(tmp.path / "u.pgm", std::ios::binary);
    std::string magic, dims;
    std::getline(in, magic);
    std::getline(in, dims);
    CHECK(magic == "P5");
    CHECK(dims == "6 4");
    std::string depth;
    std::getline(in, depth);
    CHECK(depth == "255");
    std::vector<unsigned char> px(24);
    in.read(reinterpret_cast<char*>(px.data()), 24);
    CHECK(in.gcount() == 24);
    CHECK(px[0] == 0);     // leftmost column is the minimum
    CHECK(px[5] == 255);   // rightmost is the maximum
}

TEST_CASE("metrics csv layout") {
    TempDir tmp;
    std::vector<MetricsRow> rows(2);
    rows[0].t = 0.0;
    rows[0].jaccard_pinn_vs_lsm = 1.0;
    rows[1].t = 0.5;
    rows[1].jaccard_pinn_vs_lsm = 0.75;
    rows[1].coverage = 0.9;
    write_metrics_csv(tmp.path / "m.csv", rows);
    const std::string text = slurp(tmp.path / "m.csv");
    CHECK(text ==
          "t,jaccard_pinn_vs_lsm,jaccard_pinn_vs_truth,jaccard_lsm_vs_truth,coverage\n"
          "0,1,,,\n"
          "0.5,0.75,,,0.90000000000000002\n");
}

TEST_CASE("simulate and evaluate through the command layer") {
    TempDir tmp;
    const Preset p = preset_config("synthetic");
    ExperimentConfig cfg;
    cfg.grid = p.grid;
    cfg.grid.n_t = 6;  // keep the unit test quick
    cfg.scenario.kind = "synthetic";
    cfg.sdf = p.sdf;
    cfg.train = p.train;
    cfg.oversample = 16;

    cli::simulate_lsm(cfg, tmp.path / "run", false);
    CHECK(fs::exists(tmp.path / "run" / "snap_006.txt"));
    CHECK(fs::exists(tmp.path / "run" / "fronts.csv"));
    CHECK(fs::exists(tmp.path / "run" / "manifest.json"));
    CHECK(!fs::exists(tmp.path / "run" / "snap_007.txt"));

    SUBCASE("existing output needs --force") {
        CHECK_THROWS_AS(cli::simulate_lsm(cfg, tmp.path / "run", false), ConfigError);
        cli::simulate_lsm(cfg, tmp.path / "run", true);
    }
    SUBCASE("byte-identical rerun") {
        cli::simulate_lsm(cfg, tmp.path / "run2", false);
        for (int n = 0; n <= 6; ++n)
            CHECK(slurp(tmp.path / "run" / snapshot_name(n)) ==
                  slurp(tmp.path / "run2" / snapshot_name(n)));
        CHECK(slurp(tmp.path / "run" / "fronts.csv") ==
              slurp(tmp.path / "run2" / "fronts.csv"));
        CHECK(slurp(tmp.path / "run" / "manifest.json") ==
              slurp(tmp.path / "run2" / "manifest.json"));
    }
    SUBCASE("self evaluation gives unit jaccard") {
        cli::evaluate(cfg, tmp.path / "run", tmp.path / "run", "", "",
                      tmp.path / "metrics.csv");
        std::ifstream in(tmp.path / "metrics.csv");
        std::string header, line;
        std::getline(in, header);
        int rows = 0;
        while (std::getline(in, line)) {
            ++rows;
            CHECK(line.find(",1,,,") != std::string::npos);
        }
        CHECK(rows == 7);
    }
    SUBCASE("grid mismatch is a config error") {
        ExperimentConfig other = cfg;
        other.grid.n_t = 5;
        CHECK_THROWS_AS(
            cli::evaluate(other, tmp.path / "run", tmp.path / "run", "", "", tmp.path / "m.csv"),
            ConfigError);
    }
    SUBCASE("missing reference is an io error") {
        CHECK_THROWS_AS(cli::evaluate(cfg, tmp.path / "run", tmp.path / "nope", "", "",
                                      tmp.path / "m.csv"),
                        IoError);
    }
}

TEST_CASE("exit code mapping") {
    CHECK(cli::run_guarded([] {}) == 0);
    CHECK(cli::run_guarded([] { throw ConfigError("x"); }) == 1);
    CHECK(cli::run_guarded([] { throw DivergedError("x"); }) == 2);
    CHECK(cli::run_guarded([] { throw IoError("x"); }) == 3);
}
