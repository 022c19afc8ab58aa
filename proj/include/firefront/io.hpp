#pragma once

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "firefront/bayes.hpp"
#include "firefront/errors.hpp"
#include "firefront/forcing.hpp"
#include "firefront/grid.hpp"
#include "firefront/levelset.hpp"
#include "firefront/metrics.hpp"
#include "firefront/net.hpp"
#include "firefront/pinn.hpp"
#include "firefront/sdf.hpp"
#include "firefront/train.hpp"

namespace firefront {

inline constexpr const char* kVersion = "0.1.0";

namespace iodet {

// shortest round-trip decimal form
inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// bit-exact hexadecimal form for checkpoints
inline std::string fmt_hex(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%a", v);
    return buf;
}

inline std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    return out;
}

inline std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    return in;
}

inline double parse_double(const std::string& tok, const std::string& where) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(tok, &pos);
        if (pos != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw IoError(where + ": cannot parse number '" + tok + "'");
    }
}

}  // namespace iodet

// ---------------------------------------------------------------------------
// grid snapshots: header "t n_x n_y x_min x_max y_min y_max", then n_x lines
// of n_y values (row-major with x as the row index)

inline void write_snapshot(const std::filesystem::path& path, const ScalarField& u, double t) {
    std::ofstream out = iodet::open_out(path);
    const GridSpec& g = u.spec;
    out << iodet::fmt(t) << ' ' << g.n_x << ' ' << g.n_y << ' ' << iodet::fmt(g.x_min) << ' '
        << iodet::fmt(g.x_max) << ' ' << iodet::fmt(g.y_min) << ' ' << iodet::fmt(g.y_max)
        << '\n';
    for (int i = 0; i < g.n_x; ++i) {
        for (int j = 0; j < g.n_y; ++j) {
            if (j) out << ' ';
            out << iodet::fmt(u.at(i, j));
        }
        out << '\n';
    }
}

struct Snapshot {
    double t = 0.0;
    ScalarField field;
};

inline Snapshot read_snapshot(const std::filesystem::path& path) {
    std::ifstream in = iodet::open_in(path);
    Snapshot snap;
    GridSpec g;
    if (!(in >> snap.t >> g.n_x >> g.n_y >> g.x_min >> g.x_max >> g.y_min >> g.y_max))
        throw IoError(path.string() + ": malformed snapshot header");
    if (g.n_x < 1 || g.n_y < 1) throw IoError(path.string() + ": bad grid shape");
    snap.field = ScalarField(g);
    for (int i = 0; i < g.n_x; ++i)
        for (int j = 0; j < g.n_y; ++j)
            if (!(in >> snap.field.at(i, j)))
                throw IoError(path.string() + ": truncated snapshot values");
    return snap;
}

// ---------------------------------------------------------------------------
// front polylines / isochrones: "t,x,y" CSV; blank lines separate polylines,
// '#' lines are comments

inline void write_fronts_csv(const std::filesystem::path& path,
                             const std::vector<double>& times,
                             const std::vector<std::vector<Polyline>>& fronts) {
    if (times.size() != fronts.size())
        throw ConfigError("write_fronts_csv: times and fronts disagree");
    std::ofstream out = iodet::open_out(path);
    out << "t,x,y\n";
    for (std::size_t n = 0; n < fronts.size(); ++n) {
        for (std::size_t p = 0; p < fronts[n].size(); ++p) {
            out << "# front " << n << ' ' << p << (fronts[n][p].closed ? " closed" : " open")
                << '\n';
            for (const auto& pt : fronts[n][p].pts)
                out << iodet::fmt(times[n]) << ',' << iodet::fmt(pt[0]) << ','
                    << iodet::fmt(pt[1]) << '\n';
            out << '\n';
        }
    }
}

inline IsochroneSet load_isochrones(const std::filesystem::path& path) {
    std::ifstream in = iodet::open_in(path);
    std::string line;
    long line_no = 0;
    bool header_seen = false;
    IsochroneSet set;
    std::vector<double> order;
    auto group_of = [&](double t) -> IsochroneSet::Group& {
        for (std::size_t k = 0; k < order.size(); ++k)
            if (order[k] == t) return set.groups[k];
        order.push_back(t);
        set.groups.push_back({t, {}});
        return set.groups.back();
    };
    while (std::getline(in, line)) {
        ++line_no;
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            std::string squashed;
            for (char c : line)
                if (c != ' ' && c != '\t') squashed += c;
            if (squashed != "t,x,y")
                throw IoError(path.string() + ": line " + std::to_string(line_no) +
                              ": expected header 't,x,y'");
            header_seen = true;
            continue;
        }
        std::stringstream ss(line);
        std::string tok;
        double vals[3];
        for (int f = 0; f < 3; ++f) {
            if (!std::getline(ss, tok, ','))
                throw IoError(path.string() + ": line " + std::to_string(line_no) +
                              ": expected 3 comma-separated values");
            vals[f] = iodet::parse_double(
                tok, path.string() + ": line " + std::to_string(line_no));
        }
        std::string extra;
        if (std::getline(ss, extra) && !extra.empty())
            throw IoError(path.string() + ": line " + std::to_string(line_no) +
                          ": trailing fields");
        group_of(vals[0]).points.push_back({vals[1], vals[2]});
    }
    if (!header_seen && line_no > 0)
        throw IoError(path.string() + ": missing 't,x,y' header");
    std::sort(set.groups.begin(), set.groups.end(),
              [](const auto& a, const auto& b) { return a.t < b.t; });
    return set;
}

// ---------------------------------------------------------------------------
// parameter checkpoints: text with hexadecimal floats, bit-exact round trip

inline void write_checkpoint(const std::filesystem::path& path, const NetworkParams& params) {
    std::ofstream out = iodet::open_out(path);
    out << "firefront checkpoint 1\n";
    out << "activation " << activation_name(params.shape.activation) << '\n';
    out << "dims 6 " << params.shape.h1 << ' ' << params.shape.h2 << " 1\n";
    out << "data\n";
    for (std::size_t k = 0; k < params.data.size(); ++k)
        out << iodet::fmt_hex(params.data[k]) << ((k + 1) % 8 == 0 ? '\n' : ' ');
    out << '\n';
}

namespace iodet {

inline NetworkShape read_checkpoint_header(std::ifstream& in, const std::string& where,
                                           const char* magic) {
    std::string line;
    if (!std::getline(in, line) || line != magic)
        throw IoError(where + ": not a " + magic + " file");
    std::string word, act;
    in >> word >> act;
    if (word != "activation") throw IoError(where + ": missing activation line");
    int d_in = 0, h1 = 0, h2 = 0, d_out = 0;
    in >> word >> d_in >> h1 >> h2 >> d_out;
    if (word != "dims" || d_in != 6 || d_out != 1 || h1 < 1 || h2 < 1)
        throw IoError(where + ": bad dims line");
    return NetworkShape{h1, h2, activation_from_name(act)};
}

// istream double extraction does not accept hexadecimal floats; strtod does
inline double read_float_token(std::ifstream& in, const std::string& where) {
    std::string tok;
    if (!(in >> tok)) throw IoError(where + ": truncated value block");
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end != tok.c_str() + tok.size())
        throw IoError(where + ": cannot parse value '" + tok + "'");
    return v;
}

inline void read_block(std::ifstream& in, const std::string& where, const char* tag,
                       std::vector<double>& out, std::size_t count) {
    std::string word;
    in >> word;
    if (word != tag) throw IoError(where + ": expected '" + tag + "' block");
    out.resize(count);
    for (std::size_t k = 0; k < count; ++k) out[k] = read_float_token(in, where);
}

}  // namespace iodet

inline NetworkParams read_checkpoint(const std::filesystem::path& path) {
    std::ifstream in = iodet::open_in(path);
    const NetworkShape shape =
        iodet::read_checkpoint_header(in, path.string(), "firefront checkpoint 1");
    NetworkParams params(shape);
    iodet::read_block(in, path.string(), "data", params.data, shape.param_count());
    return params;
}

inline void write_vcheckpoint(const std::filesystem::path& path, const VariationalParams& phi,
                              const PriorConfig& prior) {
    std::ofstream out = iodet::open_out(path);
    out << "firefront vcheckpoint 1\n";
    out << "activation " << activation_name(phi.shape.activation) << '\n';
    out << "dims 6 " << phi.shape.h1 << ' ' << phi.shape.h2 << " 1\n";
    out << "prior " << iodet::fmt_hex(prior.sigma1) << ' ' << iodet::fmt_hex(prior.sigma2)
        << ' ' << iodet::fmt_hex(prior.mix) << '\n';
    out << "mu\n";
    for (std::size_t k = 0; k < phi.mu.size(); ++k)
        out << iodet::fmt_hex(phi.mu[k]) << ((k + 1) % 8 == 0 ? '\n' : ' ');
    out << "\nrho\n";
    for (std::size_t k = 0; k < phi.rho.size(); ++k)
        out << iodet::fmt_hex(phi.rho[k]) << ((k + 1) % 8 == 0 ? '\n' : ' ');
    out << '\n';
}

struct VariationalCheckpoint {
    VariationalParams phi;
    PriorConfig prior;
};

inline VariationalCheckpoint read_vcheckpoint(const std::filesystem::path& path) {
    std::ifstream in = iodet::open_in(path);
    const NetworkShape shape =
        iodet::read_checkpoint_header(in, path.string(), "firefront vcheckpoint 1");
    VariationalCheckpoint ck;
    ck.phi.shape = shape;
    std::string word;
    in >> word;
    if (word != "prior") throw IoError(path.string() + ": expected 'prior' line");
    ck.prior.sigma1 = iodet::read_float_token(in, path.string());
    ck.prior.sigma2 = iodet::read_float_token(in, path.string());
    ck.prior.mix = iodet::read_float_token(in, path.string());
    iodet::read_block(in, path.string(), "mu", ck.phi.mu, shape.param_count());
    iodet::read_block(in, path.string(), "rho", ck.phi.rho, shape.param_count());
    return ck;
}

inline bool is_variational_checkpoint(const std::filesystem::path& path) {
    std::ifstream in = iodet::open_in(path);
    std::string line;
    std::getline(in, line);
    return line == "firefront vcheckpoint 1";
}

// ---------------------------------------------------------------------------
// training log

inline void write_train_log(const std::filesystem::path& path,
                            const std::vector<TrainLogRow>& rows, bool bayesian) {
    std::ofstream out = iodet::open_out(path);
    out << "epoch,total,initial,physics,forecast,observation";
    if (bayesian) out << ",neg_elbo,logq,logprior";
    out << '\n';
    for (const TrainLogRow& r : rows) {
        out << r.epoch << ',' << iodet::fmt(r.total) << ',' << iodet::fmt(r.initial) << ','
            << iodet::fmt(r.physics) << ',' << iodet::fmt(r.forecast) << ','
            << iodet::fmt(r.observation);
        if (bayesian)
            out << ',' << iodet::fmt(r.neg_elbo) << ',' << iodet::fmt(r.logq) << ','
                << iodet::fmt(r.logprior);
        out << '\n';
    }
}

// ---------------------------------------------------------------------------
// metrics report

struct MetricsRow {
    double t = 0.0;
    std::optional<double> jaccard_pinn_vs_lsm;
    std::optional<double> jaccard_pinn_vs_truth;
    std::optional<double> jaccard_lsm_vs_truth;
    std::optional<double> coverage;
};

inline void write_metrics_csv(const std::filesystem::path& path,
                              const std::vector<MetricsRow>& rows) {
    std::ofstream out = iodet::open_out(path);
    out << "t,jaccard_pinn_vs_lsm,jaccard_pinn_vs_truth,jaccard_lsm_vs_truth,coverage\n";
    auto cell = [&](const std::optional<double>& v) {
        out << ',';
        if (v) out << iodet::fmt(*v);
    };
    for (const MetricsRow& r : rows) {
        out << iodet::fmt(r.t);
        cell(r.jaccard_pinn_vs_lsm);
        cell(r.jaccard_pinn_vs_truth);
        cell(r.jaccard_lsm_vs_truth);
        cell(r.coverage);
        out << '\n';
    }
}

// ---------------------------------------------------------------------------
// experiment configuration (JSON)

struct ScenarioConfig {
    std::string kind = "synthetic";  // synthetic | synthetic2 | custom
    std::uint64_t seed = 1;
    double wind_rotation_deg = 0.0;
    // custom scenarios carry the forcing pieces explicitly
    SpeedMap speed;
    WindSchedule wind;
    std::vector<Rect> obstructions;
};

struct ObservationConfig {
    std::string file;             // isochrone CSV; empty when sampling from a run
    std::string from_simulation;  // simulation output directory
    std::vector<double> times;
    int per_time = 40;
    double jitter = 0.0;
    std::uint64_t seed = 1;
};

/// Affine mapping from the scaled [0,1] domain to physical units; recorded
/// in manifests for display, never applied to computations.
struct DisplayScale {
    double metres_x = 1.0;
    double metres_y = 1.0;
    double seconds_t = 1.0;
};

struct ExperimentConfig {
    GridSpec grid;
    ScenarioConfig scenario;
    SdfSpec sdf;
    ReinitConfig reinit;
    TrainConfig train;
    int oversample = 0;
    std::optional<ObservationConfig> observations;
    DisplayScale display;

    void validate() const {
        grid.validate();
        sdf.validate();
        reinit.validate();
        train.validate();
        if (train.model.uses_observation() && !observations)
            throw ConfigError("config: variant pinn_a requires an 'observations' section");
        if (observations && observations->file.empty() &&
            observations->from_simulation.empty())
            throw ConfigError(
                "config: observations need either 'file' or 'from_simulation'");
    }
};

namespace iodet {

using nlohmann::json;

inline json to_json(const GridSpec& g) {
    return {{"x_min", g.x_min}, {"x_max", g.x_max}, {"y_min", g.y_min}, {"y_max", g.y_max},
            {"n_x", g.n_x},     {"n_y", g.n_y},     {"t_min", g.t_min}, {"t_max", g.t_max},
            {"n_t", g.n_t}};
}

inline GridSpec grid_from_json(const json& j) {
    GridSpec g;
    g.x_min = j.at("x_min");
    g.x_max = j.at("x_max");
    g.y_min = j.at("y_min");
    g.y_max = j.at("y_max");
    g.n_x = j.at("n_x");
    g.n_y = j.at("n_y");
    g.t_min = j.at("t_min");
    g.t_max = j.at("t_max");
    g.n_t = j.at("n_t");
    return g;
}

inline json to_json(const SdfSpec& s) {
    return {{"variant", s.variant == SdfVariant::Cone ? "cone" : "elliptical_cone"},
            {"r", s.r},
            {"a", s.a},
            {"b", s.b},
            {"alpha", s.alpha},
            {"center", {s.cx, s.cy}}};
}

inline SdfSpec sdf_from_json(const json& j) {
    SdfSpec s;
    const std::string variant = j.at("variant");
    if (variant == "cone")
        s.variant = SdfVariant::Cone;
    else if (variant == "elliptical_cone")
        s.variant = SdfVariant::EllipticalCone;
    else
        throw ConfigError("config: unknown sdf variant '" + variant + "'");
    s.r = j.at("r");
    s.a = j.value("a", 1.0);
    s.b = j.value("b", 1.0);
    s.alpha = j.value("alpha", 0.0);
    s.cx = j.at("center").at(0);
    s.cy = j.at("center").at(1);
    return s;
}

inline json to_json(const ScenarioConfig& s) {
    json j{{"kind", s.kind}, {"seed", s.seed}, {"wind_rotation_deg", s.wind_rotation_deg}};
    if (s.kind == "custom") {
        if (s.speed.kind == SpeedKind::Constant)
            j["speed"] = {{"kind", "constant"}, {"s0", s.speed.s0}};
        else
            j["speed"] = {{"kind", "x_split"},
                          {"left", s.speed.s_left},
                          {"right", s.speed.s_right},
                          {"at", s.speed.x_split}};
        switch (s.wind.kind) {
            case WindKind::Constant:
                j["wind"] = {{"kind", "constant"}, {"w", {s.wind.wx0, s.wind.wy0}}};
                break;
            case WindKind::StepChange:
                j["wind"] = {{"kind", "step_change"},
                             {"before", {s.wind.wx0, s.wind.wy0}},
                             {"after", {s.wind.wx1, s.wind.wy1}},
                             {"t_change", s.wind.t_change}};
                break;
            case WindKind::RandomWalk:
                j["wind"] = {{"kind", "random_walk"}, {"seed", s.wind.walk_seed}};
                break;
        }
        json obs = json::array();
        for (const Rect& r : s.obstructions) obs.push_back({r.x0, r.x1, r.y0, r.y1});
        j["obstructions"] = obs;
    }
    return j;
}

inline ScenarioConfig scenario_from_json(const json& j) {
    ScenarioConfig s;
    s.kind = j.at("kind");
    s.seed = j.value("seed", 1);
    s.wind_rotation_deg = j.value("wind_rotation_deg", 0.0);
    if (s.kind == "custom") {
        const json& sp = j.at("speed");
        if (sp.at("kind") == "constant") {
            s.speed.kind = SpeedKind::Constant;
            s.speed.s0 = sp.at("s0");
        } else if (sp.at("kind") == "x_split") {
            s.speed.kind = SpeedKind::XSplit;
            s.speed.s_left = sp.at("left");
            s.speed.s_right = sp.at("right");
            s.speed.x_split = sp.at("at");
        } else {
            throw ConfigError("config: unknown speed kind");
        }
        const json& w = j.at("wind");
        const std::string wk = w.at("kind");
        if (wk == "constant") {
            s.wind.kind = WindKind::Constant;
            s.wind.wx0 = w.at("w").at(0);
            s.wind.wy0 = w.at("w").at(1);
        } else if (wk == "step_change") {
            s.wind.kind = WindKind::StepChange;
            s.wind.wx0 = w.at("before").at(0);
            s.wind.wy0 = w.at("before").at(1);
            s.wind.wx1 = w.at("after").at(0);
            s.wind.wy1 = w.at("after").at(1);
            s.wind.t_change = w.at("t_change");
        } else if (wk == "random_walk") {
            s.wind.kind = WindKind::RandomWalk;
            s.wind.walk_seed = w.at("seed");
        } else {
            throw ConfigError("config: unknown wind kind '" + wk + "'");
        }
        if (j.contains("obstructions"))
            for (const auto& r : j.at("obstructions"))
                s.obstructions.push_back({r.at(0), r.at(1), r.at(2), r.at(3)});
    }
    return s;
}

}  // namespace iodet

inline nlohmann::json to_json(const ExperimentConfig& cfg) {
    using iodet::to_json;
    nlohmann::json j;
    j["grid"] = to_json(cfg.grid);
    j["scenario"] = to_json(cfg.scenario);
    j["sdf"] = to_json(cfg.sdf);
    j["reinit"] = {{"period", cfg.reinit.period},
                   {"inner_iterations", cfg.reinit.inner_iterations},
                   {"pseudo_time_step", cfg.reinit.pseudo_time_step}};
    j["model"] = {{"variant", variant_name(cfg.train.model.variant)},
                  {"bayesian", cfg.train.model.bayesian}};
    j["train"] = {{"preset", cfg.train.preset},
                  {"epochs", cfg.train.epochs},
                  {"lr", cfg.train.lr},
                  {"hidden", {cfg.train.shape.h1, cfg.train.shape.h2}},
                  {"activation", activation_name(cfg.train.shape.activation)},
                  {"sigma_i2", cfg.train.lik.sigma_i2},
                  {"sigma_p2", cfg.train.lik.sigma_p2},
                  {"sigma_f2", cfg.train.lik.sigma_f2},
                  {"sigma_o2", cfg.train.lik.sigma_o2},
                  {"seed", cfg.train.seed},
                  {"checkpoint_every", cfg.train.checkpoint_every},
                  {"rho_init", cfg.train.rho_init},
                  {"elbo_samples", cfg.train.elbo_samples},
                  {"n_mc", cfg.train.n_mc},
                  {"select_best", cfg.train.select_best}};
    j["oversample"] = cfg.oversample;
    j["display_scale"] = {{"metres_x", cfg.display.metres_x},
                          {"metres_y", cfg.display.metres_y},
                          {"seconds_t", cfg.display.seconds_t}};
    if (cfg.observations) {
        nlohmann::json o;
        if (!cfg.observations->file.empty()) o["file"] = cfg.observations->file;
        if (!cfg.observations->from_simulation.empty()) {
            o["from_simulation"] = cfg.observations->from_simulation;
            o["times"] = cfg.observations->times;
            o["per_time"] = cfg.observations->per_time;
            o["jitter"] = cfg.observations->jitter;
            o["seed"] = cfg.observations->seed;
        }
        j["observations"] = o;
    }
    return j;
}

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
    ExperimentConfig cfg;
    cfg.grid = iodet::grid_from_json(j.at("grid"));
    cfg.scenario = iodet::scenario_from_json(j.at("scenario"));
    cfg.sdf = iodet::sdf_from_json(j.at("sdf"));
    if (j.contains("reinit")) {
        cfg.reinit.period = j.at("reinit").value("period", 0);
        cfg.reinit.inner_iterations = j.at("reinit").value("inner_iterations", 1);
        cfg.reinit.pseudo_time_step = j.at("reinit").value("pseudo_time_step", 0.0);
    }
    const auto& m = j.at("model");
    cfg.train.model.variant = variant_from_name(m.at("variant"));
    cfg.train.model.bayesian = m.value("bayesian", false);
    const auto& t = j.at("train");
    cfg.train.preset = t.value("preset", "");
    cfg.train.epochs = t.at("epochs");
    cfg.train.lr = t.at("lr");
    cfg.train.shape.h1 = t.at("hidden").at(0);
    cfg.train.shape.h2 = t.at("hidden").at(1);
    cfg.train.shape.activation = activation_from_name(t.at("activation"));
    cfg.train.lik.sigma_i2 = t.at("sigma_i2");
    cfg.train.lik.sigma_p2 = t.at("sigma_p2");
    cfg.train.lik.sigma_f2 = t.at("sigma_f2");
    cfg.train.lik.sigma_o2 = t.at("sigma_o2");
    cfg.train.seed = t.value("seed", 1);
    cfg.train.checkpoint_every = t.value("checkpoint_every", 0);
    cfg.train.rho_init = t.value("rho_init", -3.0);
    cfg.train.elbo_samples = t.value("elbo_samples", 1);
    cfg.train.n_mc = t.value("n_mc", 100);
    cfg.train.select_best = t.value("select_best", false);
    cfg.oversample = j.value("oversample", 0);
    if (j.contains("display_scale")) {
        cfg.display.metres_x = j.at("display_scale").value("metres_x", 1.0);
        cfg.display.metres_y = j.at("display_scale").value("metres_y", 1.0);
        cfg.display.seconds_t = j.at("display_scale").value("seconds_t", 1.0);
    }
    if (j.contains("observations")) {
        ObservationConfig o;
        const auto& jo = j.at("observations");
        o.file = jo.value("file", "");
        o.from_simulation = jo.value("from_simulation", "");
        if (jo.contains("times")) o.times = jo.at("times").get<std::vector<double>>();
        o.per_time = jo.value("per_time", 40);
        o.jitter = jo.value("jitter", 0.0);
        o.seed = jo.value("seed", 1);
        cfg.observations = o;
    }
    return cfg;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in = iodet::open_in(path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    try {
        return config_from_json(j);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

inline void save_config(const std::filesystem::path& path, const ExperimentConfig& cfg) {
    std::ofstream out = iodet::open_out(path);
    out << to_json(cfg).dump(2) << '\n';
}

/// Forcing field described by the scenario section (wind-walk tables are
/// generated against the supplied grid).
inline ForcingField build_forcing(const ScenarioConfig& scenario, const GridSpec& grid) {
    if (scenario.kind == "synthetic" || scenario.kind == "synthetic2")
        return build_scenario(scenario.kind, grid, scenario.seed, scenario.wind_rotation_deg);
    if (scenario.kind != "custom")
        throw ConfigError("config: unknown scenario kind '" + scenario.kind + "'");
    ForcingField f;
    f.speed = scenario.speed;
    f.wind = scenario.wind;
    if (f.wind.kind == WindKind::RandomWalk) {
        f.wind.walk = synthetic2_wind_path(grid.n_t + 1, f.wind.walk_seed);
        f.wind.walk_t_min = grid.t_min;
        f.wind.walk_dt = grid.dt();
    }
    f.wind.rotation_deg = scenario.wind_rotation_deg;
    f.obstructions = scenario.obstructions;
    return f;
}

// ---------------------------------------------------------------------------
// run directories

inline void ensure_output_dir(const std::filesystem::path& dir, bool force) {
    namespace fs = std::filesystem;
    if (fs::exists(dir)) {
        if (!force)
            throw ConfigError("output directory '" + dir.string() +
                              "' exists (pass --force to overwrite)");
        fs::remove_all(dir);
    }
    fs::create_directories(dir);
}

inline void write_manifest(const std::filesystem::path& dir, const std::string& command,
                           const ExperimentConfig& cfg, std::uint64_t seed) {
    nlohmann::json j;
    j["tool"] = "firefront";
    j["version"] = kVersion;
    j["command"] = command;
    j["seed"] = seed;
    j["config"] = to_json(cfg);
    std::ofstream out = iodet::open_out(dir / "manifest.json");
    out << j.dump(2) << '\n';
}

inline std::string snapshot_name(int index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "snap_%03d.txt", index);
    return buf;
}

/// Optional grayscale heatmap of a field slice (binary PGM, 8-bit, y up).
inline void write_pgm(const std::filesystem::path& path, const ScalarField& u) {
    double lo = u.values.empty() ? 0.0 : u.values[0];
    double hi = lo;
    for (double v : u.values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const double span = hi > lo ? hi - lo : 1.0;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << "P5\n" << u.spec.n_x << ' ' << u.spec.n_y << "\n255\n";
    for (int j = u.spec.n_y - 1; j >= 0; --j)
        for (int i = 0; i < u.spec.n_x; ++i) {
            const double norm = (u.at(i, j) - lo) / span;
            out.put(static_cast<char>(static_cast<unsigned char>(norm * 255.0 + 0.5)));
        }
}

inline void write_simulation(const std::filesystem::path& dir, const SimulationResult& result) {
    std::vector<double> times;
    for (std::size_t n = 0; n < result.snapshots.size(); ++n) {
        const double t = result.grid.t(static_cast<int>(n));
        times.push_back(t);
        write_snapshot(dir / snapshot_name(static_cast<int>(n)), result.snapshots[n], t);
    }
    write_fronts_csv(dir / "fronts.csv", times, result.fronts);
}

struct SimulationArtifacts {
    GridSpec grid;
    std::vector<double> times;
    std::vector<ScalarField> snapshots;
};

inline SimulationArtifacts read_simulation(const std::filesystem::path& dir) {
    SimulationArtifacts art;
    for (int n = 0;; ++n) {
        const std::filesystem::path p = dir / snapshot_name(n);
        if (!std::filesystem::exists(p)) break;
        Snapshot snap = read_snapshot(p);
        if (n == 0)
            art.grid = snap.field.spec;
        else if (!art.grid.same_layout(snap.field.spec))
            throw IoError(dir.string() + ": snapshots disagree on the grid");
        art.times.push_back(snap.t);
        art.snapshots.push_back(std::move(snap.field));
    }
    if (art.snapshots.empty())
        throw IoError(dir.string() + ": no snapshots found (snap_000.txt...)");
    return art;
}

}  // namespace firefront
