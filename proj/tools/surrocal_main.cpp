// surrocal: surrogate-assisted calibration of agent-based models.
//
// Subcommands: simulate, calibrate, explore, importance, experiment.
// All outputs are reproducible from the config and explicit seeds; result
// directories are staged and renamed on success so failures leave nothing
// half-written.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "surrocal/config.hpp"
#include "surrocal/harness.hpp"
#include "surrocal/io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace surrocal;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNoPositiveSeed = 3;

struct GlobalOpts {
    std::string config_path;
    std::vector<std::string> sets;
    long long seed = -1;
    int jobs = 0;
    std::string output_dir = ".";
};

ConfigFile load_config(const GlobalOpts& g) {
    ConfigFile cfg;
    if (!g.config_path.empty()) cfg = ConfigFile::parse_file(g.config_path);
    cfg.apply_env_overrides();
    for (const auto& kv : g.sets) {
        const std::size_t eq = kv.find('=');
        require(eq != std::string::npos, "--set expects section.key=value, got '" + kv + "'");
        cfg.set(trim(kv.substr(0, eq)), trim(kv.substr(eq + 1)));
    }
    if (g.seed >= 0) cfg.set("loop.seed", std::to_string(g.seed));
    return cfg;
}

int effective_jobs(const GlobalOpts& g) { return g.jobs > 0 ? g.jobs : default_jobs(); }

// result directories are written to a staging path, then renamed into place
class StagedDir {
public:
    explicit StagedDir(const fs::path& final_path) : final_(final_path), staging_(final_path) {
        staging_ += ".staging";
        std::error_code ec;
        fs::remove_all(staging_, ec);
        fs::create_directories(staging_);
    }

    ~StagedDir() {
        if (!committed_) {
            std::error_code ec;
            fs::remove_all(staging_, ec);
        }
    }

    const fs::path& path() const { return staging_; }

    void commit() {
        std::error_code ec;
        fs::remove_all(final_, ec);
        fs::rename(staging_, final_);
        committed_ = true;
    }

private:
    fs::path final_, staging_;
    bool committed_ = false;
};

json config_echo(const ConfigFile& cfg) {
    json j = json::object();
    for (const auto& [k, v] : cfg.entries()) j[k] = v;
    return j;
}

std::optional<ReferenceReturns> load_reference_if_needed(const RunConfig& rc) {
    if (rc.model != ModelId::bh) return std::nullopt;
    require(fs::exists(rc.reference_path),
            "config field 'criterion.reference': file not found: " + rc.reference_path.string());
    return load_reference_returns(rc.reference_path);
}

Labeler build_labeler(const RunConfig& rc, const std::optional<ReferenceReturns>& ref) {
    return make_labeler(rc, ref ? &*ref : nullptr);
}

// ---------------------------------------------------------------- simulate

int cmd_simulate(const GlobalOpts& g, const std::vector<std::string>& params, bool dump) {
    const ConfigFile cfg = load_config(g);
    const RunConfig rc = build_run_config(cfg);
    const auto ref = load_reference_if_needed(rc);

    // single-run vector: box midpoints overridden by --param name=value
    std::vector<double> v(static_cast<std::size_t>(rc.space.dimension()));
    for (std::size_t i = 0; i < v.size(); ++i)
        v[i] = 0.5 * (rc.space.dims[i].lower + rc.space.dims[i].upper);
    for (const auto& kv : params) {
        const std::size_t eq = kv.find('=');
        require(eq != std::string::npos, "--param expects name=value, got '" + kv + "'");
        const std::string name = trim(kv.substr(0, eq));
        const int idx = rc.space.index_of(name);
        require(idx >= 0, "--param: '" + name + "' is not an explored parameter of this model");
        v[static_cast<std::size_t>(idx)] = parse_double(kv.substr(eq + 1), "--param " + name);
    }

    const fs::path out_dir = g.output_dir;
    fs::create_directories(out_dir);

    CalibrationLabel label;
    if (rc.model == ModelId::bh) {
        BHParams p = bh_params_from_vector(rc.space, v.data());
        p.noise_sd = rc.bh_noise_sd;
        p.cost_both_types = rc.bh_cost_both;
        p.fundamental = rc.bh_fundamental;
        BHTrace trace;
        const PriceSeries s = bh_simulate(p, rc.abm_seed, rc.bh_x0, dump ? &trace : nullptr);
        label = bh_label(s, *ref, rc.kind, rc.bh_criterion);
        CsvWriter w(out_dir / "series.csv");
        if (dump) {
            w.row({"t", "x", "p", "n1", "u1", "u2"});
            for (std::size_t t = 0; t < s.prices.size(); ++t)
                w.row({fmt_int(static_cast<long long>(t + 1)), fmt_double(trace.x[t]),
                       fmt_double(s.prices[t]), fmt_double(trace.n1[t]), fmt_double(trace.u1[t]),
                       fmt_double(trace.u2[t])});
        } else {
            w.row({"t", "p"});
            for (std::size_t t = 0; t < s.prices.size(); ++t)
                w.row({fmt_int(static_cast<long long>(t + 1)), fmt_double(s.prices[t])});
        }
        if (s.divergent) std::fprintf(stderr, "note: run flagged divergent after %zu periods\n", s.prices.size());
    } else if (rc.model == ModelId::islands) {
        const IslandParams p = islands_params_from_vector(rc.space, v.data());
        IslandsTrace trace;
        const GdpSeries gdp = islands_simulate(p, rc.abm_seed, dump ? &trace : nullptr);
        if (rc.mc_size > 1) {
            label = build_labeler(rc, std::nullopt)(v.data());
        } else {
            label = islands_label(gdp, rc.kind, rc.islands_criterion);
        }
        CsvWriter w(out_dir / "series.csv");
        if (dump) {
            w.row({"t", "gdp", "n_miners", "n_explorers", "n_imitators", "n_islands"});
            for (std::size_t t = 0; t < gdp.gdp.size(); ++t)
                w.row({fmt_int(static_cast<long long>(t + 1)), fmt_double(gdp.gdp[t]),
                       fmt_int(trace.miners[t]), fmt_int(trace.explorers[t]),
                       fmt_int(trace.imitators[t]), fmt_int(trace.islands[t])});
        } else {
            w.row({"t", "gdp"});
            for (std::size_t t = 0; t < gdp.gdp.size(); ++t)
                w.row({fmt_int(static_cast<long long>(t + 1)), fmt_double(gdp.gdp[t])});
        }
        std::printf("agr=%s\n", fmt_double(avg_growth_rate(gdp)).c_str());
    } else {
        label = rc.synthetic.label(v.data(), rc.kind);
        CsvWriter w(out_dir / "series.csv");
        w.row({"component", "value"});
        for (std::size_t i = 0; i < v.size(); ++i)
            w.row({rc.space.dims[i].name, fmt_double(v[i])});
    }

    json jl = {{"kind", rc.kind == OutcomeKind::binary ? "binary" : "real"},
               {"binary_value", label.binary_value},
               {"real_value", label.real_value}};
    write_file(out_dir / "label.json", jl.dump(2) + "\n");
    std::printf("label_binary=%d label_real=%s\n", label.binary_value, fmt_double(label.real_value).c_str());
    return 0;
}

// ---------------------------------------------------------------- calibrate

json hyperparams_json(const Hyperparams& hp) {
    return {{"n_trees", hp.n_trees},
            {"max_depth", hp.max_depth},
            {"min_child_weight", hp.min_child_weight},
            {"shrinkage", hp.shrinkage},
            {"subsample", hp.subsample},
            {"l2_reg", hp.l2_reg},
            {"seed", hp.seed}};
}

json logit_to_json(const LogitModel& m) {
    return {{"format", "surrocal-logit"},
            {"version", 1},
            {"weights", m.weights},
            {"intercept", m.intercept}};
}

void write_run_artifacts(const fs::path& dir, const ConfigFile& cfg, const RunConfig& rc,
                         const CalibrationRun& run) {
    json rounds = json::array();
    for (const auto& r : run.rounds)
        rounds.push_back({{"round", r.round},
                          {"mode", selection_mode_name(r.mode)},
                          {"batch", r.batch},
                          {"labeled_after", r.labeled_after},
                          {"positives_after", r.positives_after},
                          {"tuned", r.tuned}});
    json j = {{"tool", "surrocal"},
              {"version", kVersion},
              {"config", config_echo(cfg)},
              {"seeds",
               {{"sampler", run.cfg.seed_sampler}, {"loop", run.cfg.seed_loop}, {"hpo", run.cfg.seed_hpo},
                {"abm", rc.abm_seed}}},
              {"budget", run.cfg.budget},
              {"evaluations", run.evaluations},
              {"positives", run.positive_count()},
              {"batch_size", run.cfg.effective_batch()},
              {"rounds", rounds}};
    if (run.cfg.family == SurrogateFamily::boosted) j["final_hyperparams"] = hyperparams_json(run.final_hp);
    write_file(dir / "run.json", j.dump(2) + "\n");

    CsvWriter w(dir / "samples.csv");
    std::vector<std::string> header{"round"};
    for (const auto& d : rc.space.dims) header.push_back(d.name);
    header.push_back("label_kind");
    header.push_back("label_value");
    header.push_back("selection_mode");
    w.row(header);
    for (std::size_t i = 0; i < run.labels.size(); ++i) {
        std::vector<std::string> row{fmt_int(run.sample_round[i])};
        const double* v = &run.x[i * static_cast<std::size_t>(run.dim)];
        for (int k = 0; k < run.dim; ++k) row.push_back(fmt_double(v[k]));
        row.push_back(run.cfg.kind == OutcomeKind::binary ? "binary" : "real");
        row.push_back(run.cfg.kind == OutcomeKind::binary
                          ? fmt_int(run.labels[i].binary_value)
                          : fmt_double(run.labels[i].real_value));
        row.push_back(selection_mode_name(run.sample_mode[i]));
        w.row(row);
    }

    if (run.cfg.family == SurrogateFamily::boosted) {
        save_model(run.model, dir / "model.json");
    } else {
        write_file(dir / "model.json", logit_to_json(*run.logit).dump(2) + "\n");
    }
}

int cmd_calibrate(const GlobalOpts& g, const std::string& run_name) {
    const ConfigFile cfg = load_config(g);
    RunConfig rc = build_run_config(cfg);
    rc.loop.jobs = effective_jobs(g);
    const auto ref = load_reference_if_needed(rc);
    const Labeler labeler = build_labeler(rc, ref);

    const fs::path out = fs::path(g.output_dir) / run_name;
    StagedDir staged(out);
    try {
        const CalibrationRun run = run_calibration(rc.space, labeler, rc.loop);
        write_run_artifacts(staged.path(), cfg, rc, run);
        staged.commit();
    } catch (const seed_abort& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitNoPositiveSeed;
    }
    std::printf("calibration run written to %s\n", out.string().c_str());
    return 0;
}

// ------------------------------------------------------------------ explore

struct LoadedModel {
    bool is_logit = false;
    TreeEnsemble ensemble;
    LogitModel logit;
    int n_features = 0;

    double score(const double* v) const { return is_logit ? logit.score(v) : ensemble.score(v); }
};

LoadedModel load_any_model(const fs::path& path) {
    const json j = json::parse(read_file(path));
    LoadedModel m;
    const std::string format = j.value("format", "");
    if (format == "surrocal-logit") {
        m.is_logit = true;
        m.logit.weights = j.at("weights").get<std::vector<double>>();
        m.logit.intercept = j.at("intercept").get<double>();
        m.n_features = static_cast<int>(m.logit.weights.size());
    } else {
        m.ensemble = ensemble_from_json(j);
        m.n_features = m.ensemble.n_features;
    }
    return m;
}

// pool CSV with arbitrary dim names: index,<names...>
struct NamedPool {
    std::vector<std::string> names;
    Pool pool;
};

NamedPool read_named_pool(const fs::path& path) {
    const CsvTable t = read_csv(path);
    NamedPool np;
    if (t.header.empty()) return np; // empty file -> empty pool
    require(t.header[0] == "index", "pool CSV " + path.string() + ": first column must be 'index'");
    np.names.assign(t.header.begin() + 1, t.header.end());
    np.pool.dim = static_cast<int>(np.names.size());
    for (const auto& r : t.rows) {
        require(r.size() == t.header.size(), "pool CSV row has wrong arity");
        for (std::size_t k = 1; k < r.size(); ++k)
            np.pool.data.push_back(parse_double(r[k], "pool value"));
    }
    return np;
}

int cmd_explore(const GlobalOpts& g, const std::string& model_path, const std::string& pool_path,
                long long sample_count, const std::string& output) {
    const ConfigFile cfg = load_config(g);
    const LoadedModel model = load_any_model(model_path);

    NamedPool np;
    if (!pool_path.empty()) {
        np = read_named_pool(pool_path);
    } else {
        require(sample_count > 0, "explore: provide --pool FILE or --sample N");
        const RunConfig rc = build_run_config(cfg);
        require(rc.space.dimension() == model.n_features,
                "explore: configured space dimension does not match the model");
        np.pool = draw_pool(rc.space, static_cast<std::size_t>(sample_count), rc.loop.pool_scheme,
                            rc.loop.seed_sampler);
        for (const auto& d : rc.space.dims) np.names.push_back(d.name);
    }

    PositiveRule rule{0.5, true};
    bool real_model = !model.is_logit && model.ensemble.loss == Loss::squared;
    if (real_model) {
        const RunConfig rc = build_run_config(cfg);
        rule = rc.loop.positive;
    }

    CsvWriter w(output.empty() ? fs::path(g.output_dir) / "positives.csv" : fs::path(output));
    std::vector<std::string> header{"index"};
    for (const auto& n : np.names) header.push_back(n);
    header.push_back("score");
    w.row(header);
    if (np.pool.size() == 0) return 0;
    require(np.pool.dim == model.n_features, "explore: pool dimension does not match the model");

    struct Hit {
        std::size_t idx;
        double score;
    };
    std::vector<Hit> hits;
    for (std::size_t i = 0; i < np.pool.size(); ++i) {
        const double s = model.score(np.pool.row(i));
        const bool positive = real_model ? rule.value_positive(s) : s > 0.5;
        if (positive) hits.push_back({i, s});
    }
    const bool ascending = real_model && !rule.greater;
    std::sort(hits.begin(), hits.end(), [&](const Hit& a, const Hit& b) {
        if (a.score != b.score) return ascending ? a.score < b.score : a.score > b.score;
        return a.idx < b.idx;
    });
    for (const auto& h : hits) {
        std::vector<std::string> row{fmt_int(static_cast<long long>(h.idx))};
        const double* v = np.pool.row(h.idx);
        for (int k = 0; k < np.pool.dim; ++k) row.push_back(fmt_double(v[k]));
        row.push_back(fmt_double(h.score));
        w.row(row);
    }
    return 0;
}

// --------------------------------------------------------------- importance

int cmd_importance(const GlobalOpts& g, const std::string& model_path, const std::string& output) {
    const ConfigFile cfg = load_config(g);
    const LoadedModel model = load_any_model(model_path);
    require(!model.is_logit, "importance: split counts need a tree ensemble model");
    const std::vector<double> imp = importance(model.ensemble);

    std::vector<std::string> names(imp.size());
    for (std::size_t i = 0; i < imp.size(); ++i) names[i] = "f" + std::to_string(i);
    if (!g.config_path.empty() || cfg.has("model.id")) {
        const RunConfig rc = build_run_config(cfg);
        if (rc.space.dimension() == static_cast<int>(imp.size()))
            for (std::size_t i = 0; i < imp.size(); ++i) names[i] = rc.space.dims[i].name;
    }

    std::vector<std::size_t> order(imp.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (imp[a] != imp[b]) return imp[a] > imp[b];
        return a < b;
    });

    std::string text = "parameter,importance\n";
    for (std::size_t i : order) text += names[i] + "," + fmt_double(imp[i]) + "\n";
    if (output.empty()) {
        std::fputs(text.c_str(), stdout);
    } else {
        write_file(output, text);
    }
    return 0;
}

// --------------------------------------------------------------- experiment

int cmd_experiment(const GlobalOpts& g) {
    const ConfigFile cfg = load_config(g);
    RunConfig rc = build_run_config(cfg);
    rc.loop.jobs = effective_jobs(g);
    const auto ref = load_reference_if_needed(rc);
    const Labeler labeler = build_labeler(rc, ref);

    const fs::path root = fs::path(g.output_dir);
    fs::create_directories(root);
    const fs::path out = root / rc.experiment_name;
    StagedDir staged(out);

    json manifest = {{"tool", "surrocal"},
                     {"version", kVersion},
                     {"name", rc.experiment_name},
                     {"type", rc.experiment_type == ExperimentType::sweep ? "sweep" : "robustness"},
                     {"config", config_echo(cfg)}};

    if (rc.experiment_type == ExperimentType::sweep) {
        const fs::path cache = root / (rc.experiment_name + ".oos_cache.csv");
        const SweepResult res = run_sweep(rc.space, labeler, rc.loop, rc.sweep, cache);
        {
            CsvWriter w(staged.path() / "metrics.csv");
            w.row({"budget", "repetition", "metric", "value"});
            for (const auto& c : res.cells)
                w.row({fmt_int(static_cast<long long>(c.budget)), fmt_int(c.repetition), c.metric,
                       fmt_double(c.value)});
        }
        {
            CsvWriter w(staged.path() / "summary.csv");
            w.row({"budget", "metric", "mean", "median", "ci95_low", "ci95_high", "count"});
            for (const auto& s : res.summary)
                w.row({fmt_int(static_cast<long long>(s.budget)), s.metric, fmt_double(s.mean),
                       fmt_double(s.median), fmt_double(s.ci95_low), fmt_double(s.ci95_high),
                       fmt_int(s.count)});
        }
        {
            CsvWriter w(staged.path() / "timing.csv");
            w.row({"budget", "repetition", "train_seconds", "predict_seconds"});
            for (const auto& t : res.timing)
                w.row({fmt_int(static_cast<long long>(t.budget)), fmt_int(t.repetition),
                       fmt_double(t.train_seconds), fmt_double(t.predict_seconds)});
        }
        manifest["budgets"] = rc.sweep.budgets;
        manifest["repetitions"] = rc.sweep.repetitions;
        manifest["oos_size"] = rc.sweep.oos_size;
        manifest["oos_cache"] = cache.filename().string();
    } else {
        const std::vector<RobustnessRow> rows = run_robustness(rc.space, labeler, rc.loop, rc.robustness);
        CsvWriter w(staged.path() / "robustness.csv");
        w.row({"surrogate", "run", "tn", "fp", "fn", "tp", "precision", "status"});
        for (const auto& r : rows)
            w.row({r.surrogate, fmt_int(r.run), fmt_int(static_cast<long long>(r.confusion.tn)),
                   fmt_int(static_cast<long long>(r.confusion.fp)),
                   fmt_int(static_cast<long long>(r.confusion.fn)),
                   fmt_int(static_cast<long long>(r.confusion.tp)),
                   r.precision_defined ? fmt_double(r.precision_value) : "",
                   r.aborted ? "no-positive-seed" : (r.precision_defined ? "ok" : "no-predicted-positives")});
        manifest["runs"] = rc.robustness.runs;
    }
    write_file(staged.path() / "manifest.json", manifest.dump(2) + "\n");
    staged.commit();
    std::printf("experiment results written to %s\n", out.string().c_str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"surrogate-assisted calibration toolkit for agent-based models"};
    app.require_subcommand(1);

    GlobalOpts g;
    app.add_option("--config", g.config_path, "run configuration file (INI-style sections)");
    app.add_option("--set", g.sets, "override a config value: section.key=value")->take_all();
    app.add_option("--seed", g.seed, "override the loop base seed");
    app.add_option("--jobs", g.jobs, "worker parallelism (default: available cores)");
    app.add_option("--output-dir", g.output_dir, "output directory (default: current)");

    auto* sim = app.add_subcommand("simulate", "run one true-model simulation and label it");
    std::vector<std::string> sim_params;
    bool sim_dump = false;
    sim->add_option("--param", sim_params, "override a model parameter: name=value")->take_all();
    sim->add_flag("--dump", sim_dump, "write the per-period state trace");

    auto* cal = app.add_subcommand("calibrate", "run the budgeted active-learning loop");
    std::string run_name = "run";
    cal->add_option("--name", run_name, "run directory name under --output-dir");

    auto* exp = app.add_subcommand("explore", "label a pool with a saved surrogate");
    std::string model_path, pool_path, explore_out;
    long long sample_count = 0;
    exp->add_option("--model", model_path, "model.json from a calibration run")->required();
    exp->add_option("--pool", pool_path, "pool CSV (index,<dims...>)");
    exp->add_option("--sample", sample_count, "draw this many pool points from the configured space");
    exp->add_option("--output", explore_out, "output CSV (default: <output-dir>/positives.csv)");

    auto* imp = app.add_subcommand("importance", "split-count parameter importance of a saved model");
    std::string imp_model, imp_out;
    imp->add_option("--model", imp_model, "model.json")->required();
    imp->add_option("--output", imp_out, "output CSV (default: stdout)");

    app.add_subcommand("experiment", "run the configured sweep or robustness experiment");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand("simulate")) return cmd_simulate(g, sim_params, sim_dump);
        if (app.got_subcommand("calibrate")) return cmd_calibrate(g, run_name);
        if (app.got_subcommand("explore")) return cmd_explore(g, model_path, pool_path, sample_count, explore_out);
        if (app.got_subcommand("importance")) return cmd_importance(g, imp_model, imp_out);
        if (app.got_subcommand("experiment")) return cmd_experiment(g);
    } catch (const seed_abort& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitNoPositiveSeed;
    } catch (const error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfig;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 1;
}
