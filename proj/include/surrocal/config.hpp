#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "surrocal/active_loop.hpp"
#include "surrocal/bh_model.hpp"
#include "surrocal/common.hpp"
#include "surrocal/criteria.hpp"
#include "surrocal/harness.hpp"
#include "surrocal/io.hpp"
#include "surrocal/islands_model.hpp"
#include "surrocal/synthetic.hpp"

extern "C" char** environ;

namespace surrocal {

// Sectioned key=value configuration. '#' and ';' start comments. Environment
// variables override file values: SURROCAL_<SECTION>_<KEY> with '.' in the
// key spelled as '__'.
class ConfigFile {
public:
    ConfigFile() = default;

    static ConfigFile parse_text(const std::string& text) {
        ConfigFile cfg;
        std::string section;
        std::size_t line_no = 0;
        for (const auto& raw : split(text, '\n')) {
            ++line_no;
            std::string line = raw;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            const std::size_t hash = line.find_first_of("#;");
            if (hash != std::string::npos) line = line.substr(0, hash);
            line = trim(line);
            if (line.empty()) continue;
            if (line.front() == '[') {
                require(line.back() == ']', "config line " + std::to_string(line_no) + ": unterminated section");
                section = trim(line.substr(1, line.size() - 2));
                require(!section.empty(), "config line " + std::to_string(line_no) + ": empty section name");
                continue;
            }
            const std::size_t eq = line.find('=');
            require(eq != std::string::npos, "config line " + std::to_string(line_no) + ": expected key = value");
            require(!section.empty(), "config line " + std::to_string(line_no) + ": key outside any [section]");
            const std::string key = trim(line.substr(0, eq));
            const std::string value = trim(line.substr(eq + 1));
            require(!key.empty(), "config line " + std::to_string(line_no) + ": empty key");
            cfg.values_[section + "." + key] = value;
        }
        return cfg;
    }

    static ConfigFile parse_file(const std::filesystem::path& path) {
        ConfigFile cfg = parse_text(read_file(path));
        cfg.path_ = path;
        return cfg;
    }

    void set(const std::string& dotted_key, const std::string& value) { values_[dotted_key] = value; }

    void apply_env_overrides(const char* prefix = "SURROCAL_") {
        // the full environ scan keeps overrides discoverable without listing keys
        for (char** env = environ_(); env && *env; ++env) {
            const std::string entry(*env);
            if (entry.rfind(prefix, 0) != 0) continue;
            const std::size_t eq = entry.find('=');
            if (eq == std::string::npos) continue;
            std::string name = entry.substr(std::string(prefix).size(), eq - std::string(prefix).size());
            const std::string value = entry.substr(eq + 1);
            const std::size_t us = name.find('_');
            if (us == std::string::npos) continue;
            std::string section = name.substr(0, us);
            std::string key = name.substr(us + 1);
            std::transform(section.begin(), section.end(), section.begin(),
                           [](unsigned char c) { return std::tolower(c); });
            std::transform(key.begin(), key.end(), key.begin(),
                           [](unsigned char c) { return std::tolower(c); });
            std::size_t pos;
            while ((pos = key.find("__")) != std::string::npos) key.replace(pos, 2, ".");
            values_[section + "." + key] = value;
        }
    }

    bool has(const std::string& key) const { return values_.count(key) > 0; }

    std::string get_string(const std::string& key, const std::string& fallback) const {
        auto it = values_.find(key);
        return it == values_.end() ? fallback : it->second;
    }

    std::string require_string(const std::string& key) const {
        auto it = values_.find(key);
        if (it == values_.end()) fail("config: missing required field '" + key + "'");
        return it->second;
    }

    double get_double(const std::string& key, double fallback) const {
        auto it = values_.find(key);
        return it == values_.end() ? fallback : parse_double(it->second, "config field '" + key + "'");
    }

    long long get_int(const std::string& key, long long fallback) const {
        auto it = values_.find(key);
        return it == values_.end() ? fallback : parse_int(it->second, "config field '" + key + "'");
    }

    bool get_bool(const std::string& key, bool fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        const std::string& v = it->second;
        if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
        if (v == "false" || v == "0" || v == "no" || v == "off") return false;
        fail("config field '" + key + "': expected a boolean, got '" + v + "'");
    }

    std::vector<std::string> get_list(const std::string& key, const std::vector<std::string>& fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        std::vector<std::string> out;
        for (const auto& part : split(it->second, ',')) {
            const std::string t = trim(part);
            if (!t.empty()) out.push_back(t);
        }
        return out;
    }

    const std::map<std::string, std::string>& entries() const { return values_; }
    const std::filesystem::path& origin() const { return path_; }

private:
    static char** environ_() { return ::environ; }

    std::map<std::string, std::string> values_;
    std::filesystem::path path_;
};

enum class ModelId { bh, islands, synthetic };

inline ModelId parse_model_id(const std::string& s) {
    if (s == "bh") return ModelId::bh;
    if (s == "islands") return ModelId::islands;
    if (s == "synthetic") return ModelId::synthetic;
    fail("config field 'model.id': unknown model '" + s + "' (expected bh|islands|synthetic)");
}

enum class ExperimentType { sweep, robustness };

// The assembled run configuration: model, criterion, loop, surrogate and
// optional experiment plan. Paper-pinned constants enter as defaults here
// and can be overridden per config file.
struct RunConfig {
    ModelId model = ModelId::bh;
    ParameterSpace space;
    std::uint64_t abm_seed = 12345;
    double bh_noise_sd = 0.0;
    bool bh_cost_both = false;
    double bh_x0 = 0.1;
    double bh_fundamental = 100.0;
    int mc_size = 1;

    OutcomeKind kind = OutcomeKind::binary;
    BhCriterion bh_criterion;
    std::filesystem::path reference_path;
    IslandsCriterion islands_criterion;
    SyntheticModel synthetic;

    LoopConfig loop;

    ExperimentType experiment_type = ExperimentType::sweep;
    std::string experiment_name = "experiment";
    SweepPlan sweep;
    RobustnessPlan robustness;
};

namespace config_detail {

inline void load_space_overrides(const ConfigFile& cfg, ParameterSpace& space) {
    for (auto& d : space.dims) {
        const std::string key = "model.explore." + d.name;
        if (!cfg.has(key)) continue;
        const auto parts = cfg.get_list(key, {});
        require(parts.size() == 2, "config field '" + key + "': expected 'lower,upper'");
        d.lower = parse_double(parts[0], key);
        d.upper = parse_double(parts[1], key);
        require(d.lower < d.upper, "config field '" + key + "': lower must be < upper");
    }
    for (auto& f : space.fixed) {
        const std::string key = "model.fixed." + f.name;
        if (cfg.has(key)) f.value = cfg.get_double(key, f.value);
    }
}

} // namespace config_detail

inline RunConfig build_run_config(const ConfigFile& cfg) {
    RunConfig rc;
    rc.model = parse_model_id(cfg.get_string("model.id", "bh"));
    rc.abm_seed = static_cast<std::uint64_t>(cfg.get_int("model.seed", 12345));
    rc.mc_size = static_cast<int>(cfg.get_int("model.mc_size", 1));
    require(rc.mc_size >= 1, "config field 'model.mc_size': must be >= 1");

    switch (rc.model) {
        case ModelId::bh:
            rc.space = bh_space();
            rc.bh_noise_sd = cfg.get_double("model.noise_sd", 0.0);
            rc.bh_cost_both = cfg.get_bool("model.cost_both_types", false);
            rc.bh_x0 = cfg.get_double("model.x0", 0.1);
            rc.bh_fundamental = cfg.get_double("model.fundamental", 100.0);
            break;
        case ModelId::islands:
            rc.space = islands_space();
            break;
        case ModelId::synthetic: {
            rc.synthetic.dim = static_cast<int>(cfg.get_int("model.dims", 5));
            require(rc.synthetic.dim >= 1, "config field 'model.dims': must be >= 1");
            rc.synthetic.center = cfg.get_double("model.center", 0.35);
            rc.synthetic.radius = cfg.get_double("model.radius", 0.2856);
            rc.space = synthetic_space(rc.synthetic.dim);
            break;
        }
    }
    config_detail::load_space_overrides(cfg, rc.space);
    rc.space.validate();

    rc.kind = parse_outcome(cfg.get_string("criterion.kind", "binary"));
    rc.bh_criterion.alpha = cfg.get_double("criterion.alpha", 0.05);
    rc.reference_path = cfg.get_string("criterion.reference", "data/reference_prices.csv");
    {
        const std::string mode = cfg.get_string("criterion.mode", "growth_and_tails");
        if (mode == "growth_and_tails") rc.islands_criterion.mode = IslandsMode::growth_and_tails;
        else if (mode == "growth_only") rc.islands_criterion.mode = IslandsMode::growth_only;
        else fail("config field 'criterion.mode': unknown mode '" + mode + "'");
        rc.islands_criterion.agr_threshold =
            cfg.get_double("criterion.agr_threshold",
                           rc.islands_criterion.mode == IslandsMode::growth_only ? 0.005 : 0.02);
        rc.islands_criterion.b_threshold = cfg.get_double("criterion.b_threshold", 1.0);
        rc.islands_criterion.b_below = cfg.get_bool("criterion.b_below", true);
        rc.islands_criterion.burn_in = static_cast<int>(cfg.get_int("criterion.burn_in", 50));
        if (rc.model == ModelId::islands && rc.mc_size > 1)
            require(rc.islands_criterion.mode == IslandsMode::growth_only,
                    "config: model.mc_size > 1 requires criterion.mode = growth_only");
    }

    // positive-set definition for real-valued outcomes
    rc.loop.kind = rc.kind;
    switch (rc.model) {
        case ModelId::bh:
            rc.loop.positive = {rc.bh_criterion.alpha, true};
            break;
        case ModelId::islands:
            if (rc.islands_criterion.mode == IslandsMode::growth_only)
                rc.loop.positive = {rc.islands_criterion.agr_threshold, true};
            else
                rc.loop.positive = {rc.islands_criterion.b_threshold, !rc.islands_criterion.b_below};
            break;
        case ModelId::synthetic:
            rc.loop.positive = {rc.synthetic.radius, false};
            break;
    }
    if (cfg.has("criterion.positive_threshold"))
        rc.loop.positive.threshold = cfg.get_double("criterion.positive_threshold", 0.0);
    if (cfg.has("criterion.positive_greater"))
        rc.loop.positive.greater = cfg.get_bool("criterion.positive_greater", true);

    rc.loop.budget = static_cast<std::size_t>(cfg.get_int("loop.budget", 500));
    rc.loop.seed_size = static_cast<std::size_t>(cfg.get_int("loop.seed_size", 35));
    rc.loop.pool_size = static_cast<std::size_t>(cfg.get_int("loop.pool_size", 10000));
    rc.loop.batch_size = static_cast<std::size_t>(cfg.get_int("loop.batch_size", 0));
    rc.loop.batch_scale = cfg.get_double("loop.batch_scale", 1.0);
    rc.loop.pool_scheme = parse_scheme(cfg.get_string("loop.pool_scheme", "sobol"));
    rc.loop.redraw_pool = cfg.get_bool("loop.redraw_pool", false);
    const auto base_seed = static_cast<std::uint64_t>(cfg.get_int("loop.seed", 7));
    rc.loop.seed_sampler = static_cast<std::uint64_t>(cfg.get_int("loop.seed_sampler",
                                                                  static_cast<long long>(mix_seed(base_seed, 1))));
    rc.loop.seed_loop = static_cast<std::uint64_t>(cfg.get_int("loop.seed_loop",
                                                               static_cast<long long>(mix_seed(base_seed, 2))));
    rc.loop.seed_hpo = static_cast<std::uint64_t>(cfg.get_int("loop.seed_hpo",
                                                              static_cast<long long>(mix_seed(base_seed, 3))));

    rc.loop.family = parse_family(cfg.get_string("surrogate.family", "boosted"));
    rc.loop.logit_l2 = cfg.get_double("surrogate.logit_l2", 0.1);
    rc.loop.hpo_trials = static_cast<int>(cfg.get_int("surrogate.hpo_trials", 25));
    rc.loop.hpo_trials_late = static_cast<int>(cfg.get_int("surrogate.hpo_trials_late", 10));
    rc.loop.hpo_late_after = static_cast<int>(cfg.get_int("surrogate.hpo_late_after", 5));
    rc.loop.hpo_folds = static_cast<int>(cfg.get_int("surrogate.hpo_folds", 3));
    rc.loop.hpo_period = static_cast<int>(cfg.get_int("surrogate.hpo_period", 1));
    rc.loop.validate();

    rc.experiment_name = cfg.get_string("experiment.name", "experiment");
    const std::string type = cfg.get_string("experiment.type", "sweep");
    if (type == "sweep") rc.experiment_type = ExperimentType::sweep;
    else if (type == "robustness") rc.experiment_type = ExperimentType::robustness;
    else fail("config field 'experiment.type': unknown type '" + type + "'");

    rc.sweep.budgets.clear();
    for (const auto& b : cfg.get_list("experiment.budgets", {"250", "500", "1000"}))
        rc.sweep.budgets.push_back(static_cast<std::size_t>(parse_int(b, "experiment.budgets")));
    rc.sweep.repetitions = static_cast<int>(cfg.get_int("experiment.repetitions", 10));
    rc.sweep.oos_size = static_cast<std::size_t>(cfg.get_int("experiment.oos_size", 2000));
    rc.sweep.oos_scheme = parse_scheme(cfg.get_string("experiment.oos_scheme", "sobol"));
    rc.sweep.oos_seed = static_cast<std::uint64_t>(cfg.get_int("experiment.oos_seed", 0x005EED));
    rc.sweep.seed_base = static_cast<std::uint64_t>(cfg.get_int("experiment.seed", 1));
    rc.robustness.runs = static_cast<int>(cfg.get_int("experiment.runs", 5));
    rc.robustness.seed_base = rc.sweep.seed_base;
    rc.robustness.with_platt = cfg.get_bool("experiment.platt", true);
    if (rc.experiment_type == ExperimentType::sweep) rc.sweep.validate();
    return rc;
}

// True-model labeler for the configured model and criterion. Divergent or
// otherwise degenerate runs map to negative labels, never to exceptions.
inline Labeler make_labeler(const RunConfig& rc, const ReferenceReturns* ref) {
    switch (rc.model) {
        case ModelId::bh: {
            require(ref != nullptr, "bh labeler needs reference returns");
            const ParameterSpace space = rc.space;
            const ReferenceReturns reference = *ref;
            const BhCriterion crit = rc.bh_criterion;
            const OutcomeKind kind = rc.kind;
            const std::uint64_t seed = rc.abm_seed;
            const double noise = rc.bh_noise_sd;
            const bool cost_both = rc.bh_cost_both;
            const double x0 = rc.bh_x0;
            const double fundamental = rc.bh_fundamental;
            return [=](const double* v) {
                BHParams p = bh_params_from_vector(space, v);
                p.noise_sd = noise;
                p.cost_both_types = cost_both;
                p.fundamental = fundamental;
                const PriceSeries s = bh_simulate(p, seed, x0);
                return bh_label(s, reference, kind, crit);
            };
        }
        case ModelId::islands: {
            const ParameterSpace space = rc.space;
            const IslandsCriterion crit = rc.islands_criterion;
            const OutcomeKind kind = rc.kind;
            const std::uint64_t seed = rc.abm_seed;
            const int mc = rc.mc_size;
            return [=](const double* v) {
                const IslandParams p = islands_params_from_vector(space, v);
                if (mc <= 1) {
                    const GdpSeries g = islands_simulate(p, seed);
                    return islands_label(g, kind, crit);
                }
                // Monte Carlo over the stochastic seed: label from the MC
                // average growth rate (growth_only setting)
                double agr_sum = 0.0;
                for (int r = 0; r < mc; ++r) {
                    const GdpSeries g = islands_simulate(p, mix_seed(seed, static_cast<std::uint64_t>(r)));
                    agr_sum += avg_growth_rate(g);
                }
                const double agr = agr_sum / static_cast<double>(mc);
                CalibrationLabel l;
                l.kind = kind;
                l.binary_value = agr > crit.agr_threshold ? 1 : 0;
                l.real_value = kind == OutcomeKind::binary ? static_cast<double>(l.binary_value)
                                                           : (std::isfinite(agr) ? agr : -1.0);
                return l;
            };
        }
        case ModelId::synthetic: {
            const SyntheticModel m = rc.synthetic;
            const OutcomeKind kind = rc.kind;
            return [=](const double* v) { return m.label(v, kind); };
        }
    }
    fail("unreachable model id");
}

} // namespace surrocal
