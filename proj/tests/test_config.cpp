#include <doctest.h>

#include <cstdlib>
#include <string>

#include "surrocal/config.hpp"

using namespace surrocal;

namespace {

std::string error_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const error& e) {
        return e.what();
    }
    return "";
}

} // namespace

TEST_CASE("ini parsing: sections, comments, trimming") {
    const ConfigFile cfg = ConfigFile::parse_text(
        "# top comment\n"
        "[model]\n"
        "id = islands   ; trailing comment\n"
        "seed = 99\n"
        "\n"
        "[loop]\n"
        "budget = 123\n"
        "pool_size = 4000\n");
    CHECK(cfg.get_string("model.id", "") == "islands");
    CHECK(cfg.get_int("model.seed", 0) == 99);
    CHECK(cfg.get_int("loop.budget", 0) == 123);
    CHECK(cfg.get_string("missing.key", "fallback") == "fallback");
}

TEST_CASE("parse errors carry the line number") {
    CHECK(error_of([] { ConfigFile::parse_text("[model\nid = bh\n"); }).find("line 1") != std::string::npos);
    CHECK(error_of([] { ConfigFile::parse_text("[m]\njust a token\n"); }).find("line 2") != std::string::npos);
    CHECK(error_of([] { ConfigFile::parse_text("key = 1\n"); }).find("outside") != std::string::npos);
}

TEST_CASE("environment overrides map SURROCAL_SECTION_KEY onto section.key") {
    setenv("SURROCAL_LOOP_BUDGET", "777", 1);
    setenv("SURROCAL_MODEL_EXPLORE__BETA", "0,5", 1);
    ConfigFile cfg = ConfigFile::parse_text("[loop]\nbudget = 1\n");
    cfg.apply_env_overrides();
    CHECK(cfg.get_int("loop.budget", 0) == 777);
    CHECK(cfg.get_string("model.explore.beta", "") == "0,5");
    unsetenv("SURROCAL_LOOP_BUDGET");
    unsetenv("SURROCAL_MODEL_EXPLORE__BETA");
}

TEST_CASE("default bh run config spans the published box") {
    const RunConfig rc = build_run_config(ConfigFile::parse_text("[model]\nid = bh\n"));
    CHECK(rc.space.dimension() == 10);
    CHECK(rc.space.dims[0].name == "beta");
    CHECK(rc.space.dims[0].upper == 10.0);
    CHECK(rc.space.fixed_value("n1", 0) == 0.5);
    CHECK(rc.space.fixed_value("horizon", 0) == 500);
    CHECK(rc.bh_criterion.alpha == 0.05);
    CHECK(rc.loop.positive.threshold == 0.05);
    CHECK(rc.loop.positive.greater);
}

TEST_CASE("default islands config pins the fixed parameters") {
    const RunConfig rc = build_run_config(ConfigFile::parse_text("[model]\nid = islands\n"));
    CHECK(rc.space.dimension() == 5);
    CHECK(rc.space.fixed_value("lambda", 0) == 1.0);
    CHECK(rc.space.fixed_value("m0", 0) == 50);
    CHECK(rc.space.fixed_value("horizon", 0) == 1000);
    CHECK(rc.islands_criterion.agr_threshold == 0.02);
    CHECK(rc.islands_criterion.b_threshold == 1.0);
    CHECK_FALSE(rc.loop.positive.greater); // positive when the fitted shape <= 1
}

TEST_CASE("explored-range overrides apply and are validated") {
    const RunConfig rc = build_run_config(ConfigFile::parse_text(
        "[model]\nid = islands\nexplore.rho = 1, 4\nfixed.horizon = 200\n"));
    CHECK(rc.space.dims[0].lower == 1.0);
    CHECK(rc.space.dims[0].upper == 4.0);
    CHECK(rc.space.fixed_value("horizon", 0) == 200);

    const std::string msg = error_of([] {
        build_run_config(ConfigFile::parse_text("[model]\nid = islands\nexplore.rho = 4, 1\n"));
    });
    CHECK(msg.find("model.explore.rho") != std::string::npos);
}

TEST_CASE("a budget below the seed size is rejected at parse time") {
    const std::string msg = error_of([] {
        build_run_config(ConfigFile::parse_text("[model]\nid = synthetic\n[loop]\nbudget = 10\nseed_size = 35\n"));
    });
    CHECK(msg.find("budget") != std::string::npos);
}

TEST_CASE("unknown enumeration values name the field") {
    CHECK(error_of([] { build_run_config(ConfigFile::parse_text("[model]\nid = nope\n")); })
              .find("model.id") != std::string::npos);
    CHECK(error_of([] {
              build_run_config(ConfigFile::parse_text("[model]\nid = bh\n[criterion]\nkind = maybe\n"));
          }).find("maybe") != std::string::npos);
    CHECK(error_of([] {
              build_run_config(ConfigFile::parse_text("[model]\nid = islands\n[criterion]\nmode = x\n"));
          }).find("criterion.mode") != std::string::npos);
}

TEST_CASE("mc averaging demands the growth_only criterion") {
    const std::string msg = error_of([] {
        build_run_config(ConfigFile::parse_text("[model]\nid = islands\nmc_size = 5\n"));
    });
    CHECK(msg.find("growth_only") != std::string::npos);
    CHECK_NOTHROW(build_run_config(ConfigFile::parse_text(
        "[model]\nid = islands\nmc_size = 5\n[criterion]\nmode = growth_only\n")));
}

TEST_CASE("loop seeds derive deterministically from the base seed") {
    const RunConfig a = build_run_config(ConfigFile::parse_text("[model]\nid = synthetic\n[loop]\nseed = 5\n"));
    const RunConfig b = build_run_config(ConfigFile::parse_text("[model]\nid = synthetic\n[loop]\nseed = 5\n"));
    const RunConfig c = build_run_config(ConfigFile::parse_text("[model]\nid = synthetic\n[loop]\nseed = 6\n"));
    CHECK(a.loop.seed_sampler == b.loop.seed_sampler);
    CHECK(a.loop.seed_loop == b.loop.seed_loop);
    CHECK(a.loop.seed_sampler != c.loop.seed_sampler);
}

TEST_CASE("synthetic labeler reflects the distance criterion") {
    const RunConfig rc = build_run_config(ConfigFile::parse_text(
        "[model]\nid = synthetic\ndims = 3\ncenter = 0.5\nradius = 0.2\n[criterion]\nkind = real\n"));
    const Labeler labeler = make_labeler(rc, nullptr);
    const std::vector<double> center{0.5, 0.5, 0.5};
    const CalibrationLabel at_center = labeler(center.data());
    CHECK(at_center.real_value == 0.0);
    CHECK(rc.loop.positive.value_positive(at_center.real_value));
    const std::vector<double> corner{0.0, 0.0, 0.0};
    CHECK_FALSE(rc.loop.positive.value_positive(labeler(corner.data()).real_value));
}

TEST_CASE("the islands mc labeler averages growth over seeds") {
    const RunConfig rc = build_run_config(ConfigFile::parse_text(
        "[model]\nid = islands\nmc_size = 3\nseed = 17\n[criterion]\nmode = growth_only\nkind = real\n"));
    const Labeler labeler = make_labeler(rc, nullptr);
    std::vector<double> v{1.0, 1.2, 0.5, 0.3, 0.1}; // rho, alpha, phi, pi, epsilon
    const CalibrationLabel a = labeler(v.data());
    const CalibrationLabel b = labeler(v.data());
    CHECK(a.real_value == b.real_value); // pure in the vector
}
