#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "cinetrack/config.hpp"
#include "test_support.hpp"

using namespace cinetrack;

TEST_CASE("defaults match the documented parameterization") {
    RunConfig cfg;
    CHECK(cfg.pre.low_pct == doctest::Approx(1.0));
    CHECK(cfg.pre.high_pct == doctest::Approx(99.0));
    CHECK(cfg.pre.gamma == doctest::Approx(0.8));
    CHECK(cfg.pre.sigma == doctest::Approx(0.7));
    CHECK(cfg.mf.pyramid_levels == 3);
    CHECK(cfg.mf.lk_window == 31);
    CHECK(cfg.det.scale_step == doctest::Approx(1.1));
    CHECK(cfg.det.region_side == 30);
    CHECK(cfg.det.region_history == 3);
    CHECK(cfg.det.min_win == 12);
    CHECK(cfg.det.patch_side == 12);
    CHECK(cfg.phantom.fps == doctest::Approx(4.347));
    CHECK(cfg.phantom.n_frames == 50);
    CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("set_key updates nested values and rejects unknown keys") {
    RunConfig cfg;
    cfg.set_key("pre.gamma", 1.2);
    CHECK(cfg.pre.gamma == doctest::Approx(1.2));
    cfg.set_key("det.scale_step", 1.2);
    CHECK(cfg.det.scale_step == doctest::Approx(1.2));
    cfg.set_key("phantom.pattern", std::string("sinusoid"));
    CHECK(cfg.phantom.pattern == MotionPattern::kSinusoid);

    CHECK_THROWS_AS(cfg.set_key("nope.key", 1.0), std::invalid_argument);
    CHECK_THROWS_AS(cfg.set_key("pre.gamma", std::string("abc")), std::invalid_argument);
}

TEST_CASE("json round trip applies flat keys") {
    RunConfig cfg;
    cfg.apply_json_text(R"({"pre.gamma": 0.9, "mf.grid": 8, "phantom.pattern": "static"})");
    CHECK(cfg.pre.gamma == doctest::Approx(0.9));
    CHECK(cfg.mf.grid == 8);
    CHECK(cfg.phantom.pattern == MotionPattern::kStatic);

    CHECK_THROWS_AS(cfg.apply_json_text(R"({"bogus.key": 1})"), std::invalid_argument);
    CHECK_THROWS_AS(cfg.apply_json_text("not json"), std::invalid_argument);
    CHECK_THROWS_AS(cfg.apply_json_text(R"([1,2,3])"), std::invalid_argument);
}

TEST_CASE("top-level seed flows into module seeds unless overridden") {
    RunConfig cfg;
    cfg.set_key("seed", 7.0);
    CHECK(cfg.det.seed == 7);
    CHECK(cfg.phantom.seed == 7);

    RunConfig cfg2;
    cfg2.set_key("det.seed", 99.0);
    cfg2.set_key("seed", 7.0);
    CHECK(cfg2.det.seed == 99);
    CHECK(cfg2.phantom.seed == 7);
}

TEST_CASE("config hash is stable and sensitive") {
    RunConfig a, b;
    CHECK(a.hash() == b.hash());
    b.set_key("pre.gamma", 0.81);
    CHECK(a.hash() != b.hash());
    CHECK(a.hash().size() == 16);
}

TEST_CASE("validation propagates to modules") {
    RunConfig cfg;
    cfg.set_key("mf.lk_window", 10.0);  // even window
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}
