#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cdgain/error.hpp"
#include "cdgain/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

using namespace cdgain;

namespace {

bool same_target(const Target& a, const Target& b) { return a == b; }

} // namespace

TEST_CASE("fitts id") {
    CHECK(fitts_id(0, 1) == 0.0);
    CHECK(fitts_id(7, 1) == 3.0);
    const double corner = (std::exp2(4.85) - 1.0) * 0.01;
    CHECK(fitts_id(corner, 0.01) == doctest::Approx(4.85).epsilon(1e-12));
    try {
        fitts_id(1, 0);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::invalid_width);
    }
}

TEST_CASE("id category") {
    CHECK(id_category(2.5) == 2);
    CHECK(id_category(2.51) == 3);
    CHECK(id_category(4.85) == 5);
    CHECK(id_category(1.5000001) == 2);
    CHECK(id_category(5.5) == 5);
    CHECK_THROWS_AS(id_category(1.5), Error);
    CHECK_THROWS_AS(id_category(5.51), Error);
    for (int k = 2; k <= 5; ++k)
        for (double x = k - 0.499; x <= k + 0.5; x += 0.01)
            CHECK(id_category(x) == k);
}

TEST_CASE("target set on the reference display") {
    const DisplayConfig cfg;
    const auto set = generate_target_set(cfg, 42);
    REQUIRE(set.size() == 120);
    const Rect disp = cfg.display_rect();
    std::map<int, int> per_dir;
    double diag = 0.0, horiz = 0.0;
    for (const Target& t : set) {
        ++per_dir[t.direction];
        CHECK(t.width >= 0.01);
        CHECK(t.id_value > 1.5);
        CHECK(t.id_value <= 5.5);
        CHECK(std::abs(t.id_value - fitts_id(t.distance, t.width)) <= 1e-12);
        CHECK(std::abs(distance(t.center, cfg.start_point) - t.distance) <= 1e-12);
        // the circle stays inside the display with the margin
        CHECK(t.center.x - t.width / 2 >= disp.min.x + cfg.edge_margin - 1e-12);
        CHECK(t.center.x + t.width / 2 <= disp.max.x - cfg.edge_margin + 1e-12);
        CHECK(t.center.y - t.width / 2 >= disp.min.y + cfg.edge_margin - 1e-12);
        CHECK(t.center.y + t.width / 2 <= disp.max.y - cfg.edge_margin + 1e-12);
        if (t.direction % 2 == 1)
            diag = std::max(diag, t.id_value);
        if (t.direction % 4 == 0)
            horiz = std::max(horiz, t.id_value);
    }
    for (int d = 0; d < 8; ++d)
        CHECK(per_dir[d] == 15);
    CHECK(diag == doctest::Approx(4.85).epsilon(0.02 / 4.85));
    CHECK(horiz == doctest::Approx(4.67).epsilon(0.02 / 4.67));
}

TEST_CASE("directions are 45 degrees apart in normalised coordinates") {
    const DisplayConfig cfg;
    CHECK(direction_unit(cfg, 0) == Vec2{1, 0});
    CHECK(direction_unit(cfg, 2) == Vec2{0, 1});
    CHECK(direction_unit(cfg, 4) == Vec2{-1, 0});
    CHECK(direction_unit(cfg, 6) == Vec2{0, -1});
    // odd directions aim at the corners of the reachable region
    const Vec2 u = direction_unit(cfg, 1);
    const double ax = cfg.width / 2 - cfg.min_target_width / 2 - cfg.edge_margin;
    const double ay = cfg.height / 2 - cfg.min_target_width / 2 - cfg.edge_margin;
    CHECK(u.y / u.x == doctest::Approx(ay / ax));
}

TEST_CASE("target generation is deterministic and seed dependent") {
    const DisplayConfig cfg;
    const auto a = generate_target_set(cfg, 7);
    const auto b = generate_target_set(cfg, 7);
    const auto c = generate_target_set(cfg, 8);
    CHECK(a == b);
    CHECK_FALSE(a == c);
}

TEST_CASE("category quota per direction where geometry permits") {
    const DisplayConfig cfg;
    const auto set = generate_target_set(cfg, 3);
    std::map<std::pair<int, int>, int> counts;
    for (const Target& t : set)
        ++counts[{t.direction, id_category(t.id_value)}];
    for (int d : {0, 1, 3, 4, 5, 7}) {
        CHECK(counts[{d, 2}] == 4);
        CHECK(counts[{d, 3}] == 4);
        CHECK(counts[{d, 4}] == 4);
        CHECK(counts[{d, 5}] == 3);
    }
    // vertical directions top out below category 5
    for (int d : {2, 6}) {
        CHECK(counts[{d, 5}] == 0);
        CHECK(counts[{d, 4}] == 7);
    }
}

TEST_CASE("display too small") {
    DisplayConfig cfg;
    cfg.width = 0.03;
    cfg.height = 0.03;
    cfg.phone = Rect::centered({0, 0}, 0.01, 0.01);
    try {
        generate_target_set(cfg, 1);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::config);
    }
}

TEST_CASE("display validation") {
    DisplayConfig cfg;
    cfg.phone = Rect::centered({0.3, 0}, 0.065, 0.12);
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = DisplayConfig{};
    cfg.start_point = {1, 1};
    CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("method orders") {
    std::set<std::array<Method, 3>> orders;
    for (int s = 0; s < 6; ++s)
        orders.insert(method_order(s));
    CHECK(orders.size() == 6);
    CHECK(method_order(0) == std::array<Method, 3>{Method::PT, Method::ST, Method::ZM});
    CHECK(method_order(6) == method_order(0));
}

TEST_CASE("session plan structure") {
    const DisplayConfig cfg;
    const SessionPlan plan = plan_session(4, cfg, 99);
    CHECK(plan == plan_session(4, cfg, 99));
    CHECK(plan.method_order == method_order(4));
    for (const MethodPlan& mp : plan.methods) {
        REQUIRE(mp.main.size() == 120);
        REQUIRE(mp.training.size() == 60);
        std::map<int, int> per_block;
        std::vector<Target> seen;
        for (std::size_t i = 0; i < mp.main.size(); ++i) {
            const PlannedTrial& t = mp.main[i];
            ++per_block[t.block];
            CHECK(t.trial == static_cast<int>(i) + 1);
            CHECK_FALSE(t.training);
            seen.push_back(t.target);
        }
        for (int b = 1; b <= 4; ++b)
            CHECK(per_block[b] == 30);
        // a permutation of the canonical set
        for (const Target& t : plan.canonical)
            CHECK(std::count_if(seen.begin(), seen.end(),
                                [&](const Target& s) { return same_target(s, t); }) ==
                  std::count_if(plan.canonical.begin(), plan.canonical.end(),
                                [&](const Target& s) { return same_target(s, t); }));
        for (const PlannedTrial& t : mp.training) {
            CHECK(t.training);
            CHECK(t.block <= 2);
        }
    }
    // methods get different orders
    CHECK_FALSE(plan.methods[0].main == plan.methods[1].main);
    CHECK_THROWS_AS(plan_session(-1, cfg, 1), Error);
}

TEST_CASE("accuracy") {
    CHECK(accuracy(98, 2) == doctest::Approx(0.98));
    CHECK(accuracy(5, 0) == 1.0);
    CHECK(accuracy(3, 1) == 0.75);
    try {
        accuracy(0, 0);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::undefined_accuracy);
    }
}
