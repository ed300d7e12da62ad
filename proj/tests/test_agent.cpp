#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cdgain/agent.hpp"
#include "cdgain/error.hpp"
#include "cdgain/experiment.hpp"

#include <cmath>
#include <map>

using namespace cdgain;

namespace {

AgentParams quiet() {
    AgentParams p;
    p.endpoint_noise_sigma = 0.0;
    p.mt_noise_sigma = 0.0;
    p.clutch_penalty = 0.0;
    return p;
}

// Lateral distance covered while not in contact, after the first touch-up.
double hover_after_first_tap(const std::vector<InputSample>& traj) {
    bool touching = false;
    bool after = false;
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < traj.size(); ++i) {
        if (traj[i].touch == TouchPhase::down) touching = true;
        if (traj[i].touch == TouchPhase::up) {
            touching = false;
            after = true;
        }
        if (after && !touching)
            total += distance(traj[i].p.xy(), traj[i + 1].p.xy());
    }
    return total;
}

} // namespace

TEST_CASE("noise-free agent never misses") {
    AgentParams p;
    p.endpoint_noise_sigma = 0.0;
    const SessionPlan plan = plan_session(4, {}, 99);
    for (const Method m : kStudyMethods) {
        SimulationSetup setup;
        const MethodRun run = simulate_method(session_settings(plan, m, setup), p, 7);
        REQUIRE(run.records.size() == 120);
        for (const auto& r : run.records) CHECK(r.misses == 0);
    }
}

TEST_CASE("simulation is deterministic in the seed") {
    const SessionPlan plan = plan_session(2, {}, 5);
    const AgentParams p;
    const auto a = simulate_session(plan, p, 11);
    const auto b = simulate_session(plan, p, 11);
    const auto c = simulate_session(plan, p, 12);
    CHECK(a == b);
    CHECK(a.size() == 360);
    CHECK(a != c);
}

TEST_CASE("records follow the block layout") {
    const SessionPlan plan = plan_session(0, {}, 1);
    SimulationSetup setup;
    setup.training = true;
    const MethodRun run = simulate_method(session_settings(plan, Method::ZM, setup), AgentParams{}, 3);
    REQUIRE(run.records.size() == 120);
    CHECK(run.trials.size() == 180);
    std::map<int, int> per_block;
    for (std::size_t i = 0; i < run.records.size(); ++i) {
        const auto& r = run.records[i];
        ++per_block[r.block];
        CHECK(r.trial == static_cast<int>(i) + 1);
        CHECK(r.block == static_cast<int>(i / 30) + 1);
        CHECK(r.method == Method::ZM);
        CHECK(r.movement_time > 0.0);
    }
    CHECK(per_block.size() == 4);
    for (const auto& [block, n] : per_block) CHECK(n == 30);
}

TEST_CASE("pointing time grows with difficulty") {
    std::map<int, std::pair<double, int>> by_cat;
    for (int subject = 0; subject < 10; ++subject) {
        const SessionPlan plan = plan_session(subject, {}, 100 + subject);
        const MethodRun run =
            simulate_method(session_settings(plan, Method::PT, {}), AgentParams{}, subject);
        for (const auto& r : run.records) {
            by_cat[r.id_category].first += r.movement_time;
            ++by_cat[r.id_category].second;
        }
    }
    REQUIRE(by_cat.size() == 4);
    double prev = 0.0;
    for (const auto& [cat, acc] : by_cat) {
        const double m = acc.first / acc.second;
        CHECK(m > prev);
        prev = m;
    }
}

TEST_CASE("without noise the first movement time is the motor Fitts law") {
    const AgentParams p = quiet();
    const auto targets = generate_target_set({}, 8);
    for (const Method m : kStudyMethods) {
        for (std::size_t i = 0; i < targets.size(); i += 7) {
            const auto out = simulate_trial(m, targets[i], {}, p, 1);
            CHECK(out.misses == 0);
            CHECK(std::abs(out.movement_time - (p.fitts_a + p.fitts_b * out.motor_id)) < 1e-9);
        }
    }
}

TEST_CASE("z-mapping hover travel is the display distance over the gain") {
    const AgentParams p = quiet();
    const HeightCalibration cal;
    ZMappingParams zp;
    zp.h_min = cal.h_min;
    zp.h_max = cal.h_max;
    for (const auto& t : generate_target_set({}, 21)) {
        const auto out = simulate_trial(Method::ZM, t, cal, p, 2);
        const double z = cal.h_min + p.arc_fraction(t.distance) * (cal.h_max - cal.h_min);
        const double expected = t.distance / zmap_gain(z, zp);
        CHECK(std::abs(out.motor_distance - expected) < 1e-9);
        CHECK(std::abs(hover_after_first_tap(out.trajectory) - expected) < 1e-9);
    }
}

TEST_CASE("gain variants change timing, not the record schema") {
    const SessionPlan plan = plan_session(1, {}, 77);
    SessionSettings a = session_settings(plan, Method::ZM, {});
    SessionSettings b = a;
    b.zmap.variant = GainVariant::paper_literal;
    const AgentParams p;
    const MethodRun ra = simulate_method(a, p, 4);
    const MethodRun rb = simulate_method(b, p, 4);
    REQUIRE(ra.records.size() == rb.records.size());
    double sa = 0, sb = 0;
    for (std::size_t i = 0; i < ra.records.size(); ++i) {
        CHECK(ra.records[i].target == rb.records[i].target);
        CHECK(ra.records[i].block == rb.records[i].block);
        sa += ra.records[i].movement_time;
        sb += rb.records[i].movement_time;
    }
    CHECK(std::abs(sa - sb) > 1e-3);
}

TEST_CASE("agent rejects what it cannot model") {
    const auto targets = generate_target_set({}, 1);
    CHECK_THROWS_AS(simulate_trial(Method::ZS, targets[0], {}, AgentParams{}, 1), Error);
    Target far = targets[0];
    far.center = {10.0, 0.0};
    try {
        simulate_trial(Method::PT, far, {}, AgentParams{}, 1);
        FAIL("expected a config error");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::config);
    }
    AgentParams bad;
    bad.fitts_b = 0.0;
    CHECK_THROWS_AS(simulate_trial(Method::PT, targets[0], {}, bad, 1), Error);
}
