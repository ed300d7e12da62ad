#include "cdgain/experiment.hpp"

#include "cdgain/error.hpp"
#include "cdgain/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

namespace cdgain {

const char* to_string(Method m) noexcept {
    switch (m) {
    case Method::PT: return "PT";
    case Method::ST: return "ST";
    case Method::ZM: return "ZM";
    case Method::ZS: return "ZS";
    }
    return "?";
}

Method parse_method(std::string_view name) {
    if (name == "PT") return Method::PT;
    if (name == "ST") return Method::ST;
    if (name == "ZM") return Method::ZM;
    if (name == "ZS") return Method::ZS;
    throw Error(Errc::validation, "unknown method '" + std::string(name) + "'");
}

void DisplayConfig::validate() const {
    if (!(width > 0.0) || !(height > 0.0) || !std::isfinite(width) || !std::isfinite(height))
        throw Error(Errc::validation, "display.width and display.height must be positive");
    const Rect disp = display_rect();
    if (!(phone.width() > 0.0) || !(phone.height() > 0.0) || !disp.contains(phone))
        throw Error(Errc::validation, "display.phone must be a non-empty rectangle inside the display");
    if (!disp.contains(start_point))
        throw Error(Errc::validation, "display.start_point must lie inside the display");
    if (!(min_target_width >= 0.01))
        throw Error(Errc::validation, "display.min_target_width must be at least 0.01 m");
    if (!(edge_margin >= 0.0))
        throw Error(Errc::validation, "display.edge_margin must be non-negative");
    if (!(red_width > 0.0))
        throw Error(Errc::validation, "display.red_width must be positive");
}

double fitts_id(double distance, double width) {
    if (!(width > 0.0))
        throw Error(Errc::invalid_width, "target width must be positive");
    if (!(distance >= 0.0))
        throw Error(Errc::invalid_argument, "target distance must be non-negative");
    return std::log2(distance / width + 1.0);
}

int id_category(double id_value) {
    if (!(id_value > 1.5 && id_value <= 5.5))
        throw Error(Errc::range, "ID " + std::to_string(id_value) + " outside (1.5, 5.5]");
    // k - 0.5 < id <= k + 0.5  <=>  k = ceil(id - 0.5)
    return static_cast<int>(std::ceil(id_value - 0.5));
}

namespace {

struct Bounds {
    // Limits for the circle's outer edge, relative to the start point.
    double right, left, top, bottom;
};

Bounds reach_bounds(const DisplayConfig& cfg) {
    const Rect d = cfg.display_rect();
    const Vec2 s = cfg.start_point;
    return {d.max.x - cfg.edge_margin - s.x, s.x - (d.min.x + cfg.edge_margin),
            d.max.y - cfg.edge_margin - s.y, s.y - (d.min.y + cfg.edge_margin)};
}

// Each axis side gives D * max(+-u, 0) + r <= bound, with r the radius.
// `radius_per_distance` expresses r as r = D * radius_per_distance + radius.
double solve_distance(const Bounds& b, Vec2 u, double radius_per_distance, double radius) {
    double best = std::numeric_limits<double>::infinity();
    const auto side = [&](double bound, double component) {
        const double rate = std::max(component, 0.0) + radius_per_distance;
        const double room = bound - radius;
        if (room < 0.0) {
            best = -1.0;
            return;
        }
        if (rate > 0.0)
            best = std::min(best, room / rate);
    };
    side(b.right, u.x);
    side(b.left, -u.x);
    side(b.top, u.y);
    side(b.bottom, -u.y);
    return best;
}

} // namespace

Vec2 direction_unit(const DisplayConfig& cfg, int direction) {
    if (direction < 0 || direction >= kDirections)
        throw Error(Errc::invalid_argument, "direction must be in 0..7");
    const double ax = cfg.width / 2.0 - cfg.min_target_width / 2.0 - cfg.edge_margin;
    const double ay = cfg.height / 2.0 - cfg.min_target_width / 2.0 - cfg.edge_margin;
    const double angle = direction * std::numbers::pi / 4.0;
    Vec2 v{std::cos(angle) * ax, std::sin(angle) * ay};
    // Snap the exact zeros so axis directions stay axis-aligned.
    if (direction % 4 == 2) v.x = 0.0;
    if (direction % 4 == 0) v.y = 0.0;
    return normalized(v);
}

double max_distance(const DisplayConfig& cfg, Vec2 unit, double width) {
    return solve_distance(reach_bounds(cfg), unit, 0.0, width / 2.0);
}

std::vector<Target> generate_target_set(const DisplayConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    const Bounds bounds = reach_bounds(cfg);
    std::vector<Target> targets;
    targets.reserve(kTargetsPerSet);

    for (int dir = 0; dir < kDirections; ++dir) {
        const Vec2 u = direction_unit(cfg, dir);
        Rng rng(derive_seed(seed, 0x7a46e7, static_cast<std::uint64_t>(dir)));

        const double ceiling_distance = max_distance(cfg, u, cfg.min_target_width);
        if (!(ceiling_distance > 0.0) ||
            fitts_id(ceiling_distance, cfg.min_target_width) <= 1.5)
            throw Error(Errc::config, "display too small to place category-2 targets in direction " +
                                          std::to_string(dir));

        for (int cat_index = 0; cat_index < 4; ++cat_index) {
            const int category = cat_index + 2;
            for (int i = 0; i < kCategoryQuota[static_cast<std::size_t>(cat_index)]; ++i) {
                // (k - 0.5, k + 0.5]
                const double nominal = category + 0.5 - rng.uniform();
                const double ratio = std::exp2(nominal) - 1.0; // D / W
                double distance = solve_distance(bounds, u, 0.5 / ratio, 0.0);
                double width = distance / ratio;
                if (width < cfg.min_target_width) {
                    width = cfg.min_target_width;
                    distance = ceiling_distance;
                }
                Target t;
                t.direction = dir;
                t.width = width;
                t.distance = distance;
                t.center = cfg.start_point + u * distance;
                t.id_value = fitts_id(distance, width);
                if (t.id_value <= 1.5)
                    throw Error(Errc::config, "display too small for category-2 targets");
                targets.push_back(t);
            }
        }
    }
    return targets;
}

const MethodPlan& SessionPlan::for_method(Method m) const {
    for (const auto& mp : methods)
        if (mp.method == m)
            return mp;
    throw Error(Errc::invalid_argument, std::string("method ") + to_string(m) + " not in plan");
}

std::array<Method, 3> method_order(int subject) {
    std::array<int, 3> idx{0, 1, 2};
    const int n = ((subject % 6) + 6) % 6;
    for (int i = 0; i < n; ++i)
        std::next_permutation(idx.begin(), idx.end());
    return {kStudyMethods[static_cast<std::size_t>(idx[0])],
            kStudyMethods[static_cast<std::size_t>(idx[1])],
            kStudyMethods[static_cast<std::size_t>(idx[2])]};
}

SessionPlan plan_session(int subject, const DisplayConfig& cfg, std::uint64_t seed) {
    if (subject < 0)
        throw Error(Errc::invalid_argument, "subject index must be non-negative");
    SessionPlan plan;
    plan.subject = subject;
    plan.seed = seed;
    plan.method_order = method_order(subject);
    plan.canonical = generate_target_set(cfg, seed);

    for (std::size_t m = 0; m < 3; ++m)
        plan.methods[m] = plan_method(subject, plan.canonical, seed, plan.method_order[m]);
    return plan;
}

MethodPlan plan_method(int subject, const std::vector<Target>& canonical, std::uint64_t seed,
                       Method method) {
    MethodPlan mp;
    mp.method = method;
    const auto n = canonical.size();
    const auto subject_key = static_cast<std::uint64_t>(subject) + 1;
    const auto method_key = static_cast<std::uint64_t>(method);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng main_rng(derive_seed(seed, subject_key, method_key, 1));
    main_rng.shuffle(std::span(order));
    for (std::size_t i = 0; i < n; ++i)
        mp.main.push_back({canonical[order[i]], static_cast<int>(i) / kTrialsPerBlock + 1,
                           static_cast<int>(i) + 1, false});

    std::iota(order.begin(), order.end(), 0);
    Rng training_rng(derive_seed(seed, subject_key, method_key, 2));
    training_rng.shuffle(std::span(order));
    for (std::size_t i = 0; i < static_cast<std::size_t>(kTrainingTrials) && i < n; ++i)
        mp.training.push_back({canonical[order[i]], static_cast<int>(i) / kTrialsPerBlock + 1,
                               static_cast<int>(i) + 1, true});
    return mp;
}

double accuracy(long hits, long misses) {
    if (hits < 0 || misses < 0)
        throw Error(Errc::invalid_argument, "hit and miss counts must be non-negative");
    if (hits + misses == 0)
        throw Error(Errc::undefined_accuracy, "accuracy undefined without attempts");
    return static_cast<double>(hits) / static_cast<double>(hits + misses);
}

} // namespace cdgain
