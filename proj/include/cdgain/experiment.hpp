#pragma once

#include "cdgain/geometry.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace cdgain {

// PT: direct touch on the large display. ST: smartphone touch (dragging the
// environment). ZM: Z-Mapping. ZS: Z-Scaling (live sessions only).
enum class Method { PT, ST, ZM, ZS };

const char* to_string(Method m) noexcept;
Method parse_method(std::string_view name);

// Methods compared in the study, in the order used to enumerate the six
// counterbalancing permutations.
inline constexpr std::array<Method, 3> kStudyMethods{Method::PT, Method::ST, Method::ZM};

// Large-display geometry in display coordinates: meters, origin at the
// display center, x right, y up.
struct DisplayConfig {
    double width = 0.509;  // reference 16:9 panel, active area
    double height = 0.286;
    Rect phone = Rect::centered({0.0, 0.0}, 0.065, 0.12);
    Vec2 start_point{0.0, 0.0}; // red target location
    double min_target_width = 0.01;
    double edge_margin = 0.005; // gap between a target circle and the display edge
    double red_width = 0.02;

    Rect display_rect() const { return Rect::centered({0.0, 0.0}, width, height); }
    void validate() const;
};

struct Target {
    Vec2 center;
    double width = 0.0;    // diameter
    int direction = 0;     // 0..7, counter-clockwise from +x
    double distance = 0.0; // from the start point
    double id_value = 0.0;

    friend bool operator==(const Target&, const Target&) = default;
};

inline constexpr int kDirections = 8;
inline constexpr int kTargetsPerDirection = 15;
inline constexpr int kTargetsPerSet = kDirections * kTargetsPerDirection;
inline constexpr int kBlocks = 4;
inline constexpr int kTrialsPerBlock = 30;
inline constexpr int kTrainingTrials = 60;
// Targets per ID category 2, 3, 4, 5 within one direction.
inline constexpr std::array<int, 4> kCategoryQuota{4, 4, 4, 3};

// Shannon formulation: log2(D / W + 1).
double fitts_id(double distance, double width);

// Category k covers (k - 0.5, k + 0.5]; valid for 1.5 < id <= 5.5.
int id_category(double id_value);

// Unit vector for direction k. The eight directions are 45 degrees apart in
// display-normalised coordinates, so the odd ones aim at the corners of the
// region reachable by minimum-width targets.
Vec2 direction_unit(const DisplayConfig& cfg, int direction);

// Largest start-to-center distance along `unit` at which a circle of
// diameter `width` stays inside the display with the edge margin. Returns a
// negative value when no placement fits.
double max_distance(const DisplayConfig& cfg, Vec2 unit, double width);

// 15 targets per direction (quota 4/4/4/3 over ID categories 2..5). A nominal
// ID is drawn uniformly from its category, the target is pushed as far out as
// it fits, and widths below the minimum are clamped, which lowers the ID to
// the direction's ceiling. Deterministic in `seed`.
std::vector<Target> generate_target_set(const DisplayConfig& cfg, std::uint64_t seed);

struct PlannedTrial {
    Target target;
    int block = 1; // 1..4 main, 1..2 training
    int trial = 1; // 1-based within the method's main (or training) sequence
    bool training = false;

    friend bool operator==(const PlannedTrial&, const PlannedTrial&) = default;
};

struct MethodPlan {
    Method method = Method::PT;
    std::vector<PlannedTrial> training;
    std::vector<PlannedTrial> main;

    friend bool operator==(const MethodPlan&, const MethodPlan&) = default;
};

struct SessionPlan {
    int subject = 0;
    std::uint64_t seed = 0;
    std::array<Method, 3> method_order{};
    std::vector<Target> canonical;
    std::array<MethodPlan, 3> methods; // in method_order

    const MethodPlan& for_method(Method m) const;
    friend bool operator==(const SessionPlan&, const SessionPlan&) = default;
};

// Permutation number (subject mod 6) of kStudyMethods in lexicographic order.
std::array<Method, 3> method_order(int subject);

SessionPlan plan_session(int subject, const DisplayConfig& cfg, std::uint64_t seed);

// Shuffled main and training sequences for one method. plan_session uses it
// for the study methods; live ZS sessions use it directly.
MethodPlan plan_method(int subject, const std::vector<Target>& canonical, std::uint64_t seed,
                       Method method);

double accuracy(long hits, long misses);

} // namespace cdgain
