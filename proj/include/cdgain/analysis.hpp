#pragma once

#include "cdgain/experiment.hpp"
#include "cdgain/stats.hpp"
#include "cdgain/task.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace cdgain {

// Column order of every table: ZM, ST, PT.
inline constexpr std::array<Method, 3> kReportOrder{Method::ZM, Method::ST, Method::PT};

enum class Metric { movement_time, accuracy };
const char* to_string(Metric m) noexcept;

struct Grouping {
    enum class Kind { overall, block, id_category };
    Kind kind = Kind::overall;
    int k = 0; // block 1..4 or ID category 2..5

    bool contains(const TrialRecord& r) const;
    std::string label() const; // "Overall", "Block 1", "ID category 2"
    std::string key() const;   // "overall", "block_1", "id_cat_2"
    friend bool operator==(const Grouping&, const Grouping&) = default;
};

// overall, blocks 1-4, ID categories 2-5
std::vector<Grouping> all_groupings();

struct SampleGroup {
    Grouping grouping;
    Metric metric = Metric::movement_time;
    std::vector<int> users;           // ascending subject ids, one row each
    Matrix values;                    // users x kReportOrder
    std::vector<std::array<int, 3>> counts; // records per cell
};

// Per-user means (MT) or per-user accuracy over the grouping. A user with
// no record at all is not a row; a user with some methods but not all is a
// missing-data error.
SampleGroup aggregate_per_user(const std::vector<TrialRecord>& records, const Grouping& grouping,
                               Metric metric);

struct Descriptive {
    double mean = 0.0;
    double sd = 0.0;
};

struct PostHoc {
    Method first;
    Method second;
    TestResult result;
};

// ZM-ST, ZM-PT, PT-ST
inline constexpr std::array<std::array<Method, 2>, 3> kPostHocPairs{
    {{Method::ZM, Method::ST}, {Method::ZM, Method::PT}, {Method::PT, Method::ST}}};

struct GroupAnalysis {
    SampleGroup group;
    std::array<Descriptive, 3> descriptive;
    std::array<TestResult, 3> normality;
    bool normal = false; // all three passed the normality gate
    TestResult omnibus;
    double alpha = 0.05;
    double alpha_posthoc = 0.05 / 3;
    std::vector<PostHoc> posthoc; // empty unless omnibus.passed
};

GroupAnalysis run_pipeline(const SampleGroup& group, double alpha = 0.05);

struct PreferenceSection {
    std::string question;
    Matrix ranks; // users x kReportOrder, 1 = best
    std::array<Descriptive, 3> descriptive;
    TestResult omnibus;
    double alpha_posthoc = 0.05 / 3;
    std::vector<PostHoc> posthoc;
};

// Ranks must be 1..3 with each row a permutation; anything else is a data
// error.
PreferenceSection preference_analysis(std::string question, const Matrix& ranks,
                                      double alpha = 0.05);

struct PreferenceInput {
    std::string question;
    Matrix ranks;
};

struct AnalysisReport {
    double alpha = 0.05;
    int users = 0;
    std::size_t records = 0;
    std::vector<GroupAnalysis> movement_time; // in all_groupings() order
    std::vector<GroupAnalysis> accuracy;
    std::vector<PreferenceSection> preference;
};

AnalysisReport analyze(const std::vector<TrialRecord>& records, double alpha = 0.05,
                       const std::vector<PreferenceInput>& preferences = {});

// Mean MT per ID category 2..5 for one method, pooled over all records.
std::array<double, 4> category_means(const std::vector<TrialRecord>& records, Method m);

} // namespace cdgain
