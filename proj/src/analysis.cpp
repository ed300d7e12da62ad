#include "cdgain/analysis.hpp"

#include "cdgain/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace cdgain {

const char* to_string(Metric m) noexcept {
    return m == Metric::movement_time ? "movement_time" : "accuracy";
}

bool Grouping::contains(const TrialRecord& r) const {
    switch (kind) {
    case Kind::overall: return true;
    case Kind::block: return r.block == k;
    case Kind::id_category: return r.id_category == k;
    }
    return false;
}

std::string Grouping::label() const {
    switch (kind) {
    case Kind::overall: return "Overall";
    case Kind::block: return "Block " + std::to_string(k);
    case Kind::id_category: return "ID category " + std::to_string(k);
    }
    return {};
}

std::string Grouping::key() const {
    switch (kind) {
    case Kind::overall: return "overall";
    case Kind::block: return "block_" + std::to_string(k);
    case Kind::id_category: return "id_cat_" + std::to_string(k);
    }
    return {};
}

std::vector<Grouping> all_groupings() {
    std::vector<Grouping> g{{Grouping::Kind::overall, 0}};
    for (int b = 1; b <= kBlocks; ++b) g.push_back({Grouping::Kind::block, b});
    for (int c = 2; c <= 5; ++c) g.push_back({Grouping::Kind::id_category, c});
    return g;
}

namespace {

int column_of(Method m) {
    for (std::size_t j = 0; j < kReportOrder.size(); ++j)
        if (kReportOrder[j] == m) return static_cast<int>(j);
    return -1;
}

struct Cell {
    double mt_sum = 0.0;
    long hits = 0;
    long misses = 0;
    int n = 0;
};

std::vector<double> column(const Matrix& m, std::size_t j) {
    std::vector<double> c;
    c.reserve(m.size());
    for (const auto& row : m) c.push_back(row[j]);
    return c;
}

std::array<Descriptive, 3> describe(const Matrix& m) {
    std::array<Descriptive, 3> d{};
    if (m.empty())
        return d;
    for (std::size_t j = 0; j < 3; ++j) {
        const auto c = column(m, j);
        d[j] = {mean(c), sample_sd(c)};
    }
    return d;
}

template <typename F>
TestResult guarded(const char* name, double alpha, F&& f) {
    try {
        return f();
    } catch (const Error& e) {
        if (e.code() != Errc::test_inapplicable && e.code() != Errc::insufficient_data)
            throw;
        return inapplicable_result(name, e.what(), alpha);
    }
}

std::vector<PostHoc> posthoc_tests(const Matrix& m, bool parametric, double alpha_b) {
    std::vector<PostHoc> out;
    for (const auto& [a, b] : kPostHocPairs) {
        const auto x = column(m, static_cast<std::size_t>(column_of(a)));
        const auto y = column(m, static_cast<std::size_t>(column_of(b)));
        TestResult r = parametric
                           ? guarded("paired-t", alpha_b, [&] { return paired_t(x, y, alpha_b); })
                           : guarded("wilcoxon", alpha_b,
                                     [&] { return wilcoxon_signed_rank(x, y, alpha_b); });
        out.push_back({a, b, std::move(r)});
    }
    return out;
}

} // namespace

SampleGroup aggregate_per_user(const std::vector<TrialRecord>& records, const Grouping& grouping,
                               Metric metric) {
    std::map<int, std::array<Cell, 3>> cells;
    for (const auto& r : records) {
        const int j = column_of(r.method);
        if (j < 0)
            throw Error(Errc::data, std::string("method ") + to_string(r.method) +
                                        " is not part of the analysis");
        auto& row = cells[r.subject];
        if (!grouping.contains(r))
            continue;
        Cell& c = row[static_cast<std::size_t>(j)];
        c.mt_sum += r.movement_time;
        c.hits += r.hit ? 1 : 0;
        c.misses += r.misses;
        ++c.n;
    }
    SampleGroup g;
    g.grouping = grouping;
    g.metric = metric;
    for (const auto& [user, row] : cells) {
        std::vector<double> values(3);
        std::array<int, 3> counts{};
        for (std::size_t j = 0; j < 3; ++j) {
            const Cell& c = row[j];
            if (c.n == 0)
                throw Error(Errc::missing_data,
                            "subject " + std::to_string(user) + " has no " +
                                to_string(kReportOrder[j]) + " records in " + grouping.label());
            values[j] = metric == Metric::movement_time ? c.mt_sum / c.n : accuracy(c.hits, c.misses);
            counts[j] = c.n;
        }
        g.users.push_back(user);
        g.values.push_back(std::move(values));
        g.counts.push_back(counts);
    }
    return g;
}

GroupAnalysis run_pipeline(const SampleGroup& group, double alpha) {
    if (group.values.size() < 2)
        throw Error(Errc::insufficient_data, "the analysis needs at least two users");
    GroupAnalysis a;
    a.group = group;
    a.alpha = alpha;
    a.alpha_posthoc = bonferroni(alpha, static_cast<int>(kPostHocPairs.size()));
    a.descriptive = describe(group.values);
    a.normal = true;
    for (std::size_t j = 0; j < 3; ++j) {
        const auto c = column(group.values, j);
        a.normality[j] = guarded("shapiro-wilk", alpha, [&] { return shapiro_wilk(c, alpha); });
        if (std::isnan(a.normality[j].statistic) || a.normality[j].passed)
            a.normal = false;
    }
    a.omnibus = a.normal ? guarded("anova-rm", alpha, [&] { return anova_rm(group.values, alpha); })
                         : guarded("friedman", alpha, [&] { return friedman(group.values, alpha); });
    if (a.omnibus.passed)
        a.posthoc = posthoc_tests(group.values, a.normal, a.alpha_posthoc);
    return a;
}

PreferenceSection preference_analysis(std::string question, const Matrix& ranks, double alpha) {
    if (ranks.size() < 2)
        throw Error(Errc::data, "preference ranks need at least two users");
    for (std::size_t i = 0; i < ranks.size(); ++i) {
        const auto& row = ranks[i];
        std::set<double> seen(row.begin(), row.end());
        const bool ok = row.size() == 3 && seen == std::set<double>{1.0, 2.0, 3.0};
        if (!ok)
            throw Error(Errc::data, "preference row " + std::to_string(i + 1) +
                                        " of '" + question + "' is not a ranking of 1, 2, 3");
    }
    PreferenceSection s;
    s.question = std::move(question);
    s.ranks = ranks;
    s.descriptive = describe(ranks);
    s.alpha_posthoc = bonferroni(alpha, static_cast<int>(kPostHocPairs.size()));
    s.omnibus = guarded("friedman", alpha, [&] { return friedman(ranks, alpha); });
    if (s.omnibus.passed)
        s.posthoc = posthoc_tests(ranks, false, s.alpha_posthoc);
    return s;
}

namespace {

// Descriptive statistics only, for logs that cannot support the tests (a
// method missing entirely, or a single user).
GroupAnalysis describe_only(const std::vector<TrialRecord>& records, const Grouping& grouping,
                            Metric metric, double alpha, const std::string& why) {
    GroupAnalysis a;
    a.group.grouping = grouping;
    a.group.metric = metric;
    a.alpha = alpha;
    a.alpha_posthoc = bonferroni(alpha, static_cast<int>(kPostHocPairs.size()));
    std::map<int, std::array<Cell, 3>> cells;
    for (const auto& r : records) {
        const int j = column_of(r.method);
        if (j < 0 || !grouping.contains(r))
            continue;
        Cell& c = cells[r.subject][static_cast<std::size_t>(j)];
        c.mt_sum += r.movement_time;
        c.hits += r.hit ? 1 : 0;
        c.misses += r.misses;
        ++c.n;
    }
    for (std::size_t j = 0; j < 3; ++j) {
        std::vector<double> v;
        for (const auto& [user, row] : cells)
            if (row[j].n > 0)
                v.push_back(metric == Metric::movement_time ? row[j].mt_sum / row[j].n
                                                            : accuracy(row[j].hits, row[j].misses));
        a.descriptive[j] = v.empty() ? Descriptive{std::nan(""), std::nan("")} : Descriptive{mean(v), sample_sd(v)};
        a.normality[j] = inapplicable_result("shapiro-wilk", why, alpha);
    }
    for (const auto& [user, row] : cells) a.group.users.push_back(user);
    a.omnibus = inapplicable_result("omnibus", why, alpha);
    return a;
}

} // namespace

AnalysisReport analyze(const std::vector<TrialRecord>& records, double alpha,
                       const std::vector<PreferenceInput>& preferences) {
    AnalysisReport report;
    report.alpha = alpha;
    report.records = records.size();
    std::set<int> users;
    std::array<bool, 3> present{};
    for (const auto& r : records) {
        users.insert(r.subject);
        const int j = column_of(r.method);
        if (j >= 0)
            present[static_cast<std::size_t>(j)] = true;
    }
    report.users = static_cast<int>(users.size());
    const bool complete = present[0] && present[1] && present[2] && users.size() >= 2;
    const std::string why = "tests need all three methods and at least two subjects";
    for (const Grouping& g : all_groupings()) {
        for (const Metric m : {Metric::movement_time, Metric::accuracy}) {
            GroupAnalysis a = complete ? run_pipeline(aggregate_per_user(records, g, m), alpha)
                                       : describe_only(records, g, m, alpha, why);
            (m == Metric::movement_time ? report.movement_time : report.accuracy).push_back(std::move(a));
        }
    }
    for (const auto& p : preferences)
        report.preference.push_back(preference_analysis(p.question, p.ranks, alpha));
    return report;
}

std::array<double, 4> category_means(const std::vector<TrialRecord>& records, Method m) {
    std::array<double, 4> sum{};
    std::array<int, 4> n{};
    for (const auto& r : records) {
        if (r.method != m || r.id_category < 2 || r.id_category > 5)
            continue;
        sum[static_cast<std::size_t>(r.id_category - 2)] += r.movement_time;
        ++n[static_cast<std::size_t>(r.id_category - 2)];
    }
    std::array<double, 4> out{};
    for (std::size_t i = 0; i < 4; ++i)
        out[i] = n[i] > 0 ? sum[i] / n[i] : std::nan("");
    return out;
}

} // namespace cdgain
