#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cdgain/error.hpp"
#include "cdgain/rng.hpp"
#include "cdgain/stats.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>

using namespace cdgain;

namespace {

template <typename F>
Errc error_code(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an error");
    return Errc::state;
}

// Independent mid-rank: count smaller values plus half the ties.
double rank_of(const std::vector<double>& v, std::size_t i) {
    double less = 0, equal = 0;
    for (double x : v) {
        if (x < v[i]) ++less;
        if (x == v[i]) ++equal;
    }
    return less + (equal + 1.0) / 2.0;
}

// Two-sided exact p by walking all 2^n sign patterns.
double brute_wilcoxon(const std::vector<double>& d) {
    std::vector<double> a;
    for (double v : d)
        if (v != 0.0) a.push_back(std::abs(v));
    const std::size_t n = a.size();
    std::vector<long long> r2(n);
    for (std::size_t i = 0; i < n; ++i)
        r2[i] = std::llround(2.0 * rank_of(a, i));
    long long obs = 0;
    for (std::size_t i = 0, j = 0; i < d.size(); ++i)
        if (d[i] != 0.0) {
            if (d[i] > 0) obs += r2[j];
            ++j;
        }
    double le = 0, ge = 0;
    const unsigned long long total = 1ULL << n;
    for (unsigned long long mask = 0; mask < total; ++mask) {
        long long s = 0;
        for (std::size_t i = 0; i < n; ++i)
            if (mask >> i & 1ULL) s += r2[i];
        if (s <= obs) le += 1;
        if (s >= obs) ge += 1;
    }
    return std::min(1.0, 2.0 * std::min(le, ge) / static_cast<double>(total));
}

double friedman_q(const std::vector<std::vector<double>>& ranks) {
    const double n = static_cast<double>(ranks.size());
    const double k = static_cast<double>(ranks[0].size());
    double ss = 0;
    for (std::size_t j = 0; j < ranks[0].size(); ++j) {
        double r = 0;
        for (const auto& row : ranks) r += row[j];
        ss += r * r;
    }
    return 12.0 / (n * k * (k + 1)) * ss - 3 * n * (k + 1);
}

} // namespace

TEST_CASE("shapiro-wilk matches the reference implementation") {
    std::ifstream in(std::string(CDGAIN_FIXTURES) + "/shapiro_reference.json");
    REQUIRE(in);
    const auto doc = nlohmann::json::parse(in);
    for (const auto& c : doc["cases"]) {
        const auto x = c["x"].get<std::vector<double>>();
        const TestResult r = shapiro_wilk(x);
        INFO(c["name"].get<std::string>());
        CHECK(std::abs(r.statistic - c["w"].get<double>()) < 1e-4);
        CHECK(std::abs(r.p_value - c["p"].get<double>()) < 1e-3);
    }
}

TEST_CASE("shapiro-wilk edge cases") {
    const std::vector<double> constant(10, 3.0);
    CHECK(error_code([&] { shapiro_wilk(constant); }) == Errc::test_inapplicable);
    const std::vector<double> two{1.0, 2.0};
    CHECK(error_code([&] { shapiro_wilk(two); }) == Errc::test_inapplicable);
    std::vector<double> bimodal;
    Rng rng(3);
    for (int i = 0; i < 10; ++i) bimodal.push_back(rng.normal(0, 0.5));
    for (int i = 0; i < 10; ++i) bimodal.push_back(100 + rng.normal(0, 0.5));
    CHECK(shapiro_wilk(bimodal).p_value < 0.05);
    // location/scale invariance
    std::vector<double> x;
    for (int i = 0; i < 30; ++i) x.push_back(rng.normal());
    std::vector<double> y;
    for (double v : x) y.push_back(3.0 * v + 100.0);
    CHECK(std::abs(shapiro_wilk(x).p_value - shapiro_wilk(y).p_value) < 1e-9);
}

TEST_CASE("wilcoxon exact equals sign enumeration") {
    Rng rng(17);
    for (int trial = 0; trial < 300; ++trial) {
        const int n = 5 + static_cast<int>(rng.below(8)); // 5..12
        std::vector<double> x(n), y(n);
        for (int i = 0; i < n; ++i) {
            // coarse values force ties and the odd zero difference
            x[i] = std::round(rng.normal(0, 2));
            y[i] = std::round(rng.normal(0.5, 2));
        }
        std::vector<double> d(n);
        int nonzero = 0;
        for (int i = 0; i < n; ++i) {
            d[i] = x[i] - y[i];
            nonzero += d[i] != 0.0;
        }
        if (nonzero < 5)
            continue;
        REQUIRE(wilcoxon_signed_rank(x, y).p_value == brute_wilcoxon(d));
    }
}

TEST_CASE("wilcoxon fixtures") {
    SUBCASE("five same-sign differences") {
        const std::vector<double> x{1, 2, 3, 4, 5}, y{0, 0, 0, 0, 0};
        const TestResult r = wilcoxon_signed_rank(x, y);
        CHECK(r.p_value == 0.0625);
        CHECK(r.statistic == 15.0);
    }
    SUBCASE("symmetric differences") {
        const std::vector<double> x{1, -1, 2, -2, 3, -3}, y(6, 0.0);
        CHECK(wilcoxon_signed_rank(x, y).p_value == 1.0);
    }
    SUBCASE("all zero") {
        const std::vector<double> x(8, 1.0);
        CHECK(error_code([&] { wilcoxon_signed_rank(x, x); }) == Errc::test_inapplicable);
    }
    SUBCASE("normal approximation, n = 30") {
        const std::vector<double> a{0.13, 1.29, 0.9, -1.09, -0.85, -0.41, -0.3, 0.7, -2.13, 1.29,
                                    -1.15, 1.04, -1.26, -0.21, 0.87, 0.04, 1.17, 2.51, -0.52, -0.97,
                                    -1.17, -1.5, -0.27, -1.6, -2.65, -0.65, 1.61, 0.26, -1.29, -0.88};
        const std::vector<double> b{1.1, 0.5, -0.12, 1.42, 0.59, -0.1, 0.29, 0.61, 1.57, -0.79,
                                    0.16, 0.0, -1.71, -0.38, -1.31, 0.4, 0.1, 0.58, 0.55, -1.32,
                                    0.27, 0.73, 1.22, 0.31, -0.31, 0.52, 1.62, 0.52, -1.4, 0.78};
        const TestResult r = wilcoxon_signed_rank(a, b);
        CHECK_FALSE(r.exact);
        CHECK(std::min(r.statistic, 465.0 - r.statistic) == 153.0);
        CHECK(r.p_value == doctest::Approx(0.10417496585208902).epsilon(1e-9));
    }
    SUBCASE("approximation against exact at n = 20 in the tail") {
        // Every attainable W+ for 20 untied differences: where the exact p is
        // at most 0.2 the corrected approximation is within 0.005.
        std::vector<double> y(20, 0.0);
        for (int mask_bits = 0; mask_bits <= 210; ++mask_bits) {
            // build differences 1..20 with signs whose positive rank sum is mask_bits
            std::vector<double> x(20);
            int need = mask_bits;
            for (int r = 20; r >= 1; --r) {
                if (need >= r) {
                    x[r - 1] = r;
                    need -= r;
                } else {
                    x[r - 1] = -r;
                }
            }
            REQUIRE(need == 0);
            const double exact = wilcoxon_signed_rank(x, y, 0.05, WilcoxonMethod::exact).p_value;
            const double approx = wilcoxon_signed_rank(x, y, 0.05, WilcoxonMethod::normal).p_value;
            if (exact <= 0.2)
                CHECK(std::abs(exact - approx) < 0.005);
        }
    }
    SUBCASE("swapping arguments keeps p") {
        const std::vector<double> x{3, 1, 4, 1, 5, 9, 2, 6}, y{2, 7, 1, 8, 2, 8, 1, 8};
        CHECK(wilcoxon_signed_rank(x, y).p_value == wilcoxon_signed_rank(y, x).p_value);
    }
}

TEST_CASE("friedman") {
    SUBCASE("identical columns") {
        const Matrix m{{1, 1, 1}, {2, 2, 2}, {3, 3, 3}};
        const TestResult r = friedman(m);
        CHECK(r.statistic == 0.0);
        CHECK(r.p_value == 1.0);
    }
    SUBCASE("exact p for three users and three methods") {
        Rng rng(5);
        for (int trial = 0; trial < 50; ++trial) {
            Matrix m(3, std::vector<double>(3));
            for (auto& row : m)
                for (auto& v : row) v = std::round(rng.normal(0, 2));
            std::vector<std::vector<double>> ranks;
            for (const auto& row : m) {
                std::vector<double> r(3);
                for (std::size_t i = 0; i < 3; ++i) r[i] = rank_of(row, i);
                ranks.push_back(r);
            }
            // enumerate all (3!)^3 rank configurations
            const double q_obs = friedman_q(ranks);
            std::vector<std::vector<double>> perms[3];
            for (int i = 0; i < 3; ++i) {
                std::vector<double> r = ranks[i];
                std::sort(r.begin(), r.end());
                std::vector<int> idx{0, 1, 2};
                do perms[i].push_back({r[idx[0]], r[idx[1]], r[idx[2]]});
                while (std::next_permutation(idx.begin(), idx.end()));
            }
            double hits = 0, total = 0;
            for (const auto& a : perms[0])
                for (const auto& b : perms[1])
                    for (const auto& c : perms[2]) {
                        total += 1;
                        if (friedman_q({a, b, c}) >= q_obs - 1e-9) hits += 1;
                    }
            const TestResult r = friedman(m);
            CHECK(r.exact);
            CHECK(std::abs(r.p_value - hits / total) < 0.01);
        }
    }
    SUBCASE("chi-square for larger samples") {
        const Matrix m{{-0.71, 0.36, 0.13}, {-0.27, 0.44, 2.13}, {1.58, 0.01, -0.03}, {0.89, 0.91, 1.05},
                       {-0.91, 1.04, 1.67}, {-1.78, 1.42, 0.73}, {-0.74, -1.18, 0.46}, {-0.06, 0.03, -0.4},
                       {-1.2, 1.11, 0.85}, {0.28, 1.03, 1.52}, {1.74, 0.33, 0.54}, {-0.96, 0.65, 1.06},
                       {-0.76, 0.37, 0.78}, {3.66, -0.11, 2.05}, {0.41, 0.31, 1.21}, {0.36, 0.37, 0.55},
                       {-0.37, 0.01, 1.08}, {-0.12, 1.36, 2.18}, {-0.06, 0.1, 2.12}, {-0.07, 0.61, 0.41}};
        const TestResult r = friedman(m);
        CHECK_FALSE(r.exact);
        CHECK(r.statistic == doctest::Approx(11.1).epsilon(1e-12));
        CHECK(r.p_value == doctest::Approx(0.003887457243476086).epsilon(1e-9));
        // label and monotone-transform invariance
        Matrix swapped = m, warped = m;
        for (auto& row : swapped) std::swap(row[0], row[2]);
        for (auto& row : warped)
            for (auto& v : row) v = std::exp(v) * 3 + 1;
        CHECK(friedman(swapped).statistic == r.statistic);
        CHECK(friedman(warped).statistic == r.statistic);
    }
    SUBCASE("null hypothesis rarely rejected") {
        Rng rng(2024);
        int rejected = 0;
        for (int run = 0; run < 200; ++run) {
            Matrix m(20, std::vector<double>(3));
            for (auto& row : m)
                for (auto& v : row) v = rng.normal();
            rejected += friedman(m).passed;
        }
        CHECK(rejected <= 20);
    }
}

TEST_CASE("repeated-measures anova") {
    SUBCASE("hand decomposition") {
        // grand mean 3.5; SS total 35, subjects 7, methods 26, error 2
        const Matrix m{{1, 2, 4}, {2, 3, 5}, {3, 3, 7}, {2, 4, 6}};
        const TestResult r = anova_rm(m);
        CHECK(std::abs(r.statistic - 39.0) < 1e-9);
        CHECK(r.df1 == 2);
        CHECK(r.df2 == 6);
        CHECK(r.p_value == doctest::Approx(0.0003644314868804664).epsilon(1e-9));
    }
    SUBCASE("identical columns") {
        const Matrix m{{0.1, 0.1, 0.1}, {0.7, 0.7, 0.7}, {0.3, 0.3, 0.3}};
        const TestResult r = anova_rm(m);
        CHECK(r.statistic == 0.0);
        CHECK(r.p_value == 1.0);
    }
    SUBCASE("zero residual") {
        const Matrix m{{1, 2, 3}, {2, 3, 4}, {5, 6, 7}};
        CHECK(error_code([&] { anova_rm(m); }) == Errc::test_inapplicable);
    }
    SUBCASE("two methods reduce to the paired t-test") {
        Rng rng(9);
        for (int trial = 0; trial < 100; ++trial) {
            std::vector<double> x(12), y(12);
            Matrix m;
            for (int i = 0; i < 12; ++i) {
                x[i] = rng.normal(1, 1);
                y[i] = x[i] + rng.normal(0.3, 0.5);
                m.push_back({x[i], y[i]});
            }
            const double t = paired_t(x, y).statistic;
            CHECK(std::abs(anova_rm(m).statistic - t * t) < 1e-9 * std::max(1.0, t * t));
        }
    }
    SUBCASE("per-user offsets do not matter") {
        Rng rng(10);
        Matrix m(15, std::vector<double>(3));
        for (auto& row : m)
            for (std::size_t j = 0; j < 3; ++j) row[j] = rng.normal(0.2 * j, 1);
        Matrix shifted = m;
        for (auto& row : shifted) {
            const double c = rng.uniform(-5, 5);
            for (auto& v : row) v += c;
        }
        CHECK(std::abs(anova_rm(m).statistic - anova_rm(shifted).statistic) < 1e-9);
        std::vector<double> a, b, sa, sb;
        for (std::size_t i = 0; i < m.size(); ++i) {
            a.push_back(m[i][0]);
            b.push_back(m[i][1]);
            sa.push_back(shifted[i][0]);
            sb.push_back(shifted[i][1]);
        }
        CHECK(std::abs(paired_t(a, b).statistic - paired_t(sa, sb).statistic) < 1e-9);
    }
    SUBCASE("against a statistics package") {
        const Matrix m{{-0.71, 0.36, 0.13}, {-0.27, 0.44, 2.13}, {1.58, 0.01, -0.03}, {0.89, 0.91, 1.05},
                       {-0.91, 1.04, 1.67}, {-1.78, 1.42, 0.73}, {-0.74, -1.18, 0.46}, {-0.06, 0.03, -0.4},
                       {-1.2, 1.11, 0.85}, {0.28, 1.03, 1.52}, {1.74, 0.33, 0.54}, {-0.96, 0.65, 1.06},
                       {-0.76, 0.37, 0.78}, {3.66, -0.11, 2.05}, {0.41, 0.31, 1.21}, {0.36, 0.37, 0.55},
                       {-0.37, 0.01, 1.08}, {-0.12, 1.36, 2.18}, {-0.06, 0.1, 2.12}, {-0.07, 0.61, 0.41}};
        const TestResult r = anova_rm(m);
        CHECK(r.statistic == doctest::Approx(5.7928).epsilon(1e-4));
        CHECK(r.p_value == doctest::Approx(0.0064).epsilon(0.02));
    }
}

TEST_CASE("paired t") {
    const std::vector<double> x{1.086, 0.886, 1.531, 0.678, 1.132, 0.971, 0.929, 1.213, 0.636, 0.803, 0.977, 1.348};
    const std::vector<double> y{1.195, 1.076, 1.445, 0.654, 1.329, 1.008, 1.023, 1.386, 0.515, 0.783, 1.068, 1.293};
    const TestResult r = paired_t(x, y);
    // t = mean(d) / (sd(d) / sqrt(n))
    std::vector<double> d;
    for (std::size_t i = 0; i < x.size(); ++i) d.push_back(x[i] - y[i]);
    CHECK(r.statistic == doctest::Approx(mean(d) / (sample_sd(d) / std::sqrt(12.0))).epsilon(1e-12));
    CHECK(r.statistic == doctest::Approx(-1.5373984740959579).epsilon(1e-9));
    CHECK(r.p_value == doctest::Approx(0.15244794535808578).epsilon(1e-9));
    CHECK(r.df1 == 11);
    const TestResult s = paired_t(y, x);
    CHECK(s.statistic == -r.statistic);
    CHECK(s.p_value == r.p_value);
    CHECK(error_code([&] { paired_t(x, x); }) == Errc::test_inapplicable);
}

TEST_CASE("bonferroni") {
    CHECK(bonferroni(0.05, 3) == 0.05 / 3);
    CHECK(bonferroni(0.05, 1) == 0.05);
    CHECK(bonferroni(0.10, 2) == 0.05);
    CHECK_THROWS_AS(bonferroni(0.05, 0), Error);
}

TEST_CASE("result invariants") {
    const TestResult r = make_result("x", 1.0, 0.01, 0.05);
    CHECK(r.passed);
    CHECK_FALSE(make_result("x", 1.0, 0.05, 0.05).passed);
    CHECK(make_result("x", 1.0, 1.5, 0.05).p_value == 1.0);
}
