#pragma once

#include <span>
#include <string>
#include <vector>

namespace cdgain {

struct TestResult {
    std::string test_name;
    double statistic = 0.0;
    double p_value = 1.0;
    double alpha_used = 0.05;
    bool passed = false;  // p_value < alpha_used
    double df1 = 0.0;     // 0 when not applicable
    double df2 = 0.0;
    int n = 0;
    bool exact = false;   // p from a permutation distribution
    std::string note;     // set when the test could not be applied
};

TestResult make_result(std::string name, double statistic, double p, double alpha);
// Placeholder for a test that could not run: NaN statistic, p = 1, not passed.
TestResult inapplicable_result(std::string name, std::string why, double alpha);

// Rows are users, columns are methods.
using Matrix = std::vector<std::vector<double>>;

// Royston's AS R94 approximation. 3 <= n <= 5000; zero range throws
// test_inapplicable.
TestResult shapiro_wilk(std::span<const double> x, double alpha = 0.05);

// One-way repeated-measures ANOVA, users as blocks.
TestResult anova_rm(const Matrix& m, double alpha = 0.05);

// Friedman statistic with tie correction. The p-value is exact (all row
// permutations) when (k!)^n <= kFriedmanExactLimit, chi-square otherwise.
inline constexpr double kFriedmanExactLimit = 1e6;
TestResult friedman(const Matrix& m, double alpha = 0.05);

double bonferroni(double alpha, int m);

// Two-sided, n - 1 degrees of freedom.
TestResult paired_t(std::span<const double> x, std::span<const double> y, double alpha = 0.05);

enum class WilcoxonMethod { automatic, exact, normal };

// Statistic is W+, the rank sum of positive differences x - y. Zero
// differences are dropped, ties get mid-ranks. Exact up to n = 25 under
// `automatic`; above that a normal approximation with tie-corrected variance
// and a 0.5 continuity correction.
inline constexpr int kWilcoxonExactMax = 25;
TestResult wilcoxon_signed_rank(std::span<const double> x, std::span<const double> y,
                                double alpha = 0.05,
                                WilcoxonMethod method = WilcoxonMethod::automatic);

// Mid-ranks (1-based) of `values`.
std::vector<double> midranks(std::span<const double> values);

double mean(std::span<const double> x);
double sample_sd(std::span<const double> x);

// Pearson correlation of the mid-ranks. NaN when either side is constant.
double spearman_rho(std::span<const double> x, std::span<const double> y);

} // namespace cdgain
