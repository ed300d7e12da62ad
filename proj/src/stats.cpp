#include "cdgain/stats.hpp"

#include "cdgain/error.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numeric>

namespace cdgain {

namespace bm = boost::math;

TestResult make_result(std::string name, double statistic, double p, double alpha) {
    TestResult r;
    r.test_name = std::move(name);
    r.statistic = statistic;
    r.p_value = std::clamp(p, 0.0, 1.0);
    r.alpha_used = alpha;
    r.passed = r.p_value < alpha;
    return r;
}

double mean(std::span<const double> x) {
    if (x.empty())
        throw Error(Errc::insufficient_data, "mean of an empty sample");
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double sample_sd(std::span<const double> x) {
    if (x.size() < 2)
        return 0.0;
    const double m = mean(x);
    double ss = 0.0;
    for (double v : x)
        ss += (v - m) * (v - m);
    return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

double spearman_rho(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2)
        throw Error(Errc::invalid_argument, "Spearman needs two samples of equal length >= 2");
    const auto rx = midranks(x);
    const auto ry = midranks(y);
    const double mx = mean(rx), my = mean(ry);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0)
        return std::nan("");
    return sxy / std::sqrt(sxx * syy);
}

std::vector<double> midranks(std::span<const double> values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n);
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j + 1 < n && values[idx[j + 1]] == values[idx[i]])
            ++j;
        const double r = (static_cast<double>(i + j) + 2.0) / 2.0;
        for (std::size_t k = i; k <= j; ++k)
            ranks[idx[k]] = r;
        i = j + 1;
    }
    return ranks;
}

namespace {

template <std::size_t N>
double poly(const std::array<double, N>& c, double x) {
    double r = 0.0;
    for (std::size_t i = N; i-- > 0;)
        r = r * x + c[i];
    return r;
}

double normal_upper(double z) {
    return bm::cdf(bm::complement(bm::normal_distribution<>(), z));
}

} // namespace

TestResult inapplicable_result(std::string name, std::string why, double alpha) {
    TestResult r = make_result(std::move(name), std::nan(""), 1.0, alpha);
    r.note = std::move(why);
    return r;
}

TestResult shapiro_wilk(std::span<const double> data, double alpha) {
    const std::size_t n = data.size();
    if (n < 3 || n > 5000)
        throw Error(Errc::test_inapplicable, "Shapiro-Wilk needs 3 <= n <= 5000");
    std::vector<double> x(data.begin(), data.end());
    std::sort(x.begin(), x.end());
    const double range = x.back() - x.front();
    if (!(range > 1e-19 * std::max(1.0, std::abs(x.front()))))
        throw Error(Errc::test_inapplicable, "Shapiro-Wilk needs non-constant data");

    const std::size_t half = n / 2;
    const double an = static_cast<double>(n);
    std::vector<double> a(half);
    if (n == 3) {
        a[0] = std::sqrt(0.5);
    } else {
        static constexpr std::array<double, 6> c1{0.0, 0.221157, -0.147981, -2.07119, 4.434685, -2.706056};
        static constexpr std::array<double, 6> c2{0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633};
        std::vector<double> m(half);
        double summ2 = 0.0;
        for (std::size_t i = 0; i < half; ++i) {
            m[i] = bm::quantile(bm::normal_distribution<>(),
                                (static_cast<double>(i + 1) - 0.375) / (an + 0.25));
            summ2 += m[i] * m[i];
        }
        summ2 *= 2.0;
        const double ssumm2 = std::sqrt(summ2);
        const double rsn = 1.0 / std::sqrt(an);
        const double a1 = poly(c1, rsn) - m[0] / ssumm2;
        std::size_t first;
        double fac;
        if (n > 5) {
            const double a2 = -m[1] / ssumm2 + poly(c2, rsn);
            fac = std::sqrt((summ2 - 2.0 * m[0] * m[0] - 2.0 * m[1] * m[1]) /
                            (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2));
            a[1] = a2;
            first = 2;
        } else {
            fac = std::sqrt((summ2 - 2.0 * m[0] * m[0]) / (1.0 - 2.0 * a1 * a1));
            first = 1;
        }
        a[0] = a1;
        for (std::size_t i = first; i < half; ++i)
            a[i] = -m[i] / fac;
    }

    // Scale by the range as AS R94 does, to keep the sums well conditioned.
    double num = 0.0;
    for (std::size_t i = 0; i < half; ++i)
        num += a[i] * (x[n - 1 - i] - x[i]) / range;
    const double xbar = mean(x) / range;
    double ssq = 0.0;
    for (double v : x)
        ssq += (v / range - xbar) * (v / range - xbar);
    double w = std::min(1.0, num * num / ssq);

    double pw;
    if (n == 3) {
        w = std::max(w, 0.75);
        constexpr double pi6 = 6.0 / 3.14159265358979323846;
        constexpr double stqr = 3.14159265358979323846 / 3.0;
        pw = std::max(0.0, pi6 * (std::asin(std::sqrt(w)) - stqr));
    } else {
        double y = std::log(1.0 - w);
        const double xx = std::log(an);
        double mu, sigma;
        if (n <= 11) {
            const double gamma = -2.273 + 0.459 * an;
            if (y >= gamma) {
                TestResult r = make_result("shapiro-wilk", w, 1e-99, alpha);
                r.n = static_cast<int>(n);
                return r;
            }
            y = -std::log(gamma - y);
            static constexpr std::array<double, 4> c3{0.544, -0.39978, 0.025054, -6.714e-4};
            static constexpr std::array<double, 4> c4{1.3822, -0.77857, 0.062767, -0.0020322};
            mu = poly(c3, an);
            sigma = std::exp(poly(c4, an));
        } else {
            static constexpr std::array<double, 4> c5{-1.5861, -0.31082, -0.083751, 0.0038915};
            static constexpr std::array<double, 3> c6{-0.4803, -0.082676, 0.0030302};
            mu = poly(c5, xx);
            sigma = std::exp(poly(c6, xx));
        }
        pw = w >= 1.0 ? 1.0 : normal_upper((y - mu) / sigma);
    }
    TestResult r = make_result("shapiro-wilk", w, pw, alpha);
    r.n = static_cast<int>(n);
    return r;
}

namespace {

void check_matrix(const Matrix& m, const char* what) {
    if (m.size() < 2)
        throw Error(Errc::insufficient_data, std::string(what) + " needs at least 2 users");
    const std::size_t k = m.front().size();
    if (k < 2)
        throw Error(Errc::insufficient_data, std::string(what) + " needs at least 2 methods");
    for (const auto& row : m) {
        if (row.size() != k)
            throw Error(Errc::invalid_argument, std::string(what) + " needs a rectangular matrix");
        for (double v : row)
            if (!std::isfinite(v))
                throw Error(Errc::invalid_argument, std::string(what) + " needs finite values");
    }
}

} // namespace

TestResult anova_rm(const Matrix& m, double alpha) {
    check_matrix(m, "ANOVA");
    const std::size_t n = m.size();
    const std::size_t k = m.front().size();
    const double dn = static_cast<double>(n);
    const double dk = static_cast<double>(k);

    std::vector<double> col(k, 0.0), row(n, 0.0);
    double grand = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < k; ++j) {
            col[j] += m[i][j];
            row[i] += m[i][j];
            grand += m[i][j];
        }
    for (auto& c : col) c /= dn;
    for (auto& r : row) r /= dk;
    grand /= dn * dk;

    double ss_total = 0.0, ss_subjects = 0.0, ss_methods = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < k; ++j)
            ss_total += (m[i][j] - grand) * (m[i][j] - grand);
    for (double r : row)
        ss_subjects += dk * (r - grand) * (r - grand);
    for (double c : col)
        ss_methods += dn * (c - grand) * (c - grand);
    const double ss_error = ss_total - ss_subjects - ss_methods;

    const double df1 = dk - 1.0;
    const double df2 = (dk - 1.0) * (dn - 1.0);
    bool same_columns = true;
    for (std::size_t i = 0; i < n && same_columns; ++i)
        for (std::size_t j = 1; j < k; ++j)
            if (m[i][j] != m[i][0])
                same_columns = false;

    TestResult r;
    if (same_columns || ss_methods <= 1e-14 * ss_total) {
        r = make_result("anova-rm", 0.0, 1.0, alpha);
    } else if (ss_error <= 1e-12 * ss_total) {
        throw Error(Errc::test_inapplicable, "ANOVA residual variance is zero");
    } else {
        const double f = (ss_methods / df1) / (ss_error / df2);
        const double p = bm::cdf(bm::complement(bm::fisher_f_distribution<>(df1, df2), f));
        r = make_result("anova-rm", f, p, alpha);
    }
    r.df1 = df1;
    r.df2 = df2;
    r.n = static_cast<int>(n);
    return r;
}

namespace {

// Sum of squared column rank sums, in doubled-rank integer units.
long long doubled_square_sum(const std::vector<long long>& sums) {
    long long s = 0;
    for (long long v : sums)
        s += v * v;
    return s;
}

// P(sum_j R_j^2 >= observed) when each row's ranks are permuted uniformly.
double friedman_exact_p(const std::vector<std::vector<long long>>& doubled_rows,
                        long long observed) {
    const std::size_t k = doubled_rows.front().size();
    std::map<std::vector<long long>, double> dist{{std::vector<long long>(k, 0), 1.0}};
    for (const auto& row : doubled_rows) {
        std::vector<long long> perm = row;
        std::sort(perm.begin(), perm.end());
        // Distinct permutations, each weighted by its multiplicity so that all
        // k! assignments count equally.
        std::vector<std::vector<long long>> perms;
        do
            perms.push_back(perm);
        while (std::next_permutation(perm.begin(), perm.end()));
        const double weight = 1.0 / static_cast<double>(perms.size());
        std::map<std::vector<long long>, double> next;
        for (const auto& [sums, prob] : dist)
            for (const auto& p : perms) {
                std::vector<long long> s = sums;
                for (std::size_t j = 0; j < k; ++j)
                    s[j] += p[j];
                next[s] += prob * weight;
            }
        dist = std::move(next);
    }
    double p = 0.0;
    for (const auto& [sums, prob] : dist)
        if (doubled_square_sum(sums) >= observed)
            p += prob;
    return p;
}

} // namespace

TestResult friedman(const Matrix& m, double alpha) {
    check_matrix(m, "Friedman");
    const std::size_t n = m.size();
    const std::size_t k = m.front().size();
    const double dn = static_cast<double>(n);
    const double dk = static_cast<double>(k);

    std::vector<std::vector<long long>> doubled(n);
    std::vector<long long> sums(k, 0);
    double tie_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto r = midranks(m[i]);
        doubled[i].resize(k);
        for (std::size_t j = 0; j < k; ++j) {
            doubled[i][j] = std::llround(2.0 * r[j]);
            sums[j] += doubled[i][j];
        }
        std::vector<double> sorted(m[i]);
        std::sort(sorted.begin(), sorted.end());
        for (std::size_t a = 0; a < k;) {
            std::size_t b = a;
            while (b + 1 < k && sorted[b + 1] == sorted[a])
                ++b;
            const double t = static_cast<double>(b - a + 1);
            tie_sum += t * t * t - t;
            a = b + 1;
        }
    }

    const double denom = 1.0 - tie_sum / (dn * (dk * dk * dk - dk));
    TestResult r;
    if (denom <= 1e-12) {
        r = make_result("friedman", 0.0, 1.0, alpha);
    } else {
        double sum_sq = 0.0;
        for (long long s : sums)
            sum_sq += (static_cast<double>(s) / 2.0) * (static_cast<double>(s) / 2.0);
        const double q = std::max(
            0.0, (12.0 / (dn * dk * (dk + 1.0)) * sum_sq - 3.0 * dn * (dk + 1.0)) / denom);
        const double perms = std::pow(std::tgamma(dk + 1.0), dn);
        if (perms <= kFriedmanExactLimit) {
            r = make_result("friedman", q, friedman_exact_p(doubled, doubled_square_sum(sums)),
                            alpha);
            r.exact = true;
        } else {
            const double p =
                q > 0.0 ? bm::cdf(bm::complement(bm::chi_squared_distribution<>(dk - 1.0), q)) : 1.0;
            r = make_result("friedman", q, p, alpha);
        }
    }
    r.df1 = dk - 1.0;
    r.n = static_cast<int>(n);
    return r;
}

double bonferroni(double alpha, int m) {
    if (m < 1)
        throw Error(Errc::invalid_argument, "Bonferroni needs at least one comparison");
    return alpha / m;
}

TestResult paired_t(std::span<const double> x, std::span<const double> y, double alpha) {
    if (x.size() != y.size())
        throw Error(Errc::invalid_argument, "paired t-test needs equal lengths");
    if (x.size() < 2)
        throw Error(Errc::insufficient_data, "paired t-test needs n >= 2");
    std::vector<double> d(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        d[i] = x[i] - y[i];
    const double sd = sample_sd(d);
    if (!(sd > 0.0))
        throw Error(Errc::test_inapplicable, "paired t-test: differences have zero variance");
    const double n = static_cast<double>(d.size());
    const double t = mean(d) / (sd / std::sqrt(n));
    const double p = 2.0 * bm::cdf(bm::complement(bm::students_t_distribution<>(n - 1.0), std::abs(t)));
    TestResult r = make_result("paired-t", t, p, alpha);
    r.df1 = n - 1.0;
    r.n = static_cast<int>(d.size());
    return r;
}

TestResult wilcoxon_signed_rank(std::span<const double> x, std::span<const double> y,
                                double alpha, WilcoxonMethod method) {
    if (x.size() != y.size())
        throw Error(Errc::invalid_argument, "Wilcoxon test needs equal lengths");
    std::vector<double> d;
    for (std::size_t i = 0; i < x.size(); ++i)
        if (x[i] != y[i])
            d.push_back(x[i] - y[i]);
    if (d.empty())
        throw Error(Errc::test_inapplicable, "Wilcoxon test: all differences are zero");
    if (d.size() < 5)
        throw Error(Errc::test_inapplicable, "Wilcoxon test needs at least 5 non-zero differences");

    const std::size_t n = d.size();
    std::vector<double> absd(n);
    for (std::size_t i = 0; i < n; ++i)
        absd[i] = std::abs(d[i]);
    const auto ranks = midranks(absd);
    double w_plus = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        if (d[i] > 0.0)
            w_plus += ranks[i];

    const bool use_exact = method == WilcoxonMethod::exact ||
                           (method == WilcoxonMethod::automatic && n <= kWilcoxonExactMax);
    TestResult r;
    if (use_exact) {
        // Distribution of the doubled positive rank sum over all 2^n sign
        // patterns; doubled mid-ranks are integers.
        std::vector<long long> dr(n);
        long long total = 0;
        for (std::size_t i = 0; i < n; ++i) {
            dr[i] = std::llround(2.0 * ranks[i]);
            total += dr[i];
        }
        std::vector<double> count(static_cast<std::size_t>(total) + 1, 0.0);
        count[0] = 1.0;
        long long reach = 0;
        for (long long v : dr) {
            for (long long s = reach; s >= 0; --s)
                if (count[static_cast<std::size_t>(s)] != 0.0)
                    count[static_cast<std::size_t>(s + v)] += count[static_cast<std::size_t>(s)];
            reach += v;
        }
        const long long obs = std::llround(2.0 * w_plus);
        double lower = 0.0, upper = 0.0, all = 0.0;
        for (long long s = 0; s <= total; ++s) {
            const double c = count[static_cast<std::size_t>(s)];
            all += c;
            if (s <= obs) lower += c;
            if (s >= obs) upper += c;
        }
        r = make_result("wilcoxon", w_plus, std::min(1.0, 2.0 * std::min(lower, upper) / all), alpha);
        r.exact = true;
    } else {
        const double dn = static_cast<double>(n);
        double tie = 0.0;
        std::vector<double> sorted(absd);
        std::sort(sorted.begin(), sorted.end());
        for (std::size_t a = 0; a < n;) {
            std::size_t b = a;
            while (b + 1 < n && sorted[b + 1] == sorted[a])
                ++b;
            const double t = static_cast<double>(b - a + 1);
            tie += t * t * t - t;
            a = b + 1;
        }
        const double mu = dn * (dn + 1.0) / 4.0;
        const double var = dn * (dn + 1.0) * (2.0 * dn + 1.0) / 24.0 - tie / 48.0;
        const double z = std::max(0.0, std::abs(w_plus - mu) - 0.5) / std::sqrt(var);
        r = make_result("wilcoxon", w_plus, std::min(1.0, 2.0 * normal_upper(z)), alpha);
    }
    r.n = static_cast<int>(n);
    return r;
}

} // namespace cdgain
