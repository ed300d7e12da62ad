#include "cdgain/report.hpp"

#include "cdgain/error.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <cmath>

namespace cdgain {

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

ordered_json number_or_null(double v) {
    return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr);
}

ordered_json to_json(const TestResult& r) {
    ordered_json j;
    j["test"] = r.test_name;
    j["statistic"] = number_or_null(r.statistic);
    j["p"] = r.p_value;
    j["alpha"] = r.alpha_used;
    j["passed"] = r.passed;
    j["df1"] = r.df1;
    j["df2"] = r.df2;
    j["n"] = r.n;
    j["exact"] = r.exact;
    if (!r.note.empty())
        j["note"] = r.note;
    return j;
}

ordered_json to_json(const std::array<Descriptive, 3>& d) {
    ordered_json j;
    for (std::size_t i = 0; i < 3; ++i)
        j[to_string(kReportOrder[i])] = {{"mean", number_or_null(d[i].mean)}, {"sd", number_or_null(d[i].sd)}};
    return j;
}

ordered_json to_json(const std::vector<PostHoc>& ph) {
    ordered_json a = ordered_json::array();
    for (const auto& p : ph)
        a.push_back({{"first", to_string(p.first)}, {"second", to_string(p.second)}, {"result", to_json(p.result)}});
    return a;
}

ordered_json to_json(const GroupAnalysis& g) {
    ordered_json j;
    j["group"] = g.group.grouping.key();
    j["label"] = g.group.grouping.label();
    j["users"] = g.group.users.size();
    j["descriptive"] = to_json(g.descriptive);
    ordered_json n;
    for (std::size_t i = 0; i < 3; ++i) n[to_string(kReportOrder[i])] = to_json(g.normality[i]);
    j["normality"] = n;
    j["normal"] = g.normal;
    j["omnibus"] = to_json(g.omnibus);
    j["alpha_posthoc"] = g.alpha_posthoc;
    j["posthoc"] = to_json(g.posthoc);
    return j;
}

// ---- text rendering ----

std::size_t width(const std::string& s) {
    std::size_t n = 0;
    for (unsigned char c : s)
        if ((c & 0xC0) != 0x80) ++n;
    return n;
}

using Table = std::vector<std::vector<std::string>>; // first row is the header

std::string render_table(const std::string& title, const Table& t) {
    std::vector<std::size_t> w;
    for (const auto& row : t)
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (w.size() <= i) w.push_back(0);
            w[i] = std::max(w[i], width(row[i]));
        }
    std::string rule = "+";
    for (std::size_t x : w) rule += std::string(x + 2, '-') + "+";
    std::string out = title + "\n" + rule + "\n";
    for (std::size_t r = 0; r < t.size(); ++r) {
        out += "|";
        for (std::size_t i = 0; i < w.size(); ++i) {
            const std::string cell = i < t[r].size() ? t[r][i] : "";
            out += " " + cell + std::string(w[i] - width(cell), ' ') + " |";
        }
        out += "\n";
        if (r == 0)
            out += rule + "\n";
    }
    return out + rule + "\n\n";
}

const json& at(const json& j, const char* key) {
    const auto it = j.find(key);
    if (it == j.end())
        throw Error(Errc::parse, std::string("report JSON lacks '") + key + "'");
    return *it;
}

double num(const json& j, const char* key) {
    const json& v = at(j, key);
    if (v.is_null())
        return std::nan("");
    if (!v.is_number())
        throw Error(Errc::parse, std::string("report JSON field '") + key + "' is not a number");
    return v.get<double>();
}

std::string method_header(const json& report, std::size_t i) {
    return at(report, "methods").at(i).get<std::string>();
}

std::string mu_sigma(const json& d, int decimals) {
    if (std::isnan(num(d, "mean")))
        return "n/a";
    return fmt::format("μ = {:.{}f}, σ = {:.{}f}", num(d, "mean"), decimals, num(d, "sd"), decimals);
}

std::string passed(const json& r) {
    return at(r, "passed").get<bool>() ? "yes" : "no";
}

std::string p_cell(const json& r) {
    if (at(r, "statistic").is_null())
        return "n/a";
    return format_p(num(r, "p"));
}

std::string test_label(const std::string& name) {
    if (name == "anova-rm") return "ANOVA";
    if (name == "friedman") return "Friedman";
    if (name == "paired-t") return "t-test";
    if (name == "wilcoxon") return "Wilcoxon";
    if (name == "shapiro-wilk") return "Shapiro-Wilk";
    return name;
}

std::string render_metric(const json& report, const json& groups, const std::string& name,
                          const std::string& unit, int decimals) {
    std::string out;
    std::vector<std::string> header{""};
    for (std::size_t i = 0; i < 3; ++i) header.push_back(method_header(report, i));

    const auto descriptive = [&](const std::string& title, const std::string& prefix) {
        Table t{header};
        for (const auto& g : groups) {
            const std::string key = at(g, "group").get<std::string>();
            if (key.rfind(prefix, 0) != 0)
                continue;
            std::vector<std::string> row{at(g, "label").get<std::string>()};
            for (std::size_t i = 0; i < 3; ++i)
                row.push_back(mu_sigma(at(at(g, "descriptive"), header[i + 1].c_str()), decimals));
            t.push_back(row);
        }
        if (t.size() > 1)
            out += render_table(title, t);
    };
    descriptive(fmt::format("{}{}: means and standard deviations, overall", name, unit), "overall");
    descriptive(fmt::format("{}{}: means and standard deviations by block", name, unit), "block_");
    descriptive(fmt::format("{}{}: means and standard deviations by ID category", name, unit), "id_cat_");

    Table norm{{""}};
    for (const auto& g : groups) norm[0].push_back(at(g, "label").get<std::string>());
    for (std::size_t i = 0; i < 3; ++i) {
        std::vector<std::string> row{header[i + 1]};
        for (const auto& g : groups) row.push_back(p_cell(at(at(g, "normality"), header[i + 1].c_str())));
        norm.push_back(row);
    }
    out += render_table(fmt::format("{}: Shapiro-Wilk p-values", name), norm);

    Table omni{{"", "Test", "p-value", "Passed?"}};
    for (const auto& g : groups) {
        const json& o = at(g, "omnibus");
        omni.push_back({at(g, "label").get<std::string>(), test_label(at(o, "test").get<std::string>()),
                        p_cell(o), passed(o)});
    }
    out += render_table(fmt::format("{}: omnibus tests (alpha = {:.2f})", name, num(report, "alpha")), omni);

    Table post{{"Group", "Method 1", "Method 2", "Test", "p-value", "Passed?"}};
    for (const auto& g : groups) {
        const json& ph = at(g, "posthoc");
        bool first = true;
        for (const auto& p : ph) {
            const json& r = at(p, "result");
            post.push_back({first ? at(g, "label").get<std::string>() : "", at(p, "first").get<std::string>(),
                            at(p, "second").get<std::string>(), test_label(at(r, "test").get<std::string>()),
                            p_cell(r), passed(r)});
            first = false;
        }
        if (ph.empty())
            post.push_back({at(g, "label").get<std::string>(), "-", "-", "-", "omnibus not passed", "-"});
    }
    out += render_table(fmt::format("{}: post-hoc tests (alpha_b = {:.3f})", name, num(report, "alpha_posthoc")),
                        post);
    return out;
}

std::string render(const json& report) {
    if (!report.is_object())
        throw Error(Errc::parse, "report JSON must be an object");
    std::string out = fmt::format("Subjects: {}   Trials: {}   alpha = {:.2f}   alpha_b = {:.3f}\n\n",
                                  at(report, "users").get<int>(), at(report, "records").get<long long>(),
                                  num(report, "alpha"), num(report, "alpha_posthoc"));
    const json& metrics = at(report, "metrics");
    out += render_metric(report, at(metrics, "movement_time"), "Movement time", " (s)", 2);
    out += render_metric(report, at(metrics, "accuracy"), "Accuracy", "", 2);

    const json& pref = at(report, "preference");
    if (!pref.empty()) {
        std::vector<std::string> header{""};
        for (std::size_t i = 0; i < 3; ++i) header.push_back(method_header(report, i));
        Table means{header};
        Table omni{{"Question", "Test", "p-value", "Passed?"}};
        Table post{{"Question", "Method 1", "Method 2", "Test", "p-value", "Passed?"}};
        for (const auto& q : pref) {
            const std::string label = at(q, "question").get<std::string>();
            std::vector<std::string> row{label};
            for (std::size_t i = 0; i < 3; ++i)
                row.push_back(mu_sigma(at(at(q, "descriptive"), header[i + 1].c_str()), 2));
            means.push_back(row);
            const json& o = at(q, "omnibus");
            omni.push_back({label, test_label(at(o, "test").get<std::string>()), p_cell(o), passed(o)});
            bool first = true;
            for (const auto& p : at(q, "posthoc")) {
                const json& r = at(p, "result");
                post.push_back({first ? label : "", at(p, "first").get<std::string>(),
                                at(p, "second").get<std::string>(), test_label(at(r, "test").get<std::string>()),
                                p_cell(r), passed(r)});
                first = false;
            }
        }
        out += render_table("Preference ranks (1 = best): means and standard deviations", means);
        out += render_table("Preference: omnibus tests", omni);
        if (post.size() > 1)
            out += render_table("Preference: post-hoc tests", post);
    }
    return out;
}

} // namespace

std::string format_p(double p) {
    if (std::isnan(p))
        return "n/a";
    if (p < 2.2e-16)
        return "< 2.2e-16";
    if (p < 0.001)
        return fmt::format("{:.2e}", p);
    return fmt::format("{:.3f}", p);
}

std::vector<PreferenceInput> parse_preferences(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(Errc::data, std::string("preferences are not valid JSON: ") + e.what());
    }
    const auto fail = [](const std::string& what) { throw Error(Errc::data, "preferences: " + what); };
    if (!j.is_object() || !j.contains("questions") || !j["questions"].is_array())
        fail("expected an object with a 'questions' array");
    std::array<std::size_t, 3> column{0, 1, 2}; // file column of each kReportOrder method
    if (j.contains("methods")) {
        const json& m = j["methods"];
        if (!m.is_array() || m.size() != 3)
            fail("'methods' must list PT, ST and ZM");
        std::array<bool, 3> seen{};
        for (std::size_t c = 0; c < 3; ++c) {
            if (!m[c].is_string())
                fail("'methods' must list PT, ST and ZM");
            const std::string name = m[c].get<std::string>();
            bool found = false;
            for (std::size_t k = 0; k < 3; ++k)
                if (name == to_string(kReportOrder[k]) && !seen[k]) {
                    column[k] = c;
                    seen[k] = found = true;
                }
            if (!found)
                fail("'methods' must list PT, ST and ZM");
        }
    }
    std::vector<PreferenceInput> out;
    for (const auto& q : j["questions"]) {
        if (!q.is_object() || !q.contains("question") || !q["question"].is_string() ||
            !q.contains("ranks") || !q["ranks"].is_array())
            fail("each question needs 'question' and 'ranks'");
        PreferenceInput p;
        p.question = q["question"].get<std::string>();
        for (const auto& row : q["ranks"]) {
            if (!row.is_array() || row.size() != 3)
                fail("rank rows of '" + p.question + "' must have three entries");
            std::vector<double> r(3);
            for (std::size_t k = 0; k < 3; ++k) {
                const json& v = row[column[k]];
                if (!v.is_number())
                    fail("ranks of '" + p.question + "' must be numbers");
                r[k] = v.get<double>();
            }
            p.ranks.push_back(r);
        }
        out.push_back(std::move(p));
    }
    return out;
}

std::string report_to_json(const AnalysisReport& report) {
    ordered_json j;
    j["alpha"] = report.alpha;
    j["alpha_posthoc"] = bonferroni(report.alpha, static_cast<int>(kPostHocPairs.size()));
    j["users"] = report.users;
    j["records"] = report.records;
    j["methods"] = ordered_json::array();
    for (Method m : kReportOrder) j["methods"].push_back(to_string(m));
    ordered_json mt = ordered_json::array(), acc = ordered_json::array();
    for (const auto& g : report.movement_time) mt.push_back(to_json(g));
    for (const auto& g : report.accuracy) acc.push_back(to_json(g));
    j["metrics"] = {{"movement_time", mt}, {"accuracy", acc}};
    ordered_json pref = ordered_json::array();
    for (const auto& p : report.preference)
        pref.push_back({{"question", p.question},
                        {"descriptive", to_json(p.descriptive)},
                        {"omnibus", to_json(p.omnibus)},
                        {"alpha_posthoc", p.alpha_posthoc},
                        {"posthoc", to_json(p.posthoc)}});
    j["preference"] = pref;
    return j.dump(2);
}

std::string render_report(const AnalysisReport& report) {
    return render(json::parse(report_to_json(report)));
}

std::string render_report_json(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(Errc::parse, std::string("report is not valid JSON: ") + e.what());
    }
    try {
        return render(j);
    } catch (const json::exception& e) {
        throw Error(Errc::parse, std::string("report JSON has an unexpected shape: ") + e.what());
    }
}

} // namespace cdgain
