#pragma once

#include "cdgain/analysis.hpp"

#include <string>
#include <string_view>

namespace cdgain {

// Structured form of the report; the text rendering is produced from it.
std::string report_to_json(const AnalysisReport& report);

// Text tables: per metric the descriptive tables (overall, blocks, ID
// categories), Shapiro-Wilk p-values, omnibus results and post-hoc tests,
// then the preference section.
std::string render_report(const AnalysisReport& report);
// Same, from the JSON written by report_to_json. Throws a parse error on
// anything else.
std::string render_report_json(std::string_view json_text);

// Preference questionnaire ranks:
//   {"methods": ["PT", "ZM", "ST"],            (column order, default ZM ST PT)
//    "questions": [{"question": "Speed", "ranks": [[1, 2, 3], ...]}, ...]}
// Columns are reordered to ZM, ST, PT. Malformed input is a data error.
std::vector<PreferenceInput> parse_preferences(std::string_view json_text);

// p-value as printed in tables: "< 2.2e-16", "3.64e-04", "0.153".
std::string format_p(double p);

} // namespace cdgain
