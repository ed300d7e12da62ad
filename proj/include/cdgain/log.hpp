#pragma once

#include "cdgain/experiment.hpp"
#include "cdgain/task.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace cdgain {

// Column order of both formats.
inline constexpr const char* kLogFields[] = {"method", "block", "trial", "dir",    "D_m",
                                             "W_m",    "id",    "id_cat", "mt_s", "misses",
                                             "hit",    "seed",  "subject"};

// One JSON object without the trailing newline. Numbers use the shortest
// representation that reads back to the same double.
std::string serialize_record(const TrialRecord& r);

// JSON lines, one record per line, '\n' terminated.
void write_log(std::ostream& out, const std::vector<TrialRecord>& records);
std::string write_log(const std::vector<TrialRecord>& records);

// The log does not carry target centers; they are rebuilt from dir and D_m
// on `display`. Malformed lines throw a parse error naming the line number.
std::vector<TrialRecord> read_log(std::istream& in, const DisplayConfig& display = {});
std::vector<TrialRecord> read_log(const std::string& text, const DisplayConfig& display = {});

void write_csv(std::ostream& out, const std::vector<TrialRecord>& records);
std::vector<TrialRecord> read_csv(std::istream& in, const DisplayConfig& display = {});

// Format by extension: ".csv" is CSV, anything else JSON lines.
std::vector<TrialRecord> load_records(const std::string& path, const DisplayConfig& display = {});
void save_records(const std::string& path, const std::vector<TrialRecord>& records);

} // namespace cdgain
