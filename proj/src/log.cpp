#include "cdgain/log.hpp"

#include "cdgain/error.hpp"

#include <json.hpp>

#include <charconv>
#include <fstream>
#include <sstream>

namespace cdgain {

namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json to_json(const TrialRecord& r) {
    ordered_json j;
    j["method"] = to_string(r.method);
    j["block"] = r.block;
    j["trial"] = r.trial;
    j["dir"] = r.target.direction;
    j["D_m"] = r.target.distance;
    j["W_m"] = r.target.width;
    j["id"] = r.target.id_value;
    j["id_cat"] = r.id_category;
    j["mt_s"] = r.movement_time;
    j["misses"] = r.misses;
    j["hit"] = r.hit;
    j["seed"] = r.seed;
    j["subject"] = r.subject;
    return j;
}

[[noreturn]] void fail(std::size_t line, const std::string& what) {
    throw Error(Errc::parse, "line " + std::to_string(line) + ": " + what);
}

// Raw column values, as parsed from either format.
struct Fields {
    std::string method;
    long long block = 0, trial = 0, dir = 0, id_cat = 0, misses = 0, subject = 0;
    double d = 0, w = 0, id = 0, mt = 0;
    bool hit = true;
    std::uint64_t seed = 0;
};

TrialRecord build(const Fields& f, std::size_t line, const DisplayConfig& display) {
    TrialRecord r;
    try {
        r.method = parse_method(f.method);
    } catch (const Error&) {
        fail(line, "unknown method '" + f.method + "'");
    }
    if (f.dir < 0 || f.dir >= kDirections)
        fail(line, "dir must be 0..7");
    if (f.block < 1 || f.trial < 1)
        fail(line, "block and trial must be positive");
    if (f.id_cat < 2 || f.id_cat > 5)
        fail(line, "id_cat must be 2..5");
    if (f.misses < 0)
        fail(line, "misses must be non-negative");
    if (!(f.w > 0.0) || !(f.d >= 0.0) || !(f.mt >= 0.0))
        fail(line, "D_m, W_m and mt_s must be non-negative (W_m positive)");
    r.block = static_cast<int>(f.block);
    r.trial = static_cast<int>(f.trial);
    r.target.direction = static_cast<int>(f.dir);
    r.target.distance = f.d;
    r.target.width = f.w;
    r.target.id_value = f.id;
    r.target.center = display.start_point + direction_unit(display, r.target.direction) * f.d;
    r.id_category = static_cast<int>(f.id_cat);
    r.movement_time = f.mt;
    r.misses = static_cast<int>(f.misses);
    r.hit = f.hit;
    r.seed = f.seed;
    r.subject = static_cast<int>(f.subject);
    return r;
}

template <typename T>
T json_field(const nlohmann::json& j, const char* key, std::size_t line) {
    const auto it = j.find(key);
    if (it == j.end())
        fail(line, std::string("missing field '") + key + "'");
    try {
        if constexpr (std::is_same_v<T, double>) {
            if (!it->is_number())
                throw std::invalid_argument("");
        } else if constexpr (std::is_same_v<T, bool>) {
            if (!it->is_boolean())
                throw std::invalid_argument("");
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (!it->is_string())
                throw std::invalid_argument("");
        } else {
            if (!it->is_number_integer())
                throw std::invalid_argument("");
        }
        return it->get<T>();
    } catch (const std::exception&) {
        fail(line, std::string("field '") + key + "' has the wrong type");
    }
}

std::string number(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

template <typename T>
T csv_number(const std::string& s, const char* key, std::size_t line) {
    T v{};
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        fail(line, std::string("field '") + key + "' is not a number: '" + s + "'");
    return v;
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

} // namespace

std::string serialize_record(const TrialRecord& r) {
    return to_json(r).dump();
}

void write_log(std::ostream& out, const std::vector<TrialRecord>& records) {
    for (const auto& r : records) out << serialize_record(r) << '\n';
}

std::string write_log(const std::vector<TrialRecord>& records) {
    std::ostringstream out;
    write_log(out, records);
    return out.str();
}

std::vector<TrialRecord> read_log(std::istream& in, const DisplayConfig& display) {
    std::vector<TrialRecord> out;
    std::string text;
    std::size_t line = 0;
    while (std::getline(in, text)) {
        ++line;
        if (!text.empty() && text.back() == '\r')
            text.pop_back();
        if (text.empty())
            continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(text);
        } catch (const nlohmann::json::parse_error& e) {
            fail(line, std::string("malformed JSON (") + e.what() + ")");
        }
        if (!j.is_object())
            fail(line, "expected a JSON object");
        Fields f;
        f.method = json_field<std::string>(j, "method", line);
        f.block = json_field<long long>(j, "block", line);
        f.trial = json_field<long long>(j, "trial", line);
        f.dir = json_field<long long>(j, "dir", line);
        f.d = json_field<double>(j, "D_m", line);
        f.w = json_field<double>(j, "W_m", line);
        f.id = json_field<double>(j, "id", line);
        f.id_cat = json_field<long long>(j, "id_cat", line);
        f.mt = json_field<double>(j, "mt_s", line);
        f.misses = json_field<long long>(j, "misses", line);
        f.hit = json_field<bool>(j, "hit", line);
        f.seed = json_field<std::uint64_t>(j, "seed", line);
        f.subject = json_field<long long>(j, "subject", line);
        out.push_back(build(f, line, display));
    }
    return out;
}

std::vector<TrialRecord> read_log(const std::string& text, const DisplayConfig& display) {
    std::istringstream in(text);
    return read_log(in, display);
}

void write_csv(std::ostream& out, const std::vector<TrialRecord>& records) {
    bool first = true;
    for (const char* f : kLogFields) {
        out << (first ? "" : ",") << f;
        first = false;
    }
    out << '\n';
    for (const auto& r : records) {
        out << to_string(r.method) << ',' << r.block << ',' << r.trial << ',' << r.target.direction << ','
            << number(r.target.distance) << ',' << number(r.target.width) << ','
            << number(r.target.id_value) << ',' << r.id_category << ',' << number(r.movement_time)
            << ',' << r.misses << ',' << (r.hit ? "true" : "false") << ',' << r.seed << ','
            << r.subject << '\n';
    }
}

std::vector<TrialRecord> read_csv(std::istream& in, const DisplayConfig& display) {
    std::vector<TrialRecord> out;
    std::string text;
    std::size_t line = 0;
    constexpr std::size_t kColumns = std::size(kLogFields);
    if (!std::getline(in, text))
        return out;
    ++line;
    const auto header = split(text);
    if (header.size() != kColumns)
        fail(line, "header must list " + std::to_string(kColumns) + " columns");
    for (std::size_t i = 0; i < kColumns; ++i)
        if (header[i] != kLogFields[i])
            fail(line, std::string("expected column '") + kLogFields[i] + "', found '" + header[i] + "'");
    while (std::getline(in, text)) {
        ++line;
        if (text.empty() || text == "\r")
            continue;
        const auto c = split(text);
        if (c.size() != kColumns)
            fail(line, "expected " + std::to_string(kColumns) + " columns, found " + std::to_string(c.size()));
        Fields f;
        f.method = c[0];
        f.block = csv_number<long long>(c[1], "block", line);
        f.trial = csv_number<long long>(c[2], "trial", line);
        f.dir = csv_number<long long>(c[3], "dir", line);
        f.d = csv_number<double>(c[4], "D_m", line);
        f.w = csv_number<double>(c[5], "W_m", line);
        f.id = csv_number<double>(c[6], "id", line);
        f.id_cat = csv_number<long long>(c[7], "id_cat", line);
        f.mt = csv_number<double>(c[8], "mt_s", line);
        f.misses = csv_number<long long>(c[9], "misses", line);
        if (c[10] != "true" && c[10] != "false")
            fail(line, "field 'hit' must be true or false");
        f.hit = c[10] == "true";
        f.seed = csv_number<std::uint64_t>(c[11], "seed", line);
        f.subject = csv_number<long long>(c[12], "subject", line);
        out.push_back(build(f, line, display));
    }
    return out;
}

std::vector<TrialRecord> load_records(const std::string& path, const DisplayConfig& display) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(Errc::io, "cannot open " + path);
    try {
        return ends_with(path, ".csv") ? read_csv(in, display) : read_log(in, display);
    } catch (const Error& e) {
        if (e.code() != Errc::parse)
            throw;
        throw Error(Errc::parse, path + ": " + e.what());
    }
}

void save_records(const std::string& path, const std::vector<TrialRecord>& records) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error(Errc::io, "cannot write " + path);
    if (ends_with(path, ".csv"))
        write_csv(out, records);
    else
        write_log(out, records);
    if (!out)
        throw Error(Errc::io, "write failed: " + path);
}

} // namespace cdgain
