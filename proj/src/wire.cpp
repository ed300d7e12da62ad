#include "cdgain/wire.hpp"

#include "cdgain/error.hpp"
#include "cdgain/log.hpp"
#include "cdgain/tracking.hpp"

#include <json.hpp>

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>

namespace cdgain {

namespace wire {

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

[[noreturn]] void bad(const std::string& what) {
    throw Error(Errc::protocol, what);
}

double num(const json& j, const char* key) {
    const auto it = j.find(key);
    if (it == j.end() || !it->is_number())
        bad(std::string("field '") + key + "' must be a number");
    const double v = it->get<double>();
    if (!std::isfinite(v))
        bad(std::string("field '") + key + "' must be finite");
    return v;
}

int integer(const json& j, const char* key) {
    const auto it = j.find(key);
    if (it == j.end() || !it->is_number_integer())
        bad(std::string("field '") + key + "' must be an integer");
    return it->get<int>();
}

std::string str(const json& j, const char* key) {
    const auto it = j.find(key);
    if (it == j.end() || !it->is_string())
        bad(std::string("field '") + key + "' must be a string");
    return it->get<std::string>();
}

TrialEventKind parse_kind(const std::string& s) {
    for (auto k : {TrialEventKind::red_selected, TrialEventKind::miss, TrialEventKind::acquired,
                   TrialEventKind::finished})
        if (s == to_string(k))
            return k;
    bad("unknown trial_event kind '" + s + "'");
}

} // namespace

std::string encode(const Message& m) {
    ordered_json j;
    std::visit(overloaded{
                   [&](const Hello& h) {
                       j["type"] = "hello";
                       j["config"] = ordered_json::parse(h.config.empty() ? "{}" : h.config);
                   },
                   [&](const Ack& a) {
                       j["type"] = "ack";
                       j["config"] = ordered_json::parse(a.config);
                   },
                   [&](const CalibSample& c) {
                       j["type"] = "calib_sample";
                       j["z"] = c.z;
                   },
                   [&](const CalibDone&) { j["type"] = "calib_done"; },
                   [&](const Calibrated& c) {
                       j["type"] = "calibrated";
                       j["h_min"] = c.h_min;
                       j["h_max"] = c.h_max;
                   },
                   [&](const Input& in) {
                       j["type"] = "input";
                       j["t"] = in.sample.t;
                       j["x"] = in.sample.p.x;
                       j["y"] = in.sample.p.y;
                       j["z"] = in.sample.p.z;
                       j["touch"] = to_string(in.sample.touch);
                   },
                   [&](const Mapped& m) {
                       j["type"] = "mapped";
                       j["t"] = m.out.t;
                       j["fx"] = m.out.f.x;
                       j["fy"] = m.out.f.y;
                       j["gain"] = m.out.gain;
                       j["scale"] = m.out.scale;
                       j["ox"] = m.out.offset.x;
                       j["oy"] = m.out.offset.y;
                   },
                   [&](const Event& e) {
                       j["type"] = "trial_event";
                       j["kind"] = to_string(e.event.kind);
                       j["trial"] = e.event.trial;
                       j["mt_s"] = e.event.mt_s;
                       j["misses"] = e.event.misses;
                   },
                   [&](const SessionEnd& s) {
                       j["type"] = "session_end";
                       if (!s.log_ref.empty())
                           j["log_ref"] = s.log_ref;
                   },
                   [&](const ErrorMsg& e) {
                       j["type"] = "error";
                       j["code"] = e.code;
                       j["message"] = e.message;
                   },
               },
               m);
    return j.dump();
}

Message decode(std::string_view line) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::parse_error&) {
        bad("message is not valid JSON");
    }
    if (!j.is_object())
        bad("message must be a JSON object");
    const std::string type = str(j, "type");
    if (type == "hello") {
        const auto it = j.find("config");
        if (it == j.end())
            return Hello{"{}"};
        if (!it->is_object())
            bad("field 'config' must be an object");
        return Hello{it->dump()};
    }
    if (type == "ack") {
        const auto it = j.find("config");
        if (it == j.end() || !it->is_object())
            bad("field 'config' must be an object");
        return Ack{it->dump()};
    }
    if (type == "calib_sample")
        return CalibSample{num(j, "z")};
    if (type == "calib_done")
        return CalibDone{};
    if (type == "calibrated")
        return Calibrated{num(j, "h_min"), num(j, "h_max")};
    if (type == "input") {
        InputSample s;
        s.t = num(j, "t");
        s.p = {num(j, "x"), num(j, "y"), num(j, "z")};
        if (j.contains("touch")) {
            try {
                s.touch = parse_touch_phase(str(j, "touch"));
            } catch (const Error& e) {
                bad(e.what());
            }
        }
        return Input{s};
    }
    if (type == "mapped") {
        MappedOutput o;
        o.t = num(j, "t");
        o.f = {num(j, "fx"), num(j, "fy")};
        o.gain = num(j, "gain");
        o.scale = num(j, "scale");
        if (j.contains("ox") || j.contains("oy"))
            o.offset = {num(j, "ox"), num(j, "oy")};
        return Mapped{o};
    }
    if (type == "trial_event") {
        TrialEvent e;
        e.kind = parse_kind(str(j, "kind"));
        e.trial = integer(j, "trial");
        e.mt_s = num(j, "mt_s");
        e.misses = integer(j, "misses");
        return Event{e};
    }
    if (type == "session_end")
        return SessionEnd{j.contains("log_ref") ? str(j, "log_ref") : std::string()};
    if (type == "error")
        return ErrorMsg{str(j, "code"), str(j, "message")};
    bad("unknown message type '" + type + "'");
}

} // namespace wire

WireSession::WireSession(SessionConfig defaults, LogSink sink)
    : defaults_(std::move(defaults)), sink_(std::move(sink)) {}

std::vector<std::string> WireSession::handle(std::string_view line) {
    if (closed_)
        return {};
    if (!line.empty() && line.back() == '\r')
        line.remove_suffix(1);
    if (line.empty())
        return {};
    try {
        return dispatch(wire::decode(line));
    } catch (const Error& e) {
        // Validation and calibration problems leave the connection usable;
        // anything else ends it.
        const bool recoverable = e.code() == Errc::validation || e.code() == Errc::config ||
                                 e.code() == Errc::parse || e.code() == Errc::calibration_failed ||
                                 e.code() == Errc::insufficient_data;
        const Errc code = e.code() == Errc::stream ? Errc::protocol : e.code();
        if (!recoverable)
            closed_ = true;
        return {wire::encode(wire::ErrorMsg{to_string(code), e.what()})};
    }
}

std::vector<std::string> WireSession::dispatch(const wire::Message& m) {
    using namespace wire;
    std::vector<std::string> out;
    if (const auto* h = std::get_if<Hello>(&m)) {
        if (session_ && !session_->records().empty())
            finish();
        const SessionConfig cfg = parse_config(h->config, defaults_);
        session_ = std::make_unique<Session>(make_session_settings(cfg));
        calib_low_.clear();
        calib_high_.clear();
        calib_segments_done_ = 0;
        out.push_back(encode(Ack{config_to_json(cfg)}));
        return out;
    }
    if (!session_)
        throw Error(Errc::protocol, "expected hello first");
    if (const auto* c = std::get_if<CalibSample>(&m)) {
        if (session_->samples() > 0)
            throw Error(Errc::protocol, "calibration after the first input");
        if (calib_segments_done_ >= 2)
            throw Error(Errc::protocol, "calibration already complete");
        (calib_segments_done_ == 0 ? calib_low_ : calib_high_).push_back(c->z);
        return out;
    }
    if (std::holds_alternative<CalibDone>(m)) {
        if (session_->samples() > 0)
            throw Error(Errc::protocol, "calibration after the first input");
        if (calib_segments_done_ >= 2)
            throw Error(Errc::protocol, "calibration already complete");
        if (++calib_segments_done_ < 2)
            return out;
        try {
            const HeightCalibration cal = calibrate_height(calib_low_, calib_high_);
            session_->set_calibration(cal.h_min, cal.h_max);
            out.push_back(encode(Calibrated{cal.h_min, cal.h_max}));
        } catch (const Error&) {
            calib_low_.clear();
            calib_high_.clear();
            calib_segments_done_ = 0;
            throw;
        }
        return out;
    }
    if (const auto* in = std::get_if<Input>(&m)) {
        const SessionOutput o = session_->feed(in->sample);
        out.push_back(encode(Mapped{o.mapped}));
        for (const auto& e : o.events) out.push_back(encode(Event{e}));
        return out;
    }
    if (std::holds_alternative<SessionEnd>(m)) {
        out.push_back(encode(SessionEnd{finish()}));
        closed_ = true;
        return out;
    }
    throw Error(Errc::protocol, "message type is server-to-client only");
}

std::string WireSession::finish() {
    std::string ref;
    if (sink_)
        ref = sink_(session_->settings(), session_->records());
    return ref;
}

std::vector<std::string> make_transcript(const SessionConfig& cfg,
                                         const std::vector<InputSample>& inputs) {
    std::vector<std::string> out;
    out.reserve(inputs.size() + 2);
    out.push_back(wire::encode(wire::Hello{config_to_json(cfg)}));
    for (const auto& s : inputs) out.push_back(wire::encode(wire::Input{s}));
    out.push_back(wire::encode(wire::SessionEnd{}));
    return out;
}

LogSink directory_sink(std::string dir) {
    auto counter = std::make_shared<std::atomic<int>>(0);
    return [dir = std::move(dir), counter](const SessionSettings& s,
                                           const std::vector<TrialRecord>& records) {
        std::filesystem::create_directories(dir);
        std::string path;
        do {
            path = (std::filesystem::path(dir) /
                    ("session-" + std::to_string(s.subject) + "-" + to_string(s.method) + "-" +
                     std::to_string(++*counter) + ".jsonl"))
                       .string();
        } while (std::filesystem::exists(path));
        save_records(path, records);
        return path;
    };
}

} // namespace cdgain
