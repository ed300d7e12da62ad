#pragma once

#include "cdgain/config.hpp"
#include "cdgain/session.hpp"

#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace cdgain {

// Newline-delimited JSON, one object per line, tagged by "type".
//
// client -> server
//   {"type":"hello","config":{...}}
//   {"type":"calib_sample","z":0.012}
//   {"type":"calib_done"}
//   {"type":"input","t":1.25,"x":0.01,"y":-0.02,"z":0.03,"touch":"none|down|up"}
//   {"type":"session_end"}
// server -> client
//   {"type":"ack","config":{...}}
//   {"type":"calibrated","h_min":0.01,"h_max":0.12}
//   {"type":"mapped","t":1.25,"fx":..,"fy":..,"gain":..,"scale":..,"ox":..,"oy":..}
//   {"type":"trial_event","kind":"red_selected|miss|acquired|finished","trial":3,"mt_s":..,"misses":..}
//   {"type":"session_end","log_ref":"..."}
//   {"type":"error","code":"protocol","message":"..."}
namespace wire {

struct Hello {
    std::string config; // JSON object text
};
struct Ack {
    std::string config;
};
struct CalibSample {
    double z = 0.0;
};
struct CalibDone {};
struct Calibrated {
    double h_min = 0.0;
    double h_max = 0.0;
};
struct Input {
    InputSample sample;
};
struct Mapped {
    MappedOutput out;
};
struct Event {
    TrialEvent event;
};
struct SessionEnd {
    std::string log_ref;
};
struct ErrorMsg {
    std::string code;
    std::string message;
};

using Message = std::variant<Hello, Ack, CalibSample, CalibDone, Calibrated, Input, Mapped, Event,
                             SessionEnd, ErrorMsg>;

// One line without the trailing newline.
std::string encode(const Message& m);
// Unknown tags, missing or mistyped fields throw a protocol error.
Message decode(std::string_view line);

} // namespace wire

// Receives the finished session's records, returns the log reference sent
// back to the client (a path for file sinks).
using LogSink = std::function<std::string(const SessionSettings&, const std::vector<TrialRecord>&)>;

// Protocol state of one connection, independent of the transport.
class WireSession {
public:
    WireSession(SessionConfig defaults, LogSink sink);

    // Handles one inbound line; returns the reply lines in order.
    std::vector<std::string> handle(std::string_view line);

    // Set after session_end or a protocol error; the transport then closes.
    bool closed() const { return closed_; }
    const Session* session() const { return session_.get(); }

private:
    std::vector<std::string> dispatch(const wire::Message& m);
    std::string finish();

    SessionConfig defaults_;
    LogSink sink_;
    std::unique_ptr<Session> session_;
    std::vector<double> calib_low_;
    std::vector<double> calib_high_;
    int calib_segments_done_ = 0;
    bool closed_ = false;
};

// hello, one input line per sample, session_end: what a client would send.
std::vector<std::string> make_transcript(const SessionConfig& cfg,
                                         const std::vector<InputSample>& inputs);

// Writes each finished session to `dir` as session-<subject>-<method>-<n>.jsonl.
LogSink directory_sink(std::string dir);

} // namespace cdgain
