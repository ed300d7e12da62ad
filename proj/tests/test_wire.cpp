#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cdgain/batch.hpp"
#include "cdgain/error.hpp"
#include "cdgain/log.hpp"
#include "cdgain/server.hpp"
#include "cdgain/wire.hpp"

#include <boost/asio/connect.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

using namespace cdgain;
using nlohmann::json;

namespace {

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in);
    std::vector<std::string> lines;
    for (std::string l; std::getline(in, l);)
        if (!l.empty()) lines.push_back(l);
    return lines;
}

const std::vector<std::string>& transcript() {
    static const auto t = read_lines(CDGAIN_FIXTURES "/zm10_transcript.jsonl");
    return t;
}

const std::string& expected_log() {
    static const std::string e = read_text_file(CDGAIN_FIXTURES "/zm10_expected.jsonl");
    return e;
}

struct Capture {
    std::mutex mu;
    std::vector<std::string> logs;

    LogSink sink() {
        return [this](const SessionSettings&, const std::vector<TrialRecord>& r) {
            std::lock_guard lock(mu);
            logs.push_back(write_log(r));
            return "mem:" + std::to_string(logs.size() - 1);
        };
    }
};

std::string code_of(const std::string& line) {
    const auto j = json::parse(line);
    return j.value("type", "") == "error" ? j.at("code").get<std::string>() : "";
}

// Replies the in-process session gives for each line of the transcript.
std::vector<std::vector<std::string>> reference_replies(const std::vector<std::string>& lines) {
    Capture cap;
    WireSession s({}, cap.sink());
    std::vector<std::vector<std::string>> out;
    for (const auto& l : lines) out.push_back(s.handle(l));
    return out;
}

} // namespace

TEST_CASE("every message type survives encode and decode") {
    const std::vector<wire::Message> msgs{
        wire::Hello{R"({"method":"PT"})"},
        wire::Ack{R"({"method":"PT"})"},
        wire::CalibSample{0.0125},
        wire::CalibDone{},
        wire::Calibrated{0.01, 0.12},
        wire::Input{{1.25, {0.01, -0.02, 0.03}, TouchPhase::down}},
        wire::Mapped{{2.5, {0.1, 0.2}, 1.5, 0.8, {0.3, -0.4}}},
        wire::Event{{TrialEventKind::acquired, 3, 0.75, 2}},
        wire::SessionEnd{"logs/session-0-ZM-1.jsonl"},
        wire::ErrorMsg{"protocol", "bad"},
    };
    for (const auto& m : msgs) {
        const std::string line = wire::encode(m);
        CHECK(line.find('\n') == std::string::npos);
        const auto back = wire::decode(line);
        CHECK(back.index() == m.index());
        CHECK(wire::encode(back) == line);
    }
    const auto in = std::get<wire::Input>(wire::decode(wire::encode(msgs[5]))).sample;
    CHECK(in.t == 1.25);
    CHECK(in.p == Vec3{0.01, -0.02, 0.03});
    CHECK(in.touch == TouchPhase::down);
}

TEST_CASE("malformed messages are protocol errors") {
    for (const char* bad : {R"({"type":"teleport"})", R"({"type":"input","t":1})",
                            R"({"type":"input","t":"x","x":0,"y":0,"z":0,"touch":"none"})",
                            R"({"type":"input","t":0,"x":0,"y":0,"z":0,"touch":"hover"})",
                            R"({"z":0})", "[1]", "{oops"}) {
        try {
            wire::decode(bad);
            FAIL("accepted " << bad);
        } catch (const Error& e) {
            CHECK(e.code() == Errc::protocol);
        }
    }
}

TEST_CASE("hello is acknowledged with the resolved config") {
    Capture cap;
    WireSession s({}, cap.sink());
    const auto r = s.handle(R"({"type":"hello","config":{"method":"PT","trial_limit":3}})");
    REQUIRE(r.size() == 1);
    const auto j = json::parse(r[0]);
    CHECK(j["type"] == "ack");
    CHECK(j["config"]["method"] == "PT");
    CHECK(j["config"]["trial_limit"] == 3);
    CHECK(j["config"].contains("display"));
    REQUIRE(s.session() != nullptr);
    CHECK(s.session()->settings().trials.size() == 3);
}

TEST_CASE("input before hello closes the connection") {
    Capture cap;
    WireSession s({}, cap.sink());
    const auto r = s.handle(R"({"type":"input","t":0,"x":0,"y":0,"z":0,"touch":"none"})");
    REQUIRE(r.size() == 1);
    CHECK(code_of(r[0]) == "protocol");
    CHECK(s.closed());
}

TEST_CASE("each input gets exactly one mapped reply carrying its time") {
    Capture cap;
    WireSession s({}, cap.sink());
    s.handle(R"({"type":"hello","config":{"method":"PT"}})");
    for (int i = 0; i < 50; ++i) {
        const double t = 0.01 * i;
        json in{{"type", "input"}, {"t", t}, {"x", 0.001 * i}, {"y", 0.0}, {"z", 0.01}, {"touch", "none"}};
        const auto r = s.handle(in.dump());
        int mapped = 0;
        for (const auto& line : r) {
            const auto j = json::parse(line);
            if (j["type"] == "mapped") {
                ++mapped;
                CHECK(j["t"].get<double>() == t);
            }
        }
        CHECK(mapped == 1);
    }
}

TEST_CASE("time going backwards is a protocol error") {
    Capture cap;
    WireSession s({}, cap.sink());
    s.handle(R"({"type":"hello","config":{}})");
    s.handle(R"({"type":"input","t":1.0,"x":0,"y":0,"z":0.01,"touch":"none"})");
    const auto r = s.handle(R"({"type":"input","t":0.5,"x":0,"y":0,"z":0.01,"touch":"none"})");
    REQUIRE(r.size() == 1);
    CHECK(code_of(r[0]) == "protocol");
    CHECK(s.closed());
    CHECK(s.handle(R"({"type":"session_end"})").empty());
}

TEST_CASE("recoverable errors keep the connection open") {
    Capture cap;
    WireSession s({}, cap.sink());
    auto r = s.handle(R"({"type":"hello","config":{"calibration":{"h_min":0.2,"h_max":0.1}}})");
    REQUIRE(r.size() == 1);
    CHECK(code_of(r[0]) == "validation");
    CHECK_FALSE(s.closed());

    s.handle(R"({"type":"hello","config":{}})");
    s.handle(R"({"type":"calib_sample","z":0.0})");
    r = s.handle(R"({"type":"calib_done"})");
    CHECK(r.empty());
    s.handle(R"({"type":"calib_sample","z":0.1})");
    r = s.handle(R"({"type":"calib_done"})");
    REQUIRE(r.size() == 1);
    CHECK(code_of(r[0]) == "insufficient-data");
    CHECK_FALSE(s.closed());
}

TEST_CASE("calibration handshake reports the medians") {
    Capture cap;
    WireSession s({}, cap.sink());
    s.handle(R"({"type":"hello","config":{}})");
    for (double z : {0.01, 0.012, 0.011, 0.009, 0.01, 0.013, 0.01, 0.008, 0.01, 0.011, 0.01})
        s.handle(json{{"type", "calib_sample"}, {"z", z}}.dump());
    s.handle(R"({"type":"calib_done"})");
    for (int i = 0; i < 11; ++i)
        s.handle(json{{"type", "calib_sample"}, {"z", 0.15 + 0.001 * (i % 3)}}.dump());
    const auto r = s.handle(R"({"type":"calib_done"})");
    REQUIRE(r.size() == 1);
    const auto j = json::parse(r[0]);
    CHECK(j["type"] == "calibrated");
    CHECK(j["h_min"].get<double>() == 0.01);
    CHECK(j["h_max"].get<double>() == 0.151);
    CHECK(s.session()->settings().zmap.h_max == 0.151);

    s.handle(R"({"type":"input","t":0,"x":0,"y":0,"z":0.01,"touch":"none"})");
    const auto late = s.handle(R"({"type":"calib_sample","z":0.0})");
    REQUIRE(late.size() == 1);
    CHECK(code_of(late[0]) == "protocol");
}

TEST_CASE("golden transcript reproduces the expected log in process") {
    Capture cap;
    const auto replies = run_transcript(transcript(), {}, cap.sink());
    REQUIRE(cap.logs.size() == 1);
    CHECK(cap.logs[0] == expected_log());
    const auto records = read_log(cap.logs[0]);
    CHECK(records.size() == 10);
    const auto last = json::parse(replies.back());
    CHECK(last["type"] == "session_end");
    CHECK(last["log_ref"] == "mem:0");
    int acquired = 0, finished = 0;
    for (const auto& line : replies) {
        const auto j = json::parse(line);
        CHECK(j["type"] != "error");
        if (j["type"] == "trial_event") {
            acquired += j["kind"] == "acquired";
            finished += j["kind"] == "finished";
        }
    }
    CHECK(acquired == 10);
    CHECK(finished == 1);
}

TEST_CASE("golden transcript without the wire layer") {
    const auto& lines = transcript();
    SessionConfig cfg = parse_config(json::parse(lines.front())["config"].dump());
    std::vector<double> low, high;
    std::vector<InputSample> inputs;
    int done = 0;
    for (const auto& l : lines) {
        const auto j = json::parse(l);
        if (j["type"] == "calib_sample")
            (done == 0 ? low : high).push_back(j["z"].get<double>());
        else if (j["type"] == "calib_done")
            ++done;
        else if (j["type"] == "input")
            inputs.push_back({j["t"], {j["x"], j["y"], j["z"]}, parse_touch_phase(j["touch"].get<std::string>())});
    }
    const auto cal = calibrate_height(low, high);
    Session s(make_session_settings(cfg));
    s.set_calibration(cal.h_min, cal.h_max);
    for (const auto& in : inputs) s.feed(in);
    CHECK(write_log(s.records()) == expected_log());
}

TEST_CASE("simulated inputs replay to the simulated log") {
    BatchConfig b;
    b.session.method = Method::ST;
    b.session.subject = 5;
    b.session.trial_limit = 6;
    const auto run = simulate_single(b);
    Capture cap;
    run_transcript(make_transcript(b.session, run.inputs), {}, cap.sink());
    REQUIRE(cap.logs.size() == 1);
    CHECK(cap.logs[0] == write_log(run.records));
}

TEST_CASE("a second hello flushes the previous session") {
    Capture cap;
    auto lines = transcript();
    lines.pop_back(); // no session_end
    lines.push_back(R"({"type":"hello","config":{"method":"PT"}})");
    run_transcript(lines, {}, cap.sink());
    REQUIRE(cap.logs.size() == 1);
    CHECK(cap.logs[0] == expected_log());
}

TEST_CASE("TCP transport matches the in-process session byte for byte") {
    Capture cap;
    ServerOptions opt;
    opt.port = 0;
    opt.sink = cap.sink();
    Server server(opt);
    server.start();
    REQUIRE(server.tcp_port() != 0);

    const auto reference = reference_replies(transcript());
    auto drive = [&](std::vector<std::string>& got) {
        LineClient c("127.0.0.1", server.tcp_port());
        for (std::size_t i = 0; i < transcript().size(); ++i) {
            c.send(transcript()[i]);
            for (std::size_t k = 0; k < reference[i].size(); ++k) {
                std::string line;
                if (!c.read_line(line)) return;
                got.push_back(line);
            }
        }
        std::string extra;
        CHECK_FALSE(c.read_line(extra)); // closed after session_end
    };
    std::vector<std::vector<std::string>> got(3);
    std::vector<std::thread> clients;
    for (auto& g : got) clients.emplace_back(drive, std::ref(g));
    for (auto& t : clients) t.join();
    server.stop();

    std::vector<std::string> flat;
    for (const auto& r : reference)
        for (const auto& l : r) flat.push_back(l);
    for (auto& g : got) {
        // log_ref names the capture slot, which depends on finishing order
        REQUIRE(g.size() == flat.size());
        g.back() = flat.back();
        CHECK(g == flat);
    }
    REQUIRE(cap.logs.size() == 3);
    for (const auto& log : cap.logs) CHECK(log == expected_log());
}

TEST_CASE("TCP transport closes on a protocol error") {
    Capture cap;
    ServerOptions opt;
    opt.port = 0;
    opt.sink = cap.sink();
    Server server(opt);
    server.start();
    {
        LineClient c("127.0.0.1", server.tcp_port());
        c.send("this is not json");
        std::string line;
        REQUIRE(c.read_line(line));
        CHECK(code_of(line) == "protocol");
        CHECK_FALSE(c.read_line(line));
    }
    server.stop();
}

TEST_CASE("directory sink writes one file per session") {
    const auto dir = std::filesystem::temp_directory_path() / "cdgain_test_wire";
    std::filesystem::remove_all(dir);
    const auto replies = run_transcript(transcript(), {}, directory_sink(dir.string()));
    const auto ref = json::parse(replies.back())["log_ref"].get<std::string>();
    CHECK(std::filesystem::path(ref).filename() == "session-0-ZM-1.jsonl");
    CHECK(read_text_file(ref) == expected_log());
    run_transcript(transcript(), {}, directory_sink(dir.string()));
    CHECK(std::filesystem::exists(dir / "session-0-ZM-2.jsonl"));
    std::filesystem::remove_all(dir);
}

TEST_CASE("WebSocket transport carries one message per frame") {
    namespace net = boost::asio;
    namespace beast = boost::beast;
    Capture cap;
    ServerOptions opt;
    opt.port = 0;
    opt.websocket = true;
    opt.ws_port = 0;
    opt.sink = cap.sink();
    Server server(opt);
    server.start();
    REQUIRE(server.ws_port() != 0);

    const auto reference = reference_replies(transcript());
    std::vector<std::string> got, flat;
    {
        net::io_context ioc;
        beast::websocket::stream<net::ip::tcp::socket> ws(ioc);
        ws.next_layer().connect({net::ip::make_address("127.0.0.1"), server.ws_port()});
        ws.handshake("127.0.0.1", "/");
        ws.text(true);
        for (std::size_t i = 0; i < transcript().size(); ++i) {
            ws.write(net::buffer(transcript()[i]));
            for (std::size_t k = 0; k < reference[i].size(); ++k) {
                beast::flat_buffer buf;
                ws.read(buf);
                got.push_back(beast::buffers_to_string(buf.data()));
                flat.push_back(reference[i][k]);
            }
        }
        beast::flat_buffer buf;
        beast::error_code ec;
        ws.read(buf, ec);
        CHECK(ec); // server closed after session_end
    }
    server.stop();
    CHECK(got == flat);
    REQUIRE(cap.logs.size() == 1);
    CHECK(cap.logs[0] == expected_log());
}

TEST_CASE("binding a taken port is an io error") {
    Capture cap;
    ServerOptions opt;
    opt.port = 0;
    opt.sink = cap.sink();
    Server a(opt);
    a.start();
    opt.port = a.tcp_port();
    Server b(opt);
    try {
        b.start();
        FAIL("second bind succeeded");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::io);
    }
    a.stop();
}
