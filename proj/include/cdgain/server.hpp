#pragma once

#include "cdgain/config.hpp"
#include "cdgain/wire.hpp"

#include <atomic>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace cdgain {

struct ServerOptions {
    std::string address = "127.0.0.1";
    std::uint16_t port = 7878;    // newline-delimited JSON over TCP; 0 picks a free port
    bool websocket = false;       // also serve one JSON message per text frame
    std::uint16_t ws_port = 7879; // 0 picks a free port
    SessionConfig defaults;
    LogSink sink;                 // where finished sessions go
};

// Accepts any number of connections, one thread and one WireSession each.
class Server {
public:
    explicit Server(ServerOptions options);
    ~Server();
    Server(const Server&) = delete;
    Server& operator=(const Server&) = delete;

    // Binds and starts accepting. Throws io errors when the address is taken.
    void start();
    // Stops accepting, closes live connections and joins all threads.
    void stop();
    // Blocks until stop() is called from another thread or a signal handler.
    void wait();

    std::uint16_t tcp_port() const;
    std::uint16_t ws_port() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// Blocking line client for the TCP transport.
class LineClient {
public:
    LineClient(const std::string& host, std::uint16_t port);
    ~LineClient();
    LineClient(const LineClient&) = delete;
    LineClient& operator=(const LineClient&) = delete;

    void send(const std::string& line);
    // Empty optional-like result: returns false at end of stream.
    bool read_line(std::string& line);

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// Feeds `lines` through a fresh WireSession and collects every reply.
std::vector<std::string> run_transcript(const std::vector<std::string>& lines,
                                        const SessionConfig& defaults, const LogSink& sink);

} // namespace cdgain
