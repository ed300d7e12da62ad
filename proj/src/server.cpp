#include "cdgain/server.hpp"

#include "cdgain/error.hpp"

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include <condition_variable>
#include <list>
#include <mutex>
#include <thread>

#include <sys/socket.h>

namespace cdgain {

namespace asio = boost::asio;
namespace beast = boost::beast;
using tcp = asio::ip::tcp;

struct Server::Impl {
    ServerOptions options;
    asio::io_context io;
    std::unique_ptr<tcp::acceptor> tcp_acceptor;
    std::unique_ptr<tcp::acceptor> ws_acceptor;
    std::vector<std::thread> accept_threads;

    std::mutex mutex;
    std::condition_variable stopped_cv;
    bool stopping = false;
    bool stopped = false;
    struct Connection {
        int fd = -1;
        std::thread thread;
        bool done = false;
    };
    std::list<Connection> connections;

    std::unique_ptr<tcp::acceptor> bind(std::uint16_t port) {
        auto acc = std::make_unique<tcp::acceptor>(io);
        try {
            const tcp::endpoint ep(asio::ip::make_address(options.address), port);
            acc->open(ep.protocol());
            acc->set_option(tcp::acceptor::reuse_address(true));
            acc->bind(ep);
            acc->listen();
        } catch (const boost::system::system_error& e) {
            throw Error(Errc::io, "cannot listen on " + options.address + ":" + std::to_string(port) +
                                      ": " + e.what());
        }
        return acc;
    }

    void accept_loop(tcp::acceptor& acc, bool websocket) {
        for (;;) {
            tcp::socket sock(io);
            boost::system::error_code ec;
            acc.accept(sock, ec);
            std::lock_guard lock(mutex);
            reap();
            if (stopping)
                return;
            if (ec)
                continue;
            Connection& c = connections.emplace_back();
            c.fd = sock.native_handle();
            c.thread = std::thread([this, &c, websocket, s = std::move(sock)]() mutable {
                if (websocket)
                    serve_ws(std::move(s));
                else
                    serve_tcp(std::move(s));
                std::lock_guard l(mutex);
                c.done = true;
            });
        }
    }

    // Joins finished connection threads. Caller holds the mutex.
    void reap() {
        for (auto it = connections.begin(); it != connections.end();) {
            if (it->done) {
                it->thread.join();
                it = connections.erase(it);
            } else {
                ++it;
            }
        }
    }

    void serve_tcp(tcp::socket sock) {
        WireSession session(options.defaults, options.sink);
        asio::streambuf buf;
        boost::system::error_code ec;
        while (!session.closed()) {
            asio::read_until(sock, buf, '\n', ec);
            if (ec)
                break;
            std::istream in(&buf);
            std::string line;
            std::getline(in, line);
            std::string reply;
            for (const auto& r : session.handle(line)) reply += r + '\n';
            if (!reply.empty())
                asio::write(sock, asio::buffer(reply), ec);
            if (ec)
                break;
        }
        sock.shutdown(tcp::socket::shutdown_both, ec);
        sock.close(ec);
    }

    void serve_ws(tcp::socket sock) {
        beast::websocket::stream<tcp::socket> ws(std::move(sock));
        boost::system::error_code ec;
        ws.accept(ec);
        if (ec)
            return;
        ws.text(true);
        WireSession session(options.defaults, options.sink);
        while (!session.closed()) {
            beast::flat_buffer buf;
            ws.read(buf, ec);
            if (ec)
                return;
            const std::string msg = beast::buffers_to_string(buf.data());
            for (const auto& r : session.handle(msg)) {
                ws.write(asio::buffer(r), ec);
                if (ec)
                    return;
            }
        }
        ws.close(beast::websocket::close_code::normal, ec);
    }
};

Server::Server(ServerOptions options) : impl_(std::make_unique<Impl>()) {
    options.defaults.validate();
    impl_->options = std::move(options);
}

Server::~Server() {
    stop();
}

void Server::start() {
    impl_->tcp_acceptor = impl_->bind(impl_->options.port);
    if (impl_->options.websocket)
        impl_->ws_acceptor = impl_->bind(impl_->options.ws_port);
    impl_->accept_threads.emplace_back([this] { impl_->accept_loop(*impl_->tcp_acceptor, false); });
    if (impl_->ws_acceptor)
        impl_->accept_threads.emplace_back([this] { impl_->accept_loop(*impl_->ws_acceptor, true); });
}

void Server::stop() {
    if (!impl_)
        return;
    {
        std::lock_guard lock(impl_->mutex);
        if (impl_->stopped)
            return;
        impl_->stopping = true;
        for (auto& c : impl_->connections)
            if (!c.done)
                ::shutdown(c.fd, SHUT_RDWR);
    }
    // Wake the blocking accepts with a throwaway connection each.
    for (auto* acc : {impl_->tcp_acceptor.get(), impl_->ws_acceptor.get()}) {
        if (!acc)
            continue;
        try {
            tcp::socket s(impl_->io);
            s.connect(acc->local_endpoint());
        } catch (const boost::system::system_error&) {
        }
    }
    for (auto& t : impl_->accept_threads) t.join();
    impl_->accept_threads.clear();
    std::list<Impl::Connection> rest;
    {
        std::lock_guard lock(impl_->mutex);
        rest.swap(impl_->connections);
    }
    for (auto& c : rest) c.thread.join();
    std::lock_guard lock(impl_->mutex);
    impl_->stopped = true;
    impl_->stopped_cv.notify_all();
}

void Server::wait() {
    std::unique_lock lock(impl_->mutex);
    impl_->stopped_cv.wait(lock, [this] { return impl_->stopped; });
}

std::uint16_t Server::tcp_port() const {
    return impl_->tcp_acceptor ? impl_->tcp_acceptor->local_endpoint().port() : 0;
}

std::uint16_t Server::ws_port() const {
    return impl_->ws_acceptor ? impl_->ws_acceptor->local_endpoint().port() : 0;
}

struct LineClient::Impl {
    asio::io_context io;
    tcp::socket sock{io};
    asio::streambuf buf;
};

LineClient::LineClient(const std::string& host, std::uint16_t port) : impl_(std::make_unique<Impl>()) {
    try {
        tcp::resolver resolver(impl_->io);
        asio::connect(impl_->sock, resolver.resolve(host, std::to_string(port)));
    } catch (const boost::system::system_error& e) {
        throw Error(Errc::io, "cannot connect to " + host + ":" + std::to_string(port) + ": " + e.what());
    }
}

LineClient::~LineClient() = default;

void LineClient::send(const std::string& line) {
    const std::string data = line + '\n';
    boost::system::error_code ec;
    asio::write(impl_->sock, asio::buffer(data), ec);
    if (ec)
        throw Error(Errc::io, "send failed: " + ec.message());
}

bool LineClient::read_line(std::string& line) {
    boost::system::error_code ec;
    asio::read_until(impl_->sock, impl_->buf, '\n', ec);
    if (ec && impl_->buf.size() == 0)
        return false;
    std::istream in(&impl_->buf);
    std::getline(in, line);
    return true;
}

std::vector<std::string> run_transcript(const std::vector<std::string>& lines,
                                        const SessionConfig& defaults, const LogSink& sink) {
    WireSession session(defaults, sink);
    std::vector<std::string> out;
    for (const auto& l : lines) {
        if (session.closed())
            break;
        for (auto& r : session.handle(l)) out.push_back(std::move(r));
    }
    return out;
}

} // namespace cdgain
