#include "sonify/control_server.hpp"
#include "sonify/outbound_queue.hpp"

#include <atomic>
#include <chrono>
#include <set>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

namespace sonify {

namespace net = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = net::ip::tcp;


namespace detail {
class Connection;
}
using detail::Connection;

struct ControlServer::Impl {
    LiveSession& live;
    Options options;
    net::io_context ioc{1};
    tcp::acceptor acceptor{ioc};
    std::set<std::shared_ptr<Connection>> clients;
    std::atomic<std::size_t> client_count{0};
    std::atomic<bool> running{false};
    std::thread io_thread;
    std::thread render_thread;
    std::uint16_t bound_port = 0;

    Impl(LiveSession& l, Options o) : live(l), options(std::move(o)) {}

    std::size_t max_lag_frames() const {
        return static_cast<std::size_t>(options.max_lag_seconds * live.current()->sample_rate);
    }

    void do_accept();
    void send_to_all(const std::vector<ServerMessage>& messages, const Connection* except = nullptr);
    void render_loop();
};

namespace detail {

class Connection : public std::enable_shared_from_this<Connection> {
public:
    Connection(tcp::socket socket, ControlServer::Impl& server)
        : ws_(std::move(socket)), server_(server), queue_(server.max_lag_frames()) {}

    void run() {
        ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
        ws_.async_accept([self = shared_from_this()](beast::error_code ec) {
            if (!ec) self->on_open();
        });
    }

    void send(const std::shared_ptr<const std::string>& text) {
        queue_.push_text(text);
        if (!queue_.writing()) write_next();
    }

    void send_audio(const std::shared_ptr<const std::vector<std::uint8_t>>& bytes, std::uint64_t start,
                    std::size_t frames) {
        queue_.push_audio(bytes, start, frames);
        if (!queue_.writing()) write_next();
    }

    void close() {
        beast::error_code ec;
        beast::get_lowest_layer(ws_).socket().close(ec);
    }

private:
    void on_open() {
        if (!server_.running) return;
        server_.clients.insert(shared_from_this());
        server_.client_count = server_.clients.size();
        auto [full, patch] = server_.live.connect();
        send(std::make_shared<const std::string>(serialize(ServerMessage{std::move(full)})));
        server_.send_to_all(patch, this);
        read();
    }

    void read() {
        ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
            self->on_read(ec);
        });
    }

    void on_read(beast::error_code ec) {
        if (ec) {
            drop();
            return;
        }
        LiveSession::Reply reply;
        if (ws_.got_text()) {
            reply = server_.live.handle_text(beast::buffers_to_string(buffer_.data()));
        } else {
            reply.to_sender.push_back(msg::Error{"malformed", "binary frames are not accepted from clients", {}});
        }
        buffer_.consume(buffer_.size());
        for (const auto& m : reply.to_sender) send(std::make_shared<const std::string>(serialize(m)));
        server_.send_to_all(reply.broadcast, this);
        read();
    }

    void drop() {
        if (server_.clients.erase(shared_from_this()) == 0) return;
        server_.client_count = server_.clients.size();
        server_.send_to_all(server_.live.disconnect());
    }

    void write_next() {
        const OutboundFrame* item = queue_.begin_write();
        if (item == nullptr) return;
        ws_.binary(item->binary);
        auto done = [self = shared_from_this()](beast::error_code ec, std::size_t) {
            if (ec) {
                self->queue_.clear();
                return;
            }
            self->queue_.pop();
            self->write_next();
        };
        if (item->binary) {
            ws_.async_write(net::buffer(*item->audio), std::move(done));
        } else {
            ws_.async_write(net::buffer(*item->text), std::move(done));
        }
    }

    websocket::stream<beast::tcp_stream> ws_;
    ControlServer::Impl& server_;
    beast::flat_buffer buffer_;
    OutboundQueue queue_;
};

}  // namespace detail

void ControlServer::Impl::do_accept() {
    acceptor.async_accept(net::make_strand(ioc), [this](beast::error_code ec, tcp::socket socket) {
        if (!running) return;
        if (!ec) std::make_shared<Connection>(std::move(socket), *this)->run();
        do_accept();
    });
}

void ControlServer::Impl::send_to_all(const std::vector<ServerMessage>& messages, const Connection* except) {
    for (const auto& m : messages) {
        const auto text = std::make_shared<const std::string>(serialize(m));
        for (const auto& c : clients) {
            if (c.get() != except) c->send(text);
        }
    }
}

void ControlServer::Impl::render_loop() {
    using clock = std::chrono::steady_clock;
    const auto t0 = clock::now();
    const std::uint64_t frame0 = live.next_frame();
    while (running) {
        auto chunk = std::make_shared<LiveSession::Chunk>(live.render_chunk());
        net::post(ioc, [this, chunk] {
            const auto bytes = std::make_shared<const std::vector<std::uint8_t>>(encode_audio_frame(chunk->audio));
            for (const auto& c : clients) c->send_audio(bytes, chunk->audio.start_frame, chunk->audio.frames());
            send_to_all(chunk->events);
            if (chunk->reached_end) send_to_all(live.playback_ended(chunk->play_serial));
        });
        if (options.realtime) {
            const double seconds =
                static_cast<double>(live.next_frame() - frame0) / live.current()->sample_rate;
            std::this_thread::sleep_until(t0 + std::chrono::duration_cast<clock::duration>(
                                                   std::chrono::duration<double>(seconds)));
        } else {
            std::this_thread::yield();
        }
    }
}

ControlServer::ControlServer(LiveSession& session, Options options)
    : impl_(std::make_unique<Impl>(session, std::move(options))) {}

ControlServer::~ControlServer() {
    stop();
}

void ControlServer::start() {
    auto& s = *impl_;
    const tcp::endpoint endpoint(net::ip::make_address(s.options.address), s.options.port);
    s.acceptor.open(endpoint.protocol());
    s.acceptor.set_option(net::socket_base::reuse_address(true));
    s.acceptor.bind(endpoint);
    s.acceptor.listen(net::socket_base::max_listen_connections);
    s.bound_port = s.acceptor.local_endpoint().port();
    s.running = true;
    s.do_accept();
    s.io_thread = std::thread([&s] { s.ioc.run(); });
    s.render_thread = std::thread([&s] { s.render_loop(); });
}

void ControlServer::stop() {
    auto& s = *impl_;
    if (s.running.exchange(false)) {
        if (s.render_thread.joinable()) s.render_thread.join();
        net::post(s.ioc, [&s] {
            beast::error_code ec;
            s.acceptor.close(ec);
            for (const auto& c : s.clients) c->close();
            s.clients.clear();
            s.client_count = 0;
        });
        net::post(s.ioc, [&s] { s.ioc.stop(); });
        if (s.io_thread.joinable()) s.io_thread.join();
    }
}

std::uint16_t ControlServer::port() const {
    return impl_->bound_port;
}

std::size_t ControlServer::client_count() const {
    return impl_->client_count.load();
}

}  // namespace sonify
