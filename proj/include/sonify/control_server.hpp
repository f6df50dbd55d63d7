#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "sonify/live_session.hpp"

namespace sonify {

namespace detail {
class Connection;
}

/// WebSocket host for a LiveSession. Text frames carry JSON control and state
/// messages; binary frames carry audio (see encode_audio_frame). One io
/// thread serves all connections, a second thread runs the render loop.
class ControlServer {
public:
    struct Options {
        std::string address = "127.0.0.1";
        std::uint16_t port = 8765;  ///< 0 picks a free port
        /// Pace rendering to the wall clock; off renders as fast as possible.
        bool realtime = true;
        /// Audio a client may have queued before the oldest chunks are dropped.
        double max_lag_seconds = 1.0;
    };

    ControlServer(LiveSession& session, Options options);
    ~ControlServer();
    ControlServer(const ControlServer&) = delete;
    ControlServer& operator=(const ControlServer&) = delete;

    /// Binds and starts both threads. Throws std::system_error if the port
    /// cannot be bound.
    void start();
    void stop();

    std::uint16_t port() const;
    std::size_t client_count() const;

private:
    friend class detail::Connection;
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace sonify
