#pragma once

#include <filesystem>

#include "sonify/protocol.hpp"
#include "sonify/session.hpp"

namespace sonify {

/// Returns the session that results from applying one control message. The
/// input is never modified; on failure ValidationError is thrown and the
/// caller keeps its current session. Relative dataset and sample paths
/// resolve against base_dir.
Session apply_update(const Session& current, const ClientMessage& update,
                     const std::filesystem::path& base_dir = {});

}  // namespace sonify
