#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "sonify/session.hpp"

namespace sonify {

/// A JSON document does not match the expected shape.
class SchemaError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The session config is malformed or violates a session invariant.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

nlohmann::json to_json(const Envelope& env);
Envelope envelope_from_json(const nlohmann::json& j);

nlohmann::json to_json(const SoundSource& source);
/// Sample buffers are not loaded here; see load_sources().
SoundSource source_from_json(const nlohmann::json& j);

nlohmann::json to_json(const Mappings& mappings);
Mappings mappings_from_json(const nlohmann::json& j);

nlohmann::json to_json(const TrackConfig& track);
TrackConfig track_from_json(const nlohmann::json& j);

/// Config-file form of a session. Runtime transport flags are not included.
nlohmann::json to_json(const Session& session);

/// Builds a session from its config-file form. Relative dataset and sample
/// paths resolve against base_dir. Throws ConfigError for schema or invariant
/// violations and DatasetError when the dataset cannot be loaded.
Session session_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);

/// Reads and validates a session config file.
Session load_session(const std::filesystem::path& config_path);

/// Decodes every sample source that has no buffer yet. Throws SampleLoadError.
void load_sources(Session& session, const std::filesystem::path& base_dir);

std::filesystem::path resolve_path(const std::string& path, const std::filesystem::path& base_dir);

}  // namespace sonify
