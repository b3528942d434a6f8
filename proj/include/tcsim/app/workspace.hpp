#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

namespace tcsim::app {

using Json = nlohmann::ordered_json;

/// Cache key of an artifact: SHA-256 over the stage name and every input
/// that determines its content (upstream keys, settings, input file hashes).
std::string artifact_key(std::string_view stage, const Json& inputs);

/// Exclusive advisory lock on `<root>/.lock`, held for the object lifetime.
class WorkspaceLock {
public:
    explicit WorkspaceLock(const std::filesystem::path& root);
    ~WorkspaceLock();
    WorkspaceLock(const WorkspaceLock&) = delete;
    WorkspaceLock& operator=(const WorkspaceLock&) = delete;

private:
    int fd_ = -1;
};

struct Artifact {
    std::string file;    // relative to the workspace root
    std::string key;     // artifact_key at build time
    std::string sha256;  // of the file content
    Json params;         // what is needed to rebuild it
};

/// Directory of cached artifacts indexed by `manifest.json`.
class Workspace {
public:
    /// Creates the directory if needed and takes the lock.
    explicit Workspace(std::filesystem::path root);

    [[nodiscard]] const std::filesystem::path& root() const { return root_; }
    [[nodiscard]] std::filesystem::path path(std::string_view relative) const;

    [[nodiscard]] std::optional<Artifact> find(std::string_view name) const;
    /// True when the artifact exists, was built under `key` and its file
    /// still has the recorded content hash.
    [[nodiscard]] bool fresh(std::string_view name, std::string_view key) const;

    /// Writes the file atomically and records it in the manifest.
    /// Returns the content hash.
    std::string store(std::string_view name, std::string_view file, std::string_view bytes, std::string_view key,
                      Json params = Json::object());
    /// Reads an artifact's file; throws WorkspaceError if it is absent or its
    /// content no longer matches the manifest.
    [[nodiscard]] std::string load(std::string_view name) const;

    /// Free-form manifest values (e.g. the most recent clustering).
    [[nodiscard]] std::optional<std::string> note(std::string_view key) const;
    void set_note(std::string_view key, std::string_view value);

private:
    void save_manifest() const;

    std::filesystem::path root_;
    WorkspaceLock lock_;
    Json manifest_;
};

}  // namespace tcsim::app
