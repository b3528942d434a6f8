#include "tcsim/app/workspace.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "tcsim/error.hpp"
#include "tcsim/io.hpp"

namespace tcsim::app {

std::string artifact_key(std::string_view stage, const Json& inputs) {
    std::string text(stage);
    text += '\n';
    text += inputs.dump();
    return io::sha256_hex(text);
}

WorkspaceLock::WorkspaceLock(const std::filesystem::path& root) {
    auto lock_path = root / ".lock";
    fd_ = ::open(lock_path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
    if (fd_ < 0) throw IoError("cannot open lock file " + lock_path.string() + ": " + std::strerror(errno));
    if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
        ::close(fd_);
        fd_ = -1;
        throw WorkspaceError("workspace " + root.string() + " is in use by another command");
    }
}

WorkspaceLock::~WorkspaceLock() {
    if (fd_ >= 0) {
        ::flock(fd_, LOCK_UN);
        ::close(fd_);
    }
}

namespace {

const std::filesystem::path& ensure_directory(const std::filesystem::path& root) {
    std::error_code ec;
    std::filesystem::create_directories(root, ec);
    if (ec) throw IoError("cannot create workspace " + root.string() + ": " + ec.message());
    if (!std::filesystem::is_directory(root)) throw WorkspaceError(root.string() + " is not a directory");
    return root;
}

constexpr const char* manifest_name = "manifest.json";

}  // namespace

Workspace::Workspace(std::filesystem::path root) : root_(std::move(root)), lock_(ensure_directory(root_)) {
    auto manifest_path = root_ / manifest_name;
    if (std::filesystem::exists(manifest_path)) {
        try {
            manifest_ = Json::parse(io::read_file(manifest_path));
        } catch (const Json::exception& e) {
            throw WorkspaceError("corrupt workspace manifest " + manifest_path.string() + ": " + e.what());
        }
        if (!manifest_.is_object() || manifest_.value("version", 0) != 1)
            throw WorkspaceError("unsupported workspace manifest " + manifest_path.string());
    } else {
        manifest_ = Json::object();
        manifest_["version"] = 1;
    }
    if (!manifest_.contains("artifacts")) manifest_["artifacts"] = Json::object();
    if (!manifest_.contains("notes")) manifest_["notes"] = Json::object();
}

std::filesystem::path Workspace::path(std::string_view relative) const { return root_ / std::string(relative); }

std::optional<Artifact> Workspace::find(std::string_view name) const {
    const auto& all = manifest_["artifacts"];
    auto it = all.find(std::string(name));
    if (it == all.end()) return std::nullopt;
    Artifact a;
    a.file = it->value("file", "");
    a.key = it->value("key", "");
    a.sha256 = it->value("sha256", "");
    a.params = it->contains("params") ? (*it)["params"] : Json::object();
    return a;
}

bool Workspace::fresh(std::string_view name, std::string_view key) const {
    auto a = find(name);
    if (!a || a->key != key) return false;
    auto p = path(a->file);
    if (!std::filesystem::exists(p)) return false;
    return io::sha256_hex(io::read_file(p)) == a->sha256;
}

std::string Workspace::store(std::string_view name, std::string_view file, std::string_view bytes,
                             std::string_view key, Json params) {
    auto p = path(file);
    std::error_code ec;
    std::filesystem::create_directories(p.parent_path(), ec);
    if (ec) throw IoError("cannot create " + p.parent_path().string() + ": " + ec.message());
    io::write_file_atomic(p, bytes);
    auto sha = io::sha256_hex(bytes);
    Json entry = Json::object();
    entry["file"] = std::string(file);
    entry["key"] = std::string(key);
    entry["sha256"] = sha;
    entry["params"] = std::move(params);
    manifest_["artifacts"][std::string(name)] = std::move(entry);
    save_manifest();
    return sha;
}

std::string Workspace::load(std::string_view name) const {
    auto a = find(name);
    if (!a) throw WorkspaceError("workspace has no artifact '" + std::string(name) + "'");
    auto p = path(a->file);
    if (!std::filesystem::exists(p))
        throw WorkspaceError("artifact '" + std::string(name) + "' is missing its file " + p.string());
    auto bytes = io::read_file(p);
    if (io::sha256_hex(bytes) != a->sha256)
        throw WorkspaceError("artifact '" + std::string(name) + "' was modified outside the tool");
    return bytes;
}

std::optional<std::string> Workspace::note(std::string_view key) const {
    const auto& notes = manifest_["notes"];
    auto it = notes.find(std::string(key));
    if (it == notes.end() || !it->is_string()) return std::nullopt;
    return it->get<std::string>();
}

void Workspace::set_note(std::string_view key, std::string_view value) {
    manifest_["notes"][std::string(key)] = std::string(value);
    save_manifest();
}

void Workspace::save_manifest() const { io::write_file_atomic(root_ / manifest_name, manifest_.dump(2) + "\n"); }

}  // namespace tcsim::app
