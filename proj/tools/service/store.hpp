#pragma once

#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

struct sqlite3;

namespace ttm::service {

enum class JobStatus { Queued, Running, Done, Failed };
std::string_view to_string(JobStatus status);
JobStatus parse_job_status(std::string_view name);

struct ProjectRecord {
    std::string id;
    std::string image_hash;
    std::size_t height = 0, width = 0;
    std::string created, updated;
};

struct SpecRecord {
    int version = 0;
    std::string kind;  // "motion" or "camera"
    nlohmann::json body;
    std::string created;
};

struct JobRecord {
    std::string id;
    std::string project_id;
    JobStatus status = JobStatus::Queued;
    nlohmann::json request;   // what the client submitted
    nlohmann::json manifest;  // run manifest once prepared
    std::string result_hash;  // blob key of the result tensor
    int progress = 0, total = 0;
    std::string error;
    std::string created, updated;
};

struct StoredResponse {
    int status = 200;
    std::string content_type;
    std::string body;
};

/// Content-addressed blobs under root/blobs plus an SQLite index. All
/// methods are safe to call from several threads.
class Store {
public:
    explicit Store(const std::filesystem::path& root);
    ~Store();
    Store(const Store&) = delete;
    Store& operator=(const Store&) = delete;

    const std::filesystem::path& root() const { return root_; }

    /// Stores bytes under their SHA-256 and returns the key.
    std::string put_blob(std::string_view bytes);
    std::optional<std::string> get_blob(const std::string& key) const;
    std::filesystem::path blob_path(const std::string& key) const;

    ProjectRecord create_project(const std::string& image_hash, std::size_t height, std::size_t width);
    std::optional<ProjectRecord> project(const std::string& id) const;
    int add_spec(const std::string& project_id, const std::string& kind, const nlohmann::json& body);
    std::vector<SpecRecord> specs(const std::string& project_id) const;

    JobRecord create_job(const std::string& project_id, const nlohmann::json& request);
    std::optional<JobRecord> job(const std::string& id) const;
    /// Enforces queued -> running -> {done, failed}; returns false on an illegal transition.
    bool transition(const std::string& id, JobStatus from, JobStatus to);
    void set_manifest(const std::string& id, const nlohmann::json& manifest, int total);
    void set_progress(const std::string& id, int progress);
    void finish_job(const std::string& id, const std::string& result_hash, const nlohmann::json& manifest);
    void fail_job(const std::string& id, const std::string& error);
    std::vector<JobRecord> jobs_with_status(JobStatus status) const;
    /// Startup recovery: running jobs become queued (requeue) or failed.
    std::vector<std::string> recover_running(bool requeue);

    std::optional<StoredResponse> request_response(const std::string& key) const;
    void save_request_response(const std::string& key, const StoredResponse& response);

private:
    std::filesystem::path root_;
    sqlite3* db_ = nullptr;
    mutable std::mutex mutex_;
};

}  // namespace ttm::service
