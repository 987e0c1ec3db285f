#pragma once

#include <atomic>
#include <condition_variable>
#include <deque>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "store.hpp"

namespace httplib {
class Server;
}

namespace ttm::service {

struct ServiceConfig {
    std::string host = "127.0.0.1";
    int port = 8080;  // 0 picks a free port
    std::filesystem::path storage_root = "ttm-store";
    std::string checkpoint;  // toy denoiser checkpoint used by jobs
    int workers = 1;  // 0 accepts and queues jobs without running them
    std::size_t queue_capacity = 64;
    bool requeue_on_restart = true;  // otherwise interrupted jobs are marked failed
};

/// Reads a JSON config file (when given) and applies TTM_PORT,
/// TTM_STORAGE_ROOT and TTM_CHECKPOINT from the environment on top.
ServiceConfig load_service_config(const std::optional<std::filesystem::path>& file);
nlohmann::json to_json(const ServiceConfig& config);

/// HTTP project/job service. Endpoints:
///   POST /projects                      image upload (raw PNG or multipart field "image")
///   GET  /projects/{id}
///   POST /projects/{id}/preview-warp    MotionSpec JSON -> multipart/mixed frames
///   POST /projects/{id}/jobs            {"spec"|"camera_path"+"depth_pfm_base64", "sampler", "denoiser"?}
///   GET  /jobs/{id}
///   GET  /jobs/{id}/result              ?format=ttmt (default) | png
///   GET  /healthz
/// POSTs honour an Idempotency-Key header by replaying the first response.
class Service {
public:
    explicit Service(ServiceConfig config);
    ~Service();
    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    /// Recovers interrupted jobs, starts the workers and begins listening in a
    /// background thread. Returns the bound port.
    int start();
    /// Blocks until stop() is called from another thread or a signal handler.
    void wait();
    void stop();

    Store& store() { return *store_; }
    const ServiceConfig& config() const { return config_; }

private:
    void install_routes();
    void enqueue(const std::string& job_id);
    void worker_loop();
    void run_job(const std::string& job_id);

    ServiceConfig config_;
    std::unique_ptr<Store> store_;
    std::unique_ptr<httplib::Server> server_;
    std::thread listener_;
    std::vector<std::thread> workers_;
    std::deque<std::string> queue_;
    std::mutex queue_mutex_;
    std::condition_variable queue_cv_;
    std::mutex idempotency_mutex_;
    std::atomic<bool> stopping_{false};
    int port_ = 0;
};

}  // namespace ttm::service
