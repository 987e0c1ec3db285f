#include "service.hpp"

#include <cstdlib>
#include <fstream>
#include <regex>

#include <openssl/evp.h>

#include "ttm/app/pipeline.hpp"
#include "ttm/common/error.hpp"
#include "ttm/common/hash.hpp"
#include "ttm/common/image_io.hpp"
#include "ttm/common/tensor_file.hpp"
#include "ttm/depth/reproject.hpp"
#include "ttm/diffusion/toy_denoiser.hpp"
#include "ttm/motion/spec_json.hpp"
#include "ttm/toy/sprite_world.hpp"

// After Eigen: httplib pulls in <resolv.h>, whose _res macro breaks Eigen headers.
#include <httplib.h>

namespace ttm::service {
namespace {

constexpr const char* kBoundary = "ttm-frame-boundary";

std::string base64_decode(const std::string& in) {
    std::string clean;
    for (char c : in)
        if (!std::isspace(static_cast<unsigned char>(c))) clean.push_back(c);
    if (clean.size() % 4 != 0) throw ValidationError("base64", "payload length is not a multiple of 4");
    std::string out(clean.size() / 4 * 3, '\0');
    const int n = EVP_DecodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                  reinterpret_cast<const unsigned char*>(clean.data()), static_cast<int>(clean.size()));
    if (n < 0) throw ValidationError("base64", "invalid base64 payload");
    std::size_t pad = 0;
    if (!clean.empty() && clean.back() == '=') ++pad;
    if (clean.size() > 1 && clean[clean.size() - 2] == '=') ++pad;
    out.resize(static_cast<std::size_t>(n) - pad);
    return out;
}

nlohmann::json error_body(const std::string& kind, const std::string& message,
                          const std::vector<std::string>& violations = {}) {
    nlohmann::json j = {{"error", kind}, {"message", message}};
    if (!violations.empty()) j["violations"] = violations;
    return j;
}

void send_json(httplib::Response& res, int status, const nlohmann::json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

struct Part {
    std::string content_type;
    std::string filename;
    std::string body;
};

std::string multipart(const std::vector<Part>& parts) {
    std::string out;
    for (const auto& p : parts) {
        out += std::string("--") + kBoundary + "\r\nContent-Type: " + p.content_type + "\r\n";
        if (!p.filename.empty()) out += "Content-Disposition: inline; filename=\"" + p.filename + "\"\r\n";
        out += "Content-Length: " + std::to_string(p.body.size()) + "\r\n\r\n" + p.body + "\r\n";
    }
    out += std::string("--") + kBoundary + "--\r\n";
    return out;
}

Image project_image(const Store& store, const ProjectRecord& p) {
    const auto bytes = store.get_blob(p.image_hash);
    if (!bytes) throw RuntimeError("image blob missing for project " + p.id);
    return decode_png(*bytes);
}

motion::WarpedReference build_reference(const Image& image, const nlohmann::json& request) {
    if (request.contains("spec")) {
        const auto spec = motion::motion_spec_from_json(request["spec"]);
        return motion::build_warped_reference(image, spec);
    }
    if (request.contains("camera_path")) {
        if (!request.contains("depth_pfm_base64")) {
            throw ValidationError("JobRequest.depth", "camera jobs need depth_pfm_base64");
        }
        const auto doc = depth::camera_path_from_json(request["camera_path"]);
        depth::DepthMap dm{decode_pfm(base64_decode(request["depth_pfm_base64"].get<std::string>())), doc.intrinsics,
                           doc.axes};
        return depth::build_camera_reference(image, dm, doc.path);
    }
    throw ValidationError("JobRequest.motion", "request needs a spec or a camera_path");
}

}  // namespace

ServiceConfig load_service_config(const std::optional<std::filesystem::path>& file) {
    ServiceConfig c;
    if (file) {
        std::ifstream in(*file);
        if (!in) throw RuntimeError("cannot open config " + file->string());
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(in);
            c.host = j.value("host", c.host);
            c.port = j.value("port", c.port);
            c.storage_root = j.value("storage_root", c.storage_root.string());
            c.checkpoint = j.value("checkpoint", c.checkpoint);
            c.workers = j.value("workers", c.workers);
            c.queue_capacity = j.value("queue_capacity", c.queue_capacity);
            c.requeue_on_restart = j.value("requeue_on_restart", c.requeue_on_restart);
        } catch (const nlohmann::json::exception& e) {
            throw ValidationError("ServiceConfig.schema", e.what());
        }
    }
    if (const char* v = std::getenv("TTM_PORT")) c.port = std::atoi(v);
    if (const char* v = std::getenv("TTM_STORAGE_ROOT")) c.storage_root = v;
    if (const char* v = std::getenv("TTM_CHECKPOINT")) c.checkpoint = v;
    ViolationList violations;
    violations.check(c.port >= 0 && c.port < 65536, "ServiceConfig.port");
    violations.check(c.workers >= 1, "ServiceConfig.workers");
    violations.check(c.queue_capacity >= 1, "ServiceConfig.queue_capacity");
    violations.throw_if_any("service config");
    return c;
}

nlohmann::json to_json(const ServiceConfig& c) {
    return {{"host", c.host},
            {"port", c.port},
            {"storage_root", c.storage_root.string()},
            {"checkpoint", c.checkpoint},
            {"workers", c.workers},
            {"queue_capacity", c.queue_capacity},
            {"requeue_on_restart", c.requeue_on_restart}};
}

Service::Service(ServiceConfig config)
    : config_(std::move(config)),
      store_(std::make_unique<Store>(config_.storage_root)),
      server_(std::make_unique<httplib::Server>()) {
    install_routes();
}

Service::~Service() { stop(); }

int Service::start() {
    store_->recover_running(config_.requeue_on_restart);
    for (const auto& j : store_->jobs_with_status(JobStatus::Queued)) enqueue(j.id);
    for (int i = 0; i < config_.workers; ++i) workers_.emplace_back([this] { worker_loop(); });

    if (config_.port == 0) {
        port_ = server_->bind_to_any_port(config_.host);
    } else {
        port_ = server_->bind_to_port(config_.host, config_.port) ? config_.port : -1;
    }
    if (port_ < 0) throw RuntimeError("cannot bind " + config_.host + ":" + std::to_string(config_.port));
    listener_ = std::thread([this] { server_->listen_after_bind(); });
    server_->wait_until_ready();
    return port_;
}

void Service::wait() {
    if (listener_.joinable()) listener_.join();
}

void Service::stop() {
    if (stopping_.exchange(true)) return;
    server_->stop();
    if (listener_.joinable()) listener_.join();
    queue_cv_.notify_all();
    for (auto& w : workers_)
        if (w.joinable()) w.join();
}

void Service::enqueue(const std::string& job_id) {
    {
        std::lock_guard lock(queue_mutex_);
        queue_.push_back(job_id);
    }
    queue_cv_.notify_one();
}

void Service::worker_loop() {
    while (true) {
        std::string id;
        {
            std::unique_lock lock(queue_mutex_);
            queue_cv_.wait(lock, [this] { return stopping_ || !queue_.empty(); });
            if (stopping_) return;
            id = queue_.front();
            queue_.pop_front();
        }
        run_job(id);
    }
}

void Service::run_job(const std::string& id) {
    if (!store_->transition(id, JobStatus::Queued, JobStatus::Running)) return;
    try {
        const auto job = *store_->job(id);
        const auto project = store_->project(job.project_id);
        if (!project) throw RuntimeError("project " + job.project_id + " vanished");
        const Image image = project_image(*store_, *project);
        const auto reference = build_reference(image, job.request);

        app::DenoiserChoice choice;
        const auto den = job.request.value("denoiser", nlohmann::json::object());
        choice.kind = den.value("kind", std::string("toy"));
        if (choice.kind == "analytic") {
            choice.mean = den.value("mean", 0.0);
            choice.variance = den.value("variance", 1.0);
            choice.schedule = diffusion::parse_schedule_kind(den.value("schedule", std::string("cosine")));
            choice.steps = den.value("steps", 50);
        } else {
            choice.checkpoint = config_.checkpoint;
            if (choice.checkpoint.empty() || !std::filesystem::exists(choice.checkpoint)) {
                throw RuntimeError("no denoiser checkpoint configured on the server");
            }
        }
        const auto config = sampler::sampler_config_from_json(job.request.value("sampler", nlohmann::json::object()));
        const auto run_dir = store_->root() / "runs" / id;
        auto manifest = app::prepare_run(run_dir, reference, image, config, choice);
        store_->set_manifest(id, sampler::to_json(manifest), config.t_weak);

        sampler::SamplerHooks hooks;
        hooks.on_progress = [&](int done, int) { store_->set_progress(id, done); };
        const auto out = app::run_and_store(manifest, run_dir, &hooks);
        const std::string blob = store_->put_blob(encode_tensor(out.video));
        store_->finish_job(id, blob, sampler::to_json(manifest));
    } catch (const std::exception& e) {
        store_->fail_job(id, e.what());
    }
}

void Service::install_routes() {
    auto& srv = *server_;

    // Wraps a POST handler with Idempotency-Key replay and error mapping.
    const auto guarded = [this](auto handler, bool idempotent) {
        return [this, handler, idempotent](const httplib::Request& req, httplib::Response& res) {
            const std::string key =
                idempotent && req.has_header("Idempotency-Key")
                    ? req.method + " " + req.path + " " + req.get_header_value("Idempotency-Key")
                    : std::string();
            std::unique_lock<std::mutex> lock(idempotency_mutex_, std::defer_lock);
            if (!key.empty()) {
                lock.lock();
                if (const auto prior = store_->request_response(key)) {
                    res.status = prior->status;
                    res.set_content(prior->body, prior->content_type);
                    res.set_header("Idempotent-Replay", "true");
                    return;
                }
            }
            try {
                handler(req, res);
            } catch (const ValidationError& e) {
                send_json(res, 400, error_body("validation", e.what(), e.violations()));
            } catch (const std::exception& e) {
                send_json(res, 500, error_body("runtime", e.what()));
            }
            if (!key.empty() && res.status < 500) {
                store_->save_request_response(
                    key, {res.status, res.get_header_value("Content-Type"), res.body});
            }
        };
    };

    srv.Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
        send_json(res, 200, {{"status", "ok"}});
    });

    srv.Post("/projects", guarded(
                              [this](const httplib::Request& req, httplib::Response& res) {
                                  std::string bytes = req.body;
                                  if (req.is_multipart_form_data()) {
                                      if (!req.has_file("image")) {
                                          throw ValidationError("Project.image", "multipart upload needs an 'image' field");
                                      }
                                      bytes = req.get_file_value("image").content;
                                  }
                                  Image image;
                                  try {
                                      image = decode_png(bytes);
                                  } catch (const std::exception& e) {
                                      throw ValidationError("Project.image", std::string("undecodable image: ") + e.what());
                                  }
                                  validate_source_image(image);
                                  const std::string key = store_->put_blob(bytes);
                                  const auto p = store_->create_project(key, image.dim(1), image.dim(2));
                                  send_json(res, 201,
                                            {{"id", p.id}, {"height", p.height}, {"width", p.width},
                                             {"image_hash", p.image_hash}, {"created", p.created}});
                              },
                              true));

    srv.Get(R"(/projects/([A-Za-z0-9_]+))", [this](const httplib::Request& req, httplib::Response& res) {
        const auto p = store_->project(req.matches[1]);
        if (!p) return send_json(res, 404, error_body("not_found", "no such project"));
        nlohmann::json specs = nlohmann::json::array();
        for (const auto& s : store_->specs(p->id)) {
            specs.push_back({{"version", s.version}, {"kind", s.kind}, {"body", s.body}, {"created", s.created}});
        }
        send_json(res, 200,
                  {{"id", p->id}, {"height", p->height}, {"width", p->width}, {"image_hash", p->image_hash},
                   {"created", p->created}, {"updated", p->updated}, {"specs", specs}});
    });

    srv.Post(R"(/projects/([A-Za-z0-9_]+)/preview-warp)",
             guarded(
                 [this](const httplib::Request& req, httplib::Response& res) {
                     const auto p = store_->project(req.matches[1]);
                     if (!p) return send_json(res, 404, error_body("not_found", "no such project"));
                     nlohmann::json body;
                     try {
                         body = nlohmann::json::parse(req.body);
                     } catch (const nlohmann::json::exception& e) {
                         throw ValidationError("MotionSpec.schema", e.what());
                     }
                     const auto spec = motion::motion_spec_from_json(body);
                     const Image image = project_image(*store_, *p);
                     motion::validate(spec, image.dim(1), image.dim(2));
                     const auto ref = motion::build_warped_reference(image, spec);
                     store_->add_spec(p->id, "motion", body);

                     std::vector<Part> parts;
                     parts.push_back({"application/json", "reference.json", app::warp_artifact_summary(ref).dump()});
                     for (std::size_t f = 0; f < ref.frame_count(); ++f) {
                         parts.push_back({"image/png", frame_filename("frame", f), encode_png(video_frame(ref.frames, f))});
                     }
                     for (std::size_t f = 0; f < ref.frame_count(); ++f) {
                         const Mask m = mask_frame(ref.mask, f);
                         Image gray = make_image(m.dim(0), m.dim(1));
                         for (std::size_t c = 0; c < 3; ++c)
                             for (std::size_t i = 0; i < m.size(); ++i) gray[c * m.size() + i] = m[i] ? 1.0f : 0.0f;
                         parts.push_back({"image/png", frame_filename("mask", f), encode_png(gray)});
                     }
                     res.status = 200;
                     res.set_content(multipart(parts), std::string("multipart/mixed; boundary=") + kBoundary);
                 },
                 true));

    srv.Post(R"(/projects/([A-Za-z0-9_]+)/jobs)",
             guarded(
                 [this](const httplib::Request& req, httplib::Response& res) {
                     const auto p = store_->project(req.matches[1]);
                     if (!p) return send_json(res, 404, error_body("not_found", "no such project"));
                     nlohmann::json body;
                     try {
                         body = nlohmann::json::parse(req.body);
                     } catch (const nlohmann::json::exception& e) {
                         throw ValidationError("JobRequest.schema", e.what());
                     }
                     // Validate everything cheap up front so bad requests never queue.
                     const auto config = sampler::sampler_config_from_json(body.value("sampler", nlohmann::json::object()));
                     const auto den = body.value("denoiser", nlohmann::json::object());
                     const bool toy_job = den.value("kind", std::string("toy")) == "toy";
                     const bool have_checkpoint =
                         !config_.checkpoint.empty() && std::filesystem::exists(config_.checkpoint);
                     int steps = den.value("steps", 50);
                     if (toy_job && have_checkpoint) {
                         steps = diffusion::ToyCheckpoint::load(config_.checkpoint).schedule.steps();
                     }
                     sampler::validate(config, steps);
                     const Image image = project_image(*store_, *p);
                     if (body.contains("spec")) {
                         const auto spec = motion::motion_spec_from_json(body["spec"]);
                         motion::validate(spec, image.dim(1), image.dim(2));
                         store_->add_spec(p->id, "motion", body["spec"]);
                     } else if (body.contains("camera_path")) {
                         depth::validate(depth::camera_path_from_json(body["camera_path"]).path);
                         store_->add_spec(p->id, "camera", body["camera_path"]);
                     } else {
                         throw ValidationError("JobRequest.motion", "request needs a spec or a camera_path");
                     }
                     {
                         std::lock_guard lock(queue_mutex_);
                         if (queue_.size() >= config_.queue_capacity) {
                             return send_json(res, 503, error_body("busy", "job queue is full"));
                         }
                     }
                     const auto job = store_->create_job(p->id, body);
                     if (toy_job && !have_checkpoint) {
                         store_->fail_job(job.id, "no denoiser checkpoint configured on the server");
                     } else {
                         enqueue(job.id);
                     }
                     const auto stored = store_->job(job.id);
                     send_json(res, 202,
                               {{"id", job.id}, {"status", to_string(stored->status)}, {"error", stored->error},
                                {"t_weak", config.t_weak}});
                 },
                 true));

    srv.Get(R"(/jobs/([A-Za-z0-9_]+))", [this](const httplib::Request& req, httplib::Response& res) {
        const auto j = store_->job(req.matches[1]);
        if (!j) return send_json(res, 404, error_body("not_found", "no such job"));
        nlohmann::json body = {{"id", j->id},
                               {"project_id", j->project_id},
                               {"status", to_string(j->status)},
                               {"progress", {{"step", j->progress}, {"total", j->total}}},
                               {"manifest", j->manifest},
                               {"error", j->error},
                               {"created", j->created},
                               {"updated", j->updated}};
        if (j->status == JobStatus::Done) {
            body["result_blob"] = j->result_hash;
            body["result_hash"] = j->manifest.value("result_hash", std::string());
        }
        send_json(res, 200, body);
    });

    srv.Get(R"(/jobs/([A-Za-z0-9_]+)/result)", [this](const httplib::Request& req, httplib::Response& res) {
        const auto j = store_->job(req.matches[1]);
        if (!j) return send_json(res, 404, error_body("not_found", "no such job"));
        if (j->status == JobStatus::Failed) return send_json(res, 409, error_body("failed", j->error));
        if (j->status != JobStatus::Done) {
            return send_json(res, 409, error_body("not_ready", "job is " + std::string(to_string(j->status))));
        }
        const auto bytes = store_->get_blob(j->result_hash);
        if (!bytes) return send_json(res, 500, error_body("runtime", "result blob missing"));
        if (req.get_param_value("format") == "png") {
            const Video pixels = toy::to_pixel_space(decode_float_tensor(*bytes));
            std::vector<Part> parts;
            for (std::size_t f = 0; f < pixels.dim(0); ++f) {
                parts.push_back({"image/png", frame_filename("result", f), encode_png(video_frame(pixels, f))});
            }
            res.set_content(multipart(parts), std::string("multipart/mixed; boundary=") + kBoundary);
            return;
        }
        res.set_header("X-Result-Hash", j->manifest.value("result_hash", std::string()));
        res.set_content(*bytes, "application/octet-stream");
    });
}

}  // namespace ttm::service
