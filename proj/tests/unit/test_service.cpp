#include <gtest/gtest.h>

#include <chrono>
#include <fstream>
#include <thread>

#include <openssl/evp.h>

#include "service.hpp"
#include "test_support.hpp"
#include "ttm/app/pipeline.hpp"
#include "ttm/common/hash.hpp"
#include "ttm/common/image_io.hpp"
#include "ttm/common/tensor_file.hpp"
#include "ttm/depth/reproject.hpp"
#include "ttm/motion/spec_json.hpp"
#include "ttm/motion/warp.hpp"

// After Eigen: httplib pulls in <resolv.h>, whose _res macro breaks Eigen headers.
#include <httplib.h>

using namespace ttm;
using ttm::testing::TempDir;
using nlohmann::json;

namespace {

constexpr std::size_t kSide = 32;

Image test_image() {
    Rng rng(17);
    return ttm::testing::random_image(kSide, kSide, rng);
}

motion::MotionSpec drag_spec() {
    return motion::linear_drag(ttm::testing::box_mask(kSide, kSide, 10, 10, 6, 6), 8, 5.0, -3.0);
}

json analytic_job(std::uint64_t seed) {
    return {{"spec", motion::to_json(drag_spec())},
            {"sampler", {{"t_weak", 36}, {"t_strong", 25}, {"regime", "dual_clock"}, {"seed", seed}}},
            {"denoiser", {{"kind", "analytic"}, {"mean", 0.0}, {"variance", 0.25}}}};
}

service::ServiceConfig config_for(const std::filesystem::path& root, int workers = 1) {
    service::ServiceConfig c;
    c.port = 0;
    c.storage_root = root;
    c.workers = workers;
    return c;
}

std::string create_project(httplib::Client& cli, const std::string& png) {
    const auto res = cli.Post("/projects", png, "image/png");
    EXPECT_TRUE(res);
    EXPECT_EQ(res->status, 201) << res->body;
    return json::parse(res->body).at("id").get<std::string>();
}

json get_json(httplib::Client& cli, const std::string& path) {
    const auto res = cli.Get(path);
    EXPECT_TRUE(res);
    return json::parse(res->body);
}

json wait_for_terminal(httplib::Client& cli, const std::string& job, std::vector<int>* steps = nullptr) {
    for (int i = 0; i < 6000; ++i) {
        const auto j = get_json(cli, "/jobs/" + job);
        if (steps) steps->push_back(j["progress"]["step"].get<int>());
        const auto status = j["status"].get<std::string>();
        if (status == "done" || status == "failed") return j;
        std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
    ADD_FAILURE() << "job did not finish";
    return {};
}

// First part of a multipart/mixed body.
std::string first_part(const std::string& body) {
    const auto start = body.find("\r\n\r\n");
    const auto end = body.find("\r\n--ttm-frame-boundary", start);
    return body.substr(start + 4, end - start - 4);
}

std::string base64(const std::string& bytes) {
    std::string out(4 * ((bytes.size() + 2) / 3) + 1, '\0');
    const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                  reinterpret_cast<const unsigned char*>(bytes.data()), int(bytes.size()));
    out.resize(std::size_t(n));
    return out;
}

}  // namespace

TEST(Service, HealthAndProjectLifecycle) {
    TempDir dir;
    service::Service svc(config_for(dir.path()));
    httplib::Client cli("127.0.0.1", svc.start());
    EXPECT_EQ(get_json(cli, "/healthz")["status"], "ok");

    const auto png = encode_png(test_image());
    const auto id = create_project(cli, png);
    const auto p = get_json(cli, "/projects/" + id);
    EXPECT_EQ(p["height"], kSide);
    EXPECT_EQ(p["width"], kSide);
    EXPECT_EQ(p["specs"].size(), 0u);

    httplib::MultipartFormDataItems items{{"image", png, "img.png", "image/png"}};
    const auto multi = cli.Post("/projects", items);
    ASSERT_TRUE(multi);
    EXPECT_EQ(multi->status, 201);

    EXPECT_EQ(cli.Get("/projects/nope")->status, 404);
    EXPECT_EQ(cli.Get("/jobs/nope")->status, 404);
}

TEST(Service, CorruptUploadIsAValidationError) {
    TempDir dir;
    service::Service svc(config_for(dir.path()));
    httplib::Client cli("127.0.0.1", svc.start());
    const auto res = cli.Post("/projects", std::string("not a png"), "image/png");
    ASSERT_TRUE(res);
    EXPECT_EQ(res->status, 400);
    const auto body = json::parse(res->body);
    EXPECT_EQ(body["error"], "validation");
    EXPECT_FALSE(body["violations"].empty());
}

TEST(Service, PreviewWarpMatchesLibraryReference) {
    TempDir dir;
    service::Service svc(config_for(dir.path()));
    httplib::Client cli("127.0.0.1", svc.start());
    const auto image = test_image();
    const auto id = create_project(cli, encode_png(image));
    const auto res = cli.Post("/projects/" + id + "/preview-warp", motion::to_json(drag_spec()).dump(),
                              "application/json");
    ASSERT_TRUE(res);
    ASSERT_EQ(res->status, 200) << res->body;
    EXPECT_NE(res->get_header_value("Content-Type").find("multipart/mixed"), std::string::npos);
    const auto summary = json::parse(first_part(res->body));
    const auto direct = motion::build_warped_reference(image, drag_spec());
    EXPECT_EQ(summary["reference_hash"], content_hash(direct.frames));
    EXPECT_EQ(summary["mask_hash"], content_hash(direct.mask));
    EXPECT_EQ(get_json(cli, "/projects/" + id)["specs"].size(), 1u);

    auto bad = motion::to_json(drag_spec());
    bad["frame_count"] = 0;
    const auto rejected = cli.Post("/projects/" + id + "/preview-warp", bad.dump(), "application/json");
    EXPECT_EQ(rejected->status, 400);
    EXPECT_FALSE(json::parse(rejected->body)["violations"].empty());
}

TEST(Service, AnalyticJobMatchesDirectPipelineHash) {
    TempDir dir;
    service::Service svc(config_for(dir / "store"));
    httplib::Client cli("127.0.0.1", svc.start());
    const auto image = test_image();
    const auto id = create_project(cli, encode_png(image));

    const auto created = cli.Post("/projects/" + id + "/jobs", analytic_job(7).dump(), "application/json");
    ASSERT_TRUE(created);
    ASSERT_EQ(created->status, 202) << created->body;
    const auto job = json::parse(created->body)["id"].get<std::string>();
    std::vector<int> steps;
    const auto done = wait_for_terminal(cli, job, &steps);
    ASSERT_EQ(done["status"], "done") << done.dump();
    EXPECT_EQ(done["progress"]["step"], 36);
    EXPECT_EQ(done["progress"]["total"], 36);
    EXPECT_TRUE(std::is_sorted(steps.begin(), steps.end()));

    const auto result = cli.Get("/jobs/" + job + "/result");
    ASSERT_EQ(result->status, 200);
    const auto video = decode_float_tensor(result->body);
    EXPECT_EQ(result->get_header_value("X-Result-Hash"), content_hash(video));

    // The same request through the library.
    app::DenoiserChoice choice;
    choice.kind = "analytic";
    choice.variance = 0.25;
    sampler::SamplerConfig cfg;
    cfg.seed = 7;
    auto manifest = app::prepare_run(dir / "direct", motion::build_warped_reference(image, drag_spec()), image,
                                     cfg, choice);
    const auto direct = app::run_and_store(manifest, dir / "direct");
    EXPECT_EQ(done["result_hash"], direct.result_hash);
    EXPECT_EQ(content_hash(video), direct.result_hash);

    const auto pngs = cli.Get("/jobs/" + job + "/result?format=png");
    ASSERT_EQ(pngs->status, 200);
    EXPECT_EQ(decode_png(first_part(pngs->body)).dim(1), kSide);
}

TEST(Service, QueuedJobIsNotReadyAndRunsAfterRestart) {
    TempDir dir;
    std::string project, job;
    {
        // No workers: the job stays queued.
        service::Service svc(config_for(dir.path(), 0));
        httplib::Client cli("127.0.0.1", svc.start());
        project = create_project(cli, encode_png(test_image()));
        const auto created = cli.Post("/projects/" + project + "/jobs", analytic_job(1).dump(), "application/json");
        job = json::parse(created->body)["id"].get<std::string>();
        const auto early = cli.Get("/jobs/" + job + "/result");
        EXPECT_EQ(early->status, 409);
        EXPECT_EQ(json::parse(early->body)["error"], "not_ready");
    }
    service::Service svc(config_for(dir.path(), 1));
    httplib::Client cli("127.0.0.1", svc.start());
    EXPECT_EQ(wait_for_terminal(cli, job)["status"], "done");
}

TEST(Service, InterruptedJobIsRecoveredOnRestart) {
    TempDir dir;
    std::string job;
    {
        service::Service svc(config_for(dir.path(), 0));
        httplib::Client cli("127.0.0.1", svc.start());
        const auto project = create_project(cli, encode_png(test_image()));
        const auto created = cli.Post("/projects/" + project + "/jobs", analytic_job(2).dump(), "application/json");
        job = json::parse(created->body)["id"].get<std::string>();
        // Simulate a crash mid-run.
        ASSERT_TRUE(svc.store().transition(job, service::JobStatus::Queued, service::JobStatus::Running));
    }
    {
        auto c = config_for(dir.path(), 0);
        c.requeue_on_restart = false;
        service::Service svc(c);
        svc.start();
        // Not requeued: marked failed.
        EXPECT_EQ(svc.store().job(job)->status, service::JobStatus::Failed);
    }
    TempDir dir2;
    {
        service::Service svc(config_for(dir2.path(), 0));
        httplib::Client cli("127.0.0.1", svc.start());
        const auto project = create_project(cli, encode_png(test_image()));
        job = json::parse(cli.Post("/projects/" + project + "/jobs", analytic_job(3).dump(), "application/json")->body)
                  ["id"]
                      .get<std::string>();
        ASSERT_TRUE(svc.store().transition(job, service::JobStatus::Queued, service::JobStatus::Running));
    }
    service::Service svc(config_for(dir2.path(), 1));
    httplib::Client cli("127.0.0.1", svc.start());
    EXPECT_EQ(wait_for_terminal(cli, job)["status"], "done");
}

TEST(Service, IdempotencyKeyReplaysFirstResponse) {
    TempDir dir;
    service::Service svc(config_for(dir.path(), 0));
    httplib::Client cli("127.0.0.1", svc.start());
    const auto project = create_project(cli, encode_png(test_image()));
    const httplib::Headers key{{"Idempotency-Key", "abc-123"}};
    const auto a = cli.Post("/projects/" + project + "/jobs", key, analytic_job(4).dump(), "application/json");
    const auto b = cli.Post("/projects/" + project + "/jobs", key, analytic_job(4).dump(), "application/json");
    ASSERT_EQ(a->status, 202);
    EXPECT_EQ(b->status, 202);
    EXPECT_EQ(a->body, b->body);
    EXPECT_EQ(b->get_header_value("Idempotent-Replay"), "true");
    EXPECT_EQ(svc.store().jobs_with_status(service::JobStatus::Queued).size(), 1u);
    const auto c = cli.Post("/projects/" + project + "/jobs", analytic_job(4).dump(), "application/json");
    EXPECT_NE(json::parse(c->body)["id"], json::parse(a->body)["id"]);
}

TEST(Service, ToyJobWithoutCheckpointFails) {
    TempDir dir;
    service::Service svc(config_for(dir.path()));
    httplib::Client cli("127.0.0.1", svc.start());
    const auto project = create_project(cli, encode_png(test_image()));
    auto req = analytic_job(5);
    req["denoiser"] = {{"kind", "toy"}};
    const auto created = cli.Post("/projects/" + project + "/jobs", req.dump(), "application/json");
    ASSERT_EQ(created->status, 202);
    const auto body = json::parse(created->body);
    EXPECT_EQ(body["status"], "failed");
    EXPECT_NE(body["error"].get<std::string>().find("checkpoint"), std::string::npos);
    const auto result = cli.Get("/jobs/" + body["id"].get<std::string>() + "/result");
    EXPECT_EQ(result->status, 409);
    EXPECT_EQ(json::parse(result->body)["error"], "failed");
}

TEST(Service, InvalidJobRequestsListViolations) {
    TempDir dir;
    service::Service svc(config_for(dir.path()));
    httplib::Client cli("127.0.0.1", svc.start());
    const auto project = create_project(cli, encode_png(test_image()));
    auto req = analytic_job(6);
    req["sampler"]["t_strong"] = 40;
    auto res = cli.Post("/projects/" + project + "/jobs", req.dump(), "application/json");
    EXPECT_EQ(res->status, 400);
    EXPECT_FALSE(json::parse(res->body)["violations"].empty());
    res = cli.Post("/projects/" + project + "/jobs", json{{"sampler", json::object()}}.dump(), "application/json");
    EXPECT_EQ(res->status, 400);
    res = cli.Post("/projects/" + project + "/jobs", std::string("{"), "application/json");
    EXPECT_EQ(res->status, 400);
    EXPECT_TRUE(svc.store().jobs_with_status(service::JobStatus::Queued).empty());
}

TEST(Service, CameraJobRuns) {
    TempDir dir;
    service::Service svc(config_for(dir.path()));
    httplib::Client cli("127.0.0.1", svc.start());
    const auto project = create_project(cli, encode_png(test_image()));
    FloatTensor plane({kSide, kSide});
    for (auto& d : plane.values()) d = 4.0f;
    depth::CameraPathDocument doc;
    doc.intrinsics = {30, 30, 15.5, 15.5};
    for (int f = 0; f < 4; ++f) {
        depth::CameraPose pose;
        pose.translation = {0.05 * f, 0, 0};
        doc.path.poses.push_back(pose);
    }
    json req = {{"camera_path", depth::to_json(doc)},
                {"depth_pfm_base64", base64(encode_pfm(plane))},
                {"sampler", {{"seed", 1}}},
                {"denoiser", {{"kind", "analytic"}}}};
    const auto created = cli.Post("/projects/" + project + "/jobs", req.dump(), "application/json");
    ASSERT_EQ(created->status, 202) << created->body;
    const auto done = wait_for_terminal(cli, json::parse(created->body)["id"].get<std::string>());
    EXPECT_EQ(done["status"], "done") << done.dump();
}

TEST(ServiceConfig, EnvironmentOverridesFile) {
    TempDir dir;
    {
        std::ofstream out(dir / "c.json");
        out << R"({"port": 9000, "workers": 3, "storage_root": "x"})";
    }
    ::setenv("TTM_PORT", "9100", 1);
    const auto c = service::load_service_config(dir / "c.json");
    ::unsetenv("TTM_PORT");
    EXPECT_EQ(c.port, 9100);
    EXPECT_EQ(c.workers, 3);
    EXPECT_EQ(c.storage_root, "x");
    {
        std::ofstream out(dir / "bad.json");
        out << R"({"workers": 0})";
    }
    EXPECT_THROW(service::load_service_config(dir / "bad.json"), ValidationError);
}
