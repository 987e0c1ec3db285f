#include "store.hpp"

#include <chrono>
#include <fstream>
#include <random>
#include <sstream>

#include <sqlite3.h>

#include "ttm/common/error.hpp"
#include "ttm/common/hash.hpp"

namespace ttm::service {
namespace {

constexpr const char* kSchema = R"sql(
PRAGMA journal_mode = WAL;
CREATE TABLE IF NOT EXISTS projects (
  id TEXT PRIMARY KEY, image_hash TEXT NOT NULL, height INTEGER NOT NULL, width INTEGER NOT NULL,
  created TEXT NOT NULL, updated TEXT NOT NULL);
CREATE TABLE IF NOT EXISTS specs (
  project_id TEXT NOT NULL, version INTEGER NOT NULL, kind TEXT NOT NULL, body TEXT NOT NULL,
  created TEXT NOT NULL, PRIMARY KEY (project_id, version));
CREATE TABLE IF NOT EXISTS jobs (
  id TEXT PRIMARY KEY, project_id TEXT NOT NULL, status TEXT NOT NULL, request TEXT NOT NULL,
  manifest TEXT NOT NULL, result_hash TEXT NOT NULL, progress INTEGER NOT NULL, total INTEGER NOT NULL,
  error TEXT NOT NULL, created TEXT NOT NULL, updated TEXT NOT NULL);
CREATE TABLE IF NOT EXISTS requests (
  key TEXT PRIMARY KEY, status INTEGER NOT NULL, content_type TEXT NOT NULL, body BLOB NOT NULL);
)sql";

std::string now_iso() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string new_id(std::string_view prefix) {
    static thread_local std::mt19937_64 rng{std::random_device{}()};
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(rng()));
    return std::string(prefix) + buf;
}

class Statement {
public:
    Statement(sqlite3* db, const char* sql) : db_(db) {
        if (sqlite3_prepare_v2(db, sql, -1, &stmt_, nullptr) != SQLITE_OK) {
            throw RuntimeError(std::string("sqlite prepare: ") + sqlite3_errmsg(db));
        }
    }
    ~Statement() { sqlite3_finalize(stmt_); }
    Statement& bind(int i, const std::string& v) {
        sqlite3_bind_text(stmt_, i, v.c_str(), static_cast<int>(v.size()), SQLITE_TRANSIENT);
        return *this;
    }
    Statement& bind_blob(int i, const std::string& v) {
        sqlite3_bind_blob(stmt_, i, v.data(), static_cast<int>(v.size()), SQLITE_TRANSIENT);
        return *this;
    }
    Statement& bind(int i, std::int64_t v) {
        sqlite3_bind_int64(stmt_, i, v);
        return *this;
    }
    bool step() {
        const int rc = sqlite3_step(stmt_);
        if (rc == SQLITE_ROW) return true;
        if (rc == SQLITE_DONE) return false;
        throw RuntimeError(std::string("sqlite step: ") + sqlite3_errmsg(db_));
    }
    std::string text(int col) const {
        const auto* p = sqlite3_column_text(stmt_, col);
        return p ? std::string(reinterpret_cast<const char*>(p), static_cast<std::size_t>(sqlite3_column_bytes(stmt_, col)))
                 : std::string();
    }
    std::string blob(int col) const {
        const auto* p = static_cast<const char*>(sqlite3_column_blob(stmt_, col));
        return p ? std::string(p, static_cast<std::size_t>(sqlite3_column_bytes(stmt_, col))) : std::string();
    }
    std::int64_t integer(int col) const { return sqlite3_column_int64(stmt_, col); }

private:
    sqlite3* db_;
    sqlite3_stmt* stmt_ = nullptr;
};

void exec(sqlite3* db, const char* sql) {
    char* err = nullptr;
    if (sqlite3_exec(db, sql, nullptr, nullptr, &err) != SQLITE_OK) {
        std::string msg = err ? err : "unknown";
        sqlite3_free(err);
        throw RuntimeError("sqlite: " + msg);
    }
}

constexpr const char* kJobColumns =
    "id, project_id, status, request, manifest, result_hash, progress, total, error, created, updated";

JobRecord read_job(const Statement& s) {
    JobRecord j;
    j.id = s.text(0);
    j.project_id = s.text(1);
    j.status = parse_job_status(s.text(2));
    j.request = nlohmann::json::parse(s.text(3));
    j.manifest = nlohmann::json::parse(s.text(4));
    j.result_hash = s.text(5);
    j.progress = static_cast<int>(s.integer(6));
    j.total = static_cast<int>(s.integer(7));
    j.error = s.text(8);
    j.created = s.text(9);
    j.updated = s.text(10);
    return j;
}

}  // namespace

std::string_view to_string(JobStatus s) {
    switch (s) {
        case JobStatus::Queued: return "queued";
        case JobStatus::Running: return "running";
        case JobStatus::Done: return "done";
        case JobStatus::Failed: return "failed";
    }
    return "queued";
}

JobStatus parse_job_status(std::string_view name) {
    if (name == "queued") return JobStatus::Queued;
    if (name == "running") return JobStatus::Running;
    if (name == "done") return JobStatus::Done;
    if (name == "failed") return JobStatus::Failed;
    throw RuntimeError("unknown job status '" + std::string(name) + "'");
}

Store::Store(const std::filesystem::path& root) : root_(root) {
    std::filesystem::create_directories(root_ / "blobs");
    if (sqlite3_open((root_ / "index.sqlite").string().c_str(), &db_) != SQLITE_OK) {
        throw RuntimeError("cannot open index database under " + root_.string());
    }
    sqlite3_busy_timeout(db_, 5000);
    exec(db_, kSchema);
}

Store::~Store() { sqlite3_close(db_); }

std::filesystem::path Store::blob_path(const std::string& key) const { return root_ / "blobs" / key; }

std::string Store::put_blob(std::string_view bytes) {
    const std::string key = sha256_hex(bytes);
    const auto path = blob_path(key);
    std::lock_guard lock(mutex_);
    if (!std::filesystem::exists(path)) {
        const auto tmp = path.string() + ".tmp";
        {
            std::ofstream out(tmp, std::ios::binary);
            out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
            if (!out) throw RuntimeError("cannot write blob " + key);
        }
        std::filesystem::rename(tmp, path);
    }
    return key;
}

std::optional<std::string> Store::get_blob(const std::string& key) const {
    if (key.empty() || key.find('/') != std::string::npos || key.find('.') != std::string::npos) return std::nullopt;
    std::ifstream in(blob_path(key), std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ProjectRecord Store::create_project(const std::string& image_hash, std::size_t height, std::size_t width) {
    ProjectRecord p{new_id("prj_"), image_hash, height, width, now_iso(), now_iso()};
    std::lock_guard lock(mutex_);
    Statement(db_, "INSERT INTO projects VALUES (?, ?, ?, ?, ?, ?)")
        .bind(1, p.id)
        .bind(2, p.image_hash)
        .bind(3, static_cast<std::int64_t>(height))
        .bind(4, static_cast<std::int64_t>(width))
        .bind(5, p.created)
        .bind(6, p.updated)
        .step();
    return p;
}

std::optional<ProjectRecord> Store::project(const std::string& id) const {
    std::lock_guard lock(mutex_);
    Statement s(db_, "SELECT id, image_hash, height, width, created, updated FROM projects WHERE id = ?");
    s.bind(1, id);
    if (!s.step()) return std::nullopt;
    return ProjectRecord{s.text(0), s.text(1), static_cast<std::size_t>(s.integer(2)),
                         static_cast<std::size_t>(s.integer(3)), s.text(4), s.text(5)};
}

int Store::add_spec(const std::string& project_id, const std::string& kind, const nlohmann::json& body) {
    std::lock_guard lock(mutex_);
    exec(db_, "BEGIN IMMEDIATE");
    try {
        Statement q(db_, "SELECT COALESCE(MAX(version), 0) FROM specs WHERE project_id = ?");
        q.bind(1, project_id);
        q.step();
        const int version = static_cast<int>(q.integer(0)) + 1;
        const std::string now = now_iso();
        Statement(db_, "INSERT INTO specs VALUES (?, ?, ?, ?, ?)")
            .bind(1, project_id)
            .bind(2, static_cast<std::int64_t>(version))
            .bind(3, kind)
            .bind(4, body.dump())
            .bind(5, now)
            .step();
        Statement(db_, "UPDATE projects SET updated = ? WHERE id = ?").bind(1, now).bind(2, project_id).step();
        exec(db_, "COMMIT");
        return version;
    } catch (...) {
        exec(db_, "ROLLBACK");
        throw;
    }
}

std::vector<SpecRecord> Store::specs(const std::string& project_id) const {
    std::lock_guard lock(mutex_);
    Statement s(db_, "SELECT version, kind, body, created FROM specs WHERE project_id = ? ORDER BY version");
    s.bind(1, project_id);
    std::vector<SpecRecord> out;
    while (s.step()) {
        out.push_back({static_cast<int>(s.integer(0)), s.text(1), nlohmann::json::parse(s.text(2)), s.text(3)});
    }
    return out;
}

JobRecord Store::create_job(const std::string& project_id, const nlohmann::json& request) {
    JobRecord j;
    j.id = new_id("job_");
    j.project_id = project_id;
    j.request = request;
    j.manifest = nlohmann::json::object();
    j.created = j.updated = now_iso();
    std::lock_guard lock(mutex_);
    Statement(db_, "INSERT INTO jobs VALUES (?, ?, 'queued', ?, '{}', '', 0, 0, '', ?, ?)")
        .bind(1, j.id)
        .bind(2, project_id)
        .bind(3, request.dump())
        .bind(4, j.created)
        .bind(5, j.updated)
        .step();
    return j;
}

std::optional<JobRecord> Store::job(const std::string& id) const {
    std::lock_guard lock(mutex_);
    Statement s(db_, (std::string("SELECT ") + kJobColumns + " FROM jobs WHERE id = ?").c_str());
    s.bind(1, id);
    if (!s.step()) return std::nullopt;
    return read_job(s);
}

bool Store::transition(const std::string& id, JobStatus from, JobStatus to) {
    const bool legal = (from == JobStatus::Queued && to == JobStatus::Running) ||
                       (from == JobStatus::Running && (to == JobStatus::Done || to == JobStatus::Failed)) ||
                       (from == JobStatus::Queued && to == JobStatus::Failed);
    if (!legal) return false;
    std::lock_guard lock(mutex_);
    Statement s(db_, "UPDATE jobs SET status = ?, updated = ? WHERE id = ? AND status = ?");
    s.bind(1, std::string(to_string(to))).bind(2, now_iso()).bind(3, id).bind(4, std::string(to_string(from))).step();
    return sqlite3_changes(db_) == 1;
}

void Store::set_manifest(const std::string& id, const nlohmann::json& manifest, int total) {
    std::lock_guard lock(mutex_);
    Statement(db_, "UPDATE jobs SET manifest = ?, total = ?, updated = ? WHERE id = ?")
        .bind(1, manifest.dump())
        .bind(2, static_cast<std::int64_t>(total))
        .bind(3, now_iso())
        .bind(4, id)
        .step();
}

void Store::set_progress(const std::string& id, int progress) {
    std::lock_guard lock(mutex_);
    // MAX keeps progress monotone even if a stale update arrives late.
    Statement(db_, "UPDATE jobs SET progress = MAX(progress, ?), updated = ? WHERE id = ?")
        .bind(1, static_cast<std::int64_t>(progress))
        .bind(2, now_iso())
        .bind(3, id)
        .step();
}

void Store::finish_job(const std::string& id, const std::string& result_hash, const nlohmann::json& manifest) {
    std::lock_guard lock(mutex_);
    exec(db_, "BEGIN IMMEDIATE");
    try {
        Statement(db_,
                  "UPDATE jobs SET status = 'done', result_hash = ?, manifest = ?, progress = total, updated = ? "
                  "WHERE id = ? AND status = 'running'")
            .bind(1, result_hash)
            .bind(2, manifest.dump())
            .bind(3, now_iso())
            .bind(4, id)
            .step();
        exec(db_, "COMMIT");
    } catch (...) {
        exec(db_, "ROLLBACK");
        throw;
    }
}

void Store::fail_job(const std::string& id, const std::string& error) {
    std::lock_guard lock(mutex_);
    Statement(db_,
              "UPDATE jobs SET status = 'failed', error = ?, updated = ? WHERE id = ? AND status IN ('queued', 'running')")
        .bind(1, error)
        .bind(2, now_iso())
        .bind(3, id)
        .step();
}

std::vector<JobRecord> Store::jobs_with_status(JobStatus status) const {
    std::lock_guard lock(mutex_);
    Statement s(db_, (std::string("SELECT ") + kJobColumns + " FROM jobs WHERE status = ? ORDER BY created, id").c_str());
    s.bind(1, std::string(to_string(status)));
    std::vector<JobRecord> out;
    while (s.step()) out.push_back(read_job(s));
    return out;
}

std::vector<std::string> Store::recover_running(bool requeue) {
    std::vector<std::string> ids;
    for (const auto& j : jobs_with_status(JobStatus::Running)) ids.push_back(j.id);
    std::lock_guard lock(mutex_);
    for (const auto& id : ids) {
        if (requeue) {
            Statement(db_, "UPDATE jobs SET status = 'queued', progress = 0, updated = ? WHERE id = ?")
                .bind(1, now_iso())
                .bind(2, id)
                .step();
        } else {
            Statement(db_, "UPDATE jobs SET status = 'failed', error = ?, updated = ? WHERE id = ?")
                .bind(1, std::string("interrupted by service restart"))
                .bind(2, now_iso())
                .bind(3, id)
                .step();
        }
    }
    return ids;
}

std::optional<StoredResponse> Store::request_response(const std::string& key) const {
    std::lock_guard lock(mutex_);
    Statement s(db_, "SELECT status, content_type, body FROM requests WHERE key = ?");
    s.bind(1, key);
    if (!s.step()) return std::nullopt;
    return StoredResponse{static_cast<int>(s.integer(0)), s.text(1), s.blob(2)};
}

void Store::save_request_response(const std::string& key, const StoredResponse& r) {
    std::lock_guard lock(mutex_);
    Statement(db_, "INSERT OR IGNORE INTO requests VALUES (?, ?, ?, ?)")
        .bind(1, key)
        .bind(2, static_cast<std::int64_t>(r.status))
        .bind(3, r.content_type)
        .bind_blob(4, r.body)
        .step();
}

}  // namespace ttm::service
