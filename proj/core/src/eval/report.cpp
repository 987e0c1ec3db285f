#include "ttm/eval/report.hpp"

#include <cstdio>
#include <limits>

#include "ttm/common/error.hpp"

namespace ttm::eval {

ClipMetrics evaluate_clip(const Video& video, const std::vector<ObjectTarget>& objects, const FlowProvider& flow,
                          const TrackerConfig& tracker) {
    if (objects.empty()) throw ValidationError("evaluate_clip.objects", "no objects to track");
    ClipMetrics m;
    for (const auto& o : objects) {
        const TrackResult tr = centroid_tracker(video, o.initial_mask, tracker);
        m.lost_ratio = std::max(m.lost_ratio, tr.lost_ratio());
        m.ctd_held += ctd(tr.object, o.target) / static_cast<double>(objects.size());
        if (tr.lost_ratio() > tracker.max_lost_ratio) {
            m.tracking_failed = true;
            continue;
        }
        m.ctd += ctd(tr.object, o.target, tr.lost);
        m.bg_obj_ctd += bg_obj_ctd(tr);
    }
    if (!m.tracking_failed) {
        m.ctd /= static_cast<double>(objects.size());
        m.bg_obj_ctd /= static_cast<double>(objects.size());
    }
    m.dynamic = dynamic_degree(video, flow);
    return m;
}

void RowAccumulator::add(const ClipMetrics& m) {
    ++clips_;
    if (m.dynamic.dynamic) ++dynamic_;
    score_ += m.dynamic.score;
    held_ += m.ctd_held;
    if (m.tracking_failed) {
        ++failed_;
        return;
    }
    ctd_ += m.ctd;
    bg_ += m.bg_obj_ctd;
}

ReportRow RowAccumulator::finish(const std::string& label) const {
    ReportRow r;
    r.label = label;
    r.clips = clips_;
    r.failed = failed_;
    const std::size_t ok = clips_ - failed_;
    r.ctd = ok ? ctd_ / static_cast<double>(ok) : std::numeric_limits<double>::quiet_NaN();
    r.ctd_held = clips_ ? held_ / static_cast<double>(clips_) : std::numeric_limits<double>::quiet_NaN();
    r.bg_obj_ctd = ok ? bg_ / static_cast<double>(ok) : std::numeric_limits<double>::quiet_NaN();
    r.dynamic_degree = clips_ ? static_cast<double>(dynamic_) / static_cast<double>(clips_) : 0.0;
    r.dynamic_score = clips_ ? score_ / static_cast<double>(clips_) : 0.0;
    return r;
}

nlohmann::json EvalReport::to_json() const {
    nlohmann::json rows_json = nlohmann::json::array();
    for (const auto& r : rows) {
        rows_json.push_back({{"label", r.label},
                             {"clips", r.clips},
                             {"tracking_failed", r.failed},
                             {"ctd", r.ctd},
                             {"ctd_held", r.ctd_held},
                             {"bg_obj_ctd", r.bg_obj_ctd},
                             {"dynamic_degree", r.dynamic_degree},
                             {"dynamic_score", r.dynamic_score}});
    }
    return {{"rows", rows_json}, {"meta", meta}};
}

std::string EvalReport::table() const {
    std::string out;
    char line[256];
    std::snprintf(line, sizeof line, "%-34s %6s %6s %9s %9s %11s %8s %8s\n", "setting", "clips", "failed", "CTD",
                  "CTD(held)", "BG-Obj CTD", "dynamic", "dyn.score");
    out += line;
    for (const auto& r : rows) {
        std::snprintf(line, sizeof line, "%-34s %6zu %6zu %9.3f %9.3f %11.3f %8.3f %8.3f\n", r.label.c_str(), r.clips,
                      r.failed, r.ctd, r.ctd_held, r.bg_obj_ctd, r.dynamic_degree, r.dynamic_score);
        out += line;
    }
    return out;
}

const ReportRow& EvalReport::row(const std::string& label) const {
    for (const auto& r : rows)
        if (r.label == label) return r;
    throw ValidationError("EvalReport.row", "no row '" + label + "'");
}

}  // namespace ttm::eval
