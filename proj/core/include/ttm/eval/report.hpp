#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ttm/eval/flow.hpp"
#include "ttm/eval/tracker.hpp"

namespace ttm::eval {

/// One tracked object: its frame-0 mask and the target trajectory of its centroid.
struct ObjectTarget {
    Mask initial_mask;
    Trajectory target;
};

struct ClipMetrics {
    double ctd = 0.0;         // mean over objects, tracked frames only
    double ctd_held = 0.0;    // mean over objects, lost frames scored at the held position
    double bg_obj_ctd = 0.0;  // mean over objects
    DynamicDegree dynamic;
    double lost_ratio = 0.0;  // worst object
    bool tracking_failed = false;
};

/// Tracks every object in a pixel-space video and scores it against its target.
ClipMetrics evaluate_clip(const Video& video, const std::vector<ObjectTarget>& objects,
                          const FlowProvider& flow, const TrackerConfig& tracker = {});

struct ReportRow {
    std::string label;
    std::size_t clips = 0;
    std::size_t failed = 0;  // clips whose tracker lost the object too often; excluded from CTD means
    double ctd = 0.0;
    double ctd_held = 0.0;  // over every clip, failed ones included
    double bg_obj_ctd = 0.0;
    double dynamic_degree = 0.0;  // fraction of clips classified dynamic
    double dynamic_score = 0.0;   // mean fraction of dynamic frames
};

class RowAccumulator {
public:
    void add(const ClipMetrics& m);
    ReportRow finish(const std::string& label) const;

private:
    std::size_t clips_ = 0, failed_ = 0, dynamic_ = 0;
    double ctd_ = 0.0, held_ = 0.0, bg_ = 0.0, score_ = 0.0;
};

struct EvalReport {
    std::vector<ReportRow> rows;
    nlohmann::json meta = nlohmann::json::object();

    nlohmann::json to_json() const;
    /// Fixed-width table, one row per setting.
    std::string table() const;
    const ReportRow& row(const std::string& label) const;
};

}  // namespace ttm::eval
