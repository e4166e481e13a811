#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "echovel/echoes.hpp"

namespace echovel {

struct OksConfig {
    double s = 1.0;                 // object scale, uniform
    double score_threshold = 0.7;   // detections must score strictly above
    std::vector<double> thresholds = {0.50, 0.55, 0.60, 0.65, 0.70,
                                      0.75, 0.80, 0.85, 0.90, 0.95};
    double rmse_match_threshold = 0.50;  // OKS level at which RMSE pairs form

    void validate() const;
};

// Object keypoint similarity between a prediction and a ground truth. The
// per-keypoint constant is the ground-truth trajectory length in pixels,
// floored at 1 px for stationary ground truths; no visibility weighting.
double oks(const EchoTrajectory& pred, const EchoTrajectory& gt, const OksConfig& cfg);

struct MatchedPair {
    std::size_t pred_idx = 0;
    std::size_t gt_idx = 0;
    double oks = 0.0;
};

struct Matching {
    std::vector<MatchedPair> pairs;
    std::vector<std::size_t> unmatched_preds;  // false positives
    std::vector<std::size_t> unmatched_gts;    // false negatives
};

// Greedy per-image matching: detections in descending score order each claim
// the unmatched ground truth with the highest OKS, provided OKS >= threshold.
// Expects preds already filtered to score > cfg.score_threshold.
Matching match_detections(const std::vector<EchoTrajectory>& preds,
                          const std::vector<EchoTrajectory>& gts, double threshold,
                          const OksConfig& cfg);

struct PooledDetection {
    double score = 0.0;
    std::int64_t annotation_id = 0;  // tie-break for stable ordering
    bool is_tp = false;
};

// 101-point interpolated average precision over detections pooled across
// images. Absent when there are no ground truths.
std::optional<double> average_precision(std::vector<PooledDetection> detections,
                                        std::size_t total_gts);

struct EvalReport {
    std::map<std::string, double> ap_per_threshold;  // "0.50" -> AP
    std::optional<double> map;
    std::optional<double> trajectory_rmse_px;
    std::size_t tp = 0;  // at the lowest threshold
    std::size_t fp = 0;
    std::size_t fn = 0;
    double score_threshold = 0.7;
    std::size_t stationary_gt = 0;  // ground truths evaluated with the 1 px floor

    std::string to_json() const;
};

// Full evaluation of predictions against ground truth, image by image.
EvalReport evaluate(const EchoDataset& preds, const EchoDataset& gts, const OksConfig& cfg);

// Mean AP over cfg.thresholds; convenience over evaluate().
std::optional<double> mean_average_precision(const EchoDataset& preds, const EchoDataset& gts,
                                             const OksConfig& cfg);

// RMSE of predicted-vs-annotated trajectory lengths over matched pairs.
std::optional<double> trajectory_rmse(const std::vector<std::pair<double, double>>& length_pairs);

}  // namespace echovel
