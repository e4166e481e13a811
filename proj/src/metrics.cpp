#include "echovel/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "json.hpp"

namespace echovel {

void OksConfig::validate() const {
    if (!(s > 0.0)) throw InvalidInput("OKS scale must be > 0");
    if (!(score_threshold >= 0.0 && score_threshold <= 1.0)) {
        throw InvalidInput("score threshold must lie in [0,1]");
    }
    if (thresholds.empty()) throw InvalidInput("OKS threshold list must not be empty");
    double prev = 0.0;
    for (double t : thresholds) {
        if (!(t > prev && t <= 1.0)) {
            throw InvalidInput("OKS thresholds must be strictly increasing in (0,1]");
        }
        prev = t;
    }
}

double oks(const EchoTrajectory& pred, const EchoTrajectory& gt, const OksConfig& cfg) {
    double k = trajectory_length_px(gt);
    if (k == 0.0) k = 1.0;  // stationary ground truth: floor to 1 px
    const double denom = 2.0 * cfg.s * cfg.s * k * k;
    double sum = 0.0;
    for (int i = 0; i < 3; ++i) {
        const Keypoint& p = pred.keypoints[i];
        const Keypoint& g = gt.keypoints[i];
        const double d2 = (p.col - g.col) * (p.col - g.col) + (p.row - g.row) * (p.row - g.row);
        sum += std::exp(-d2 / denom);
    }
    return sum / 3.0;
}

Matching match_detections(const std::vector<EchoTrajectory>& preds,
                          const std::vector<EchoTrajectory>& gts, double threshold,
                          const OksConfig& cfg) {
    std::vector<std::size_t> order(preds.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (preds[a].score != preds[b].score) return preds[a].score > preds[b].score;
        return preds[a].id < preds[b].id;
    });

    Matching m;
    std::vector<bool> gt_taken(gts.size(), false);
    for (std::size_t pi : order) {
        int best = -1;
        double best_oks = 0.0;
        for (std::size_t gi = 0; gi < gts.size(); ++gi) {
            if (gt_taken[gi]) continue;
            const double v = oks(preds[pi], gts[gi], cfg);
            if (v < threshold) continue;
            if (best < 0 || v > best_oks ||
                (v == best_oks && gts[gi].id < gts[static_cast<std::size_t>(best)].id)) {
                best = static_cast<int>(gi);
                best_oks = v;
            }
        }
        if (best >= 0) {
            gt_taken[static_cast<std::size_t>(best)] = true;
            m.pairs.push_back({pi, static_cast<std::size_t>(best), best_oks});
        } else {
            m.unmatched_preds.push_back(pi);
        }
    }
    for (std::size_t gi = 0; gi < gts.size(); ++gi) {
        if (!gt_taken[gi]) m.unmatched_gts.push_back(gi);
    }
    return m;
}

std::optional<double> average_precision(std::vector<PooledDetection> detections,
                                        std::size_t total_gts) {
    if (total_gts == 0) return std::nullopt;
    if (detections.empty()) return 0.0;
    std::stable_sort(detections.begin(), detections.end(),
                     [](const PooledDetection& a, const PooledDetection& b) {
                         if (a.score != b.score) return a.score > b.score;
                         return a.annotation_id < b.annotation_id;
                     });
    const std::size_t n = detections.size();
    std::vector<double> precision(n), recall(n);
    std::size_t tp = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (detections[i].is_tp) ++tp;
        precision[i] = static_cast<double>(tp) / static_cast<double>(i + 1);
        recall[i] = static_cast<double>(tp) / static_cast<double>(total_gts);
    }
    std::vector<double> max_prec_from(n);
    max_prec_from[n - 1] = precision[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) {
        max_prec_from[i] = std::max(precision[i], max_prec_from[i + 1]);
    }
    double sum = 0.0;
    std::size_t idx = 0;
    for (int k = 0; k <= 100; ++k) {
        const double r = k / 100.0;
        while (idx < n && recall[idx] < r) ++idx;
        if (idx < n) sum += max_prec_from[idx];
    }
    return sum / 101.0;
}

namespace {

struct PerImage {
    std::vector<EchoTrajectory> preds;
    std::vector<EchoTrajectory> gts;
};

std::map<std::int64_t, PerImage> group_by_image(const EchoDataset& preds, const EchoDataset& gts,
                                                double score_threshold) {
    std::map<std::int64_t, PerImage> by_image;
    for (const auto& a : gts.annotations) {
        by_image[a.image_id].gts.push_back(a.echo);
    }
    for (const auto& a : preds.annotations) {
        if (a.echo.score > score_threshold) {
            by_image[a.image_id].preds.push_back(a.echo);
        }
    }
    return by_image;
}

std::string threshold_key(double t) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%.2f", t);
    return buf;
}

}  // namespace

EvalReport evaluate(const EchoDataset& preds, const EchoDataset& gts, const OksConfig& cfg) {
    cfg.validate();
    EvalReport report;
    report.score_threshold = cfg.score_threshold;

    const auto by_image = group_by_image(preds, gts, cfg.score_threshold);
    std::size_t total_gts = 0;
    for (const auto& [id, img] : by_image) {
        total_gts += img.gts.size();
        for (const auto& g : img.gts) {
            if (trajectory_length_px(g) == 0.0) ++report.stationary_gt;
        }
    }

    std::vector<double> aps;
    for (std::size_t ti = 0; ti < cfg.thresholds.size(); ++ti) {
        const double thr = cfg.thresholds[ti];
        std::vector<PooledDetection> pooled;
        std::size_t tp = 0, fp = 0, fn = 0;
        for (const auto& [id, img] : by_image) {
            const Matching m = match_detections(img.preds, img.gts, thr, cfg);
            tp += m.pairs.size();
            fp += m.unmatched_preds.size();
            fn += m.unmatched_gts.size();
            std::vector<bool> is_tp(img.preds.size(), false);
            for (const auto& pair : m.pairs) is_tp[pair.pred_idx] = true;
            for (std::size_t pi = 0; pi < img.preds.size(); ++pi) {
                pooled.push_back({img.preds[pi].score, img.preds[pi].id, is_tp[pi]});
            }
        }
        const auto ap = average_precision(std::move(pooled), total_gts);
        if (ap) {
            report.ap_per_threshold[threshold_key(thr)] = *ap;
            aps.push_back(*ap);
        }
        if (ti == 0) {
            report.tp = tp;
            report.fp = fp;
            report.fn = fn;
        }
    }
    if (!aps.empty() && aps.size() == cfg.thresholds.size()) {
        double sum = 0.0;
        for (double v : aps) sum += v;
        report.map = sum / static_cast<double>(aps.size());
    }

    // Length pairs for the RMSE, matched at the configured OKS level.
    std::vector<std::pair<double, double>> length_pairs;
    for (const auto& [id, img] : by_image) {
        const Matching m = match_detections(img.preds, img.gts, cfg.rmse_match_threshold, cfg);
        for (const auto& pair : m.pairs) {
            length_pairs.push_back({trajectory_length_px(img.preds[pair.pred_idx]),
                                    trajectory_length_px(img.gts[pair.gt_idx])});
        }
    }
    report.trajectory_rmse_px = trajectory_rmse(length_pairs);
    return report;
}

std::optional<double> mean_average_precision(const EchoDataset& preds, const EchoDataset& gts,
                                             const OksConfig& cfg) {
    return evaluate(preds, gts, cfg).map;
}

std::optional<double> trajectory_rmse(
    const std::vector<std::pair<double, double>>& length_pairs) {
    if (length_pairs.empty()) return std::nullopt;
    double sum = 0.0;
    for (const auto& [lp, lg] : length_pairs) {
        sum += (lp - lg) * (lp - lg);
    }
    return std::sqrt(sum / static_cast<double>(length_pairs.size()));
}

std::string EvalReport::to_json() const {
    nlohmann::json j;
    j["ap_per_threshold"] = ap_per_threshold;
    j["map"] = map ? nlohmann::json(*map) : nlohmann::json(nullptr);
    j["trajectory_rmse_px"] =
        trajectory_rmse_px ? nlohmann::json(*trajectory_rmse_px) : nlohmann::json(nullptr);
    j["tp"] = tp;
    j["fp"] = fp;
    j["fn"] = fn;
    j["score_threshold"] = score_threshold;
    j["stationary_gt"] = stationary_gt;
    return j.dump();
}

}  // namespace echovel
