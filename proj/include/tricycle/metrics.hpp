#pragma once

#include <cmath>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tricycle/image.hpp"

namespace tricycle {

struct ConfusionCounts {
    long long tp = 0;
    long long fp = 0;
    long long tn = 0;
    long long fn = 0;

    long long total() const { return tp + fp + tn + fn; }
};

inline ConfusionCounts confusion(const MaskImage& pred, const MaskImage& gt) {
    require_same_shape(pred, gt, "confusion");
    require_binary(pred, "confusion(pred)");
    require_binary(gt, "confusion(gt)");
    ConfusionCounts c;
    for (size_t i = 0; i < pred.plane_size(); ++i) {
        const bool p = pred.data[i] != 0.0f;
        const bool g = gt.data[i] != 0.0f;
        if (p && g) ++c.tp;
        else if (p && !g) ++c.fp;
        else if (!p && g) ++c.fn;
        else ++c.tn;
    }
    return c;
}

struct ImageMetrics {
    double f1 = 0.0;
    double specificity = 0.0;
    double sensitivity = 0.0;
    double iou = 0.0;
    double pacc = 0.0;
};

// Zero-denominator convention: when the class a metric is about is absent
// from both masks the metric is 1; when it is absent from the ground truth
// but predicted anyway (or vice versa) the metric is 0.
inline ImageMetrics compute_metrics(const ConfusionCounts& c) {
    if (c.total() <= 0)
        throw std::invalid_argument("compute_metrics: empty confusion counts");
    ImageMetrics m;
    const auto tp = static_cast<double>(c.tp), fp = static_cast<double>(c.fp);
    const auto tn = static_cast<double>(c.tn), fn = static_cast<double>(c.fn);
    m.f1 = (2 * tp + fp + fn > 0) ? 2 * tp / (2 * tp + fp + fn) : 1.0;
    m.iou = (tp + fp + fn > 0) ? tp / (tp + fp + fn) : 1.0;
    m.sensitivity = (tp + fn > 0) ? tp / (tp + fn) : (fp > 0 ? 0.0 : 1.0);
    m.specificity = (tn + fp > 0) ? tn / (tn + fp) : (fn > 0 ? 0.0 : 1.0);
    m.pacc = (tp + tn) / (tp + fp + tn + fn);
    return m;
}

// Mean of the per-image IoUs after zeroing every entry below the threshold.
inline double thresholded_iou(const std::vector<double>& per_image_ious,
                              double threshold = 0.65) {
    if (per_image_ious.empty())
        throw std::invalid_argument("thresholded_iou: empty list");
    double s = 0.0;
    for (double v : per_image_ious) s += (v < threshold) ? 0.0 : v;
    return s / static_cast<double>(per_image_ious.size());
}

struct MeanSd {
    double mean = 0.0;
    double sd = 0.0;
};

// Sample standard deviation (n-1); zero for fewer than two values.
inline MeanSd mean_sd(const std::vector<double>& xs) {
    MeanSd r;
    if (xs.empty()) return r;
    for (double v : xs) r.mean += v;
    r.mean /= static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double v : xs) ss += (v - r.mean) * (v - r.mean);
        r.sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
    }
    return r;
}

struct MetricsReport {
    std::vector<ImageMetrics> per_image;
    MeanSd f1, specificity, sensitivity, iou, pacc;
    double th_iou = 0.0;
    double th_iou_threshold = 0.65;
};

inline MetricsReport aggregate_metrics(const std::vector<ImageMetrics>& per_image,
                                       double th_iou_threshold = 0.65) {
    if (per_image.empty())
        throw std::invalid_argument("aggregate_metrics: empty evaluation set");
    MetricsReport r;
    r.per_image = per_image;
    std::vector<double> f1, sp, se, iou, pacc;
    for (const auto& m : per_image) {
        f1.push_back(m.f1);
        sp.push_back(m.specificity);
        se.push_back(m.sensitivity);
        iou.push_back(m.iou);
        pacc.push_back(m.pacc);
    }
    r.f1 = mean_sd(f1);
    r.specificity = mean_sd(sp);
    r.sensitivity = mean_sd(se);
    r.iou = mean_sd(iou);
    r.pacc = mean_sd(pacc);
    r.th_iou_threshold = th_iou_threshold;
    r.th_iou = thresholded_iou(iou, th_iou_threshold);
    return r;
}

// Evaluate a predictor against labelled pairs. The predictor must return a
// strictly binary mask of the same shape as the ground truth.
inline MetricsReport evaluate_predictor(
    const std::function<MaskImage(const DomainImage&)>& predict,
    const std::vector<std::pair<DomainImage, MaskImage>>& labelled,
    double th_iou_threshold = 0.65) {
    if (labelled.empty())
        throw std::invalid_argument("evaluate: empty evaluation set");
    std::vector<ImageMetrics> per_image;
    per_image.reserve(labelled.size());
    for (const auto& [img, gt] : labelled)
        per_image.push_back(compute_metrics(confusion(predict(img), gt)));
    return aggregate_metrics(per_image, th_iou_threshold);
}

inline constexpr const char* kMetricsReportSchema = "tricycle-metrics-report/1";

inline nlohmann::ordered_json report_to_json(const MetricsReport& r) {
    nlohmann::ordered_json j;
    j["schema"] = kMetricsReportSchema;
    j["count"] = r.per_image.size();
    auto put = [&](const char* name, const MeanSd& ms) {
        j[name] = {{"mean", ms.mean}, {"sd", ms.sd}};
    };
    put("f1", r.f1);
    put("specificity", r.specificity);
    put("sensitivity", r.sensitivity);
    put("iou", r.iou);
    put("pacc", r.pacc);
    j["th_iou"] = r.th_iou;
    j["th_iou_threshold"] = r.th_iou_threshold;
    auto arr = nlohmann::ordered_json::array();
    for (const auto& m : r.per_image) {
        arr.push_back({{"f1", m.f1},
                       {"specificity", m.specificity},
                       {"sensitivity", m.sensitivity},
                       {"iou", m.iou},
                       {"pacc", m.pacc}});
    }
    j["per_image"] = arr;
    return j;
}

inline MetricsReport report_from_json(const nlohmann::json& j) {
    if (j.value("schema", "") != kMetricsReportSchema)
        throw std::runtime_error("metrics report: unknown schema");
    std::vector<ImageMetrics> per_image;
    for (const auto& e : j.at("per_image")) {
        ImageMetrics m;
        m.f1 = e.at("f1");
        m.specificity = e.at("specificity");
        m.sensitivity = e.at("sensitivity");
        m.iou = e.at("iou");
        m.pacc = e.at("pacc");
        per_image.push_back(m);
    }
    return aggregate_metrics(per_image, j.at("th_iou_threshold"));
}

inline void write_report(const MetricsReport& r, const std::string& json_path,
                         const std::string& csv_path = "") {
    if (!json_path.empty()) {
        std::ofstream out(json_path);
        if (!out) throw std::runtime_error("write_report: cannot open " + json_path);
        out << report_to_json(r).dump(2) << "\n";
    }
    if (!csv_path.empty()) {
        std::ofstream out(csv_path);
        if (!out) throw std::runtime_error("write_report: cannot open " + csv_path);
        out << "index,f1,specificity,sensitivity,iou,pacc\n";
        for (size_t i = 0; i < r.per_image.size(); ++i) {
            const auto& m = r.per_image[i];
            out << i << ',' << m.f1 << ',' << m.specificity << ',' << m.sensitivity
                << ',' << m.iou << ',' << m.pacc << '\n';
        }
    }
}

}  // namespace tricycle
