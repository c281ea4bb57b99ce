#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "meshparse/error.hpp"
#include "meshparse/types.hpp"

namespace meshparse {

struct ClassIou {
    Label label = 0;
    std::optional<double> iou;  // percent; empty when the class has zero union
};

struct MetricReport {
    double miou = 0;     // percent
    double fw_miou = 0;  // percent
    double acc = 0;      // percent
    std::vector<ClassIou> per_class_iou;
};

struct EvaluateOptions {
    // When false, class 0 is left out of the mIoU mean. fw mIoU and Acc are
    // unaffected.
    bool include_background = true;
};

// IoU_i = n_ii / (t_i + sum_j n_ji - n_ii). Classes with zero union have no IoU
// and are skipped by the mIoU mean.
inline MetricReport evaluate(const ConfusionMatrix& cm, EvaluateOptions opts = {}) {
    const std::uint64_t total = cm.total();
    require(total > 0, "evaluate: confusion matrix is empty");
    const double n = static_cast<double>(total);
    MetricReport r;
    double iou_sum = 0, fw_sum = 0;
    std::size_t defined = 0;
    std::uint64_t correct = 0;
    for (std::size_t i = 0; i < cm.classes(); ++i) {
        const std::uint64_t nii = cm.at(i, i);
        const std::uint64_t ti = cm.row_sum(i);
        const std::uint64_t union_ = ti + cm.col_sum(i) - nii;
        correct += nii;
        ClassIou c{static_cast<Label>(i), std::nullopt};
        if (union_ > 0) {
            const double iou = static_cast<double>(nii) / static_cast<double>(union_);
            c.iou = 100.0 * iou;
            fw_sum += static_cast<double>(ti) * iou;
            if (opts.include_background || i != 0) {
                iou_sum += iou;
                ++defined;
            }
        }
        r.per_class_iou.push_back(c);
    }
    r.miou = defined > 0 ? 100.0 * iou_sum / static_cast<double>(defined) : 0.0;
    r.fw_miou = 100.0 * fw_sum / n;
    r.acc = 100.0 * static_cast<double>(correct) / n;
    return r;
}

inline nlohmann::json to_json(const MetricReport& r, const LabelSpace* space = nullptr) {
    nlohmann::json per = nlohmann::json::array();
    for (const auto& c : r.per_class_iou) {
        nlohmann::json e{{"label", c.label}, {"iou", c.iou ? nlohmann::json(*c.iou) : nlohmann::json(nullptr)}};
        if (space && c.label < space->size()) e["name"] = space->labels[c.label];
        per.push_back(std::move(e));
    }
    return {{"miou", r.miou}, {"fw_miou", r.fw_miou}, {"acc", r.acc}, {"per_class_iou", per}};
}

}  // namespace meshparse
