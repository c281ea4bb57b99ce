#pragma once

#include "meshparse/error.hpp"
#include "meshparse/types.hpp"

namespace meshparse {

// counts[i][j] = number of points with ground truth i predicted as j.
inline ConfusionMatrix confusion(const LabeledCloud& gt, const LabeledCloud& pred) {
    gt.validate();
    pred.validate();
    require(gt.size() == pred.size(), "confusion: ground truth has " + std::to_string(gt.size()) +
                                          " points, prediction has " + std::to_string(pred.size()));
    require(*gt.label_space == *pred.label_space, "confusion: label spaces differ ('" + gt.label_space->name +
                                                      "' vs '" + pred.label_space->name + "')");
    ConfusionMatrix cm(gt.label_space->size());
    for (std::size_t p = 0; p < gt.size(); ++p) ++cm.at(gt.labels[p], pred.labels[p]);
    return cm;
}

}  // namespace meshparse
