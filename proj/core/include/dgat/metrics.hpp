#pragma once

#include <vector>

namespace dgat {

// Area under the ROC curve via the rank statistic (Mann-Whitney U with ties
// sharing average ranks). Labels are 0/1; throws if only one class is
// present.
double evaluate_auc(const std::vector<double>& scores, const std::vector<int>& labels);

}  // namespace dgat
