#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cope/stats/bootstrap.hpp"
#include "cope/stats/subgroups.hpp"

namespace cope::cli {

/// One row per model: model,n,excluded then point/lo/hi for mae, acc and
/// within1_acc.
std::string metrics_csv(const std::vector<stats::MetricReport>& reports);

/// Standalone SVG forest plot of subgroup MAE with 95% intervals. Rows without
/// an estimate are listed with n = 0 and no marker.
std::string forest_svg(const stats::SubgroupReport& report, const std::string& title);

ojson report_json(const std::vector<stats::MetricReport>& reports, const std::optional<stats::SubgroupReport>& forest);

}  // namespace cope::cli
