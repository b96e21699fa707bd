// Copyright (C) 2026 The latsearch Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <utility>
#include <vector>

namespace latsearch {

struct ChartSeries {
  std::string name;
  std::vector<std::pair<double, double>> points;  // (x, y), drawn in order
};

struct ChartLabels {
  std::string title;
  std::string x;
  std::string y;
  std::string comment;  // embedded as an XML comment (stamp)
};

// Polyline chart with markers, linear axes and a legend.
std::string line_chart_svg(const std::vector<ChartSeries>& series, const ChartLabels& labels);

// One bar per category, segments stacked in series order; values[s][c] >= 0.
std::string stacked_bar_svg(const std::vector<std::string>& categories, const std::vector<std::string>& series,
                            const std::vector<std::vector<double>>& values, const ChartLabels& labels);

}  // namespace latsearch
