#pragma once

#include "draformer/tensor.hpp"

#include <string>
#include <vector>

namespace draformer {

struct PlotLine {
  std::string label;
  std::string color;
  /// x positions (time steps) and values; equal lengths.
  std::vector<double> x;
  std::vector<double> y;
};

/// Standalone SVG document with axes, tick labels and a legend.
std::string line_plot_svg(const std::string& title, const std::vector<PlotLine>& lines, int width = 800,
                          int height = 400);

/// History, ground truth and prediction of one variable of one window.
std::string prediction_svg(const std::string& title, const Matrix& history, const Matrix& actual,
                           const Matrix& predicted, Index variable);

}  // namespace draformer
