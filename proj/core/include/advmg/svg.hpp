#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace advmg {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

enum class PlotKind { Semilogy, Eigenscatter, Stemplot };

struct PlotOptions {
  std::string title;
  std::string xlabel;
  std::string ylabel;
  int width = 640;
  int height = 420;
  /// Vertical dashed markers (stem plots), e.g. characteristic offsets.
  std::vector<double> markers;
};

/// SVG document for the series. Output bytes depend only on the input.
/// Semilogy drops non-positive y values; eigenscatter draws the unit circle.
std::string emit_svg(const std::vector<Series>& series, PlotKind kind, const PlotOptions& options = {});
void write_svg(const std::filesystem::path& path, const std::vector<Series>& series, PlotKind kind,
               const PlotOptions& options = {});

}  // namespace advmg
