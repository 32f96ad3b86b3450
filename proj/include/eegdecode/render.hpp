#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "eegdecode/evaluation.hpp"
#include "eegdecode/signal_io.hpp"

namespace eegdecode {

/// Diverging blue-white-red map; t in [-1, 1], 0 maps to white. Returns "#rrggbb".
std::string diverging_color(double t);

/// Head outline with one marker per electrode at its azimuthal-equidistant
/// position (vertex at the centre, equator on the head circle), coloured on a
/// scale symmetric about 0, plus a colour bar.
std::string topomap_svg(const std::vector<std::string>& electrodes, const std::vector<double>& values,
                        const Montage& montage, const std::string& title = "");

void render_topomap(const std::vector<std::string>& electrodes, const std::vector<double>& values,
                    const Montage& montage, const std::filesystem::path& out, const std::string& title = "");

struct AccuracySeries {
  std::string label;
  std::vector<double> accuracies;
  std::vector<double> baseline;  // scrambled-label accuracies, drawn in gray; may be empty
};

/// Dot strip per series, with the baseline's points and interquartile band in gray.
std::string accuracy_plot_svg(const std::vector<AccuracySeries>& series, const std::string& title = "");
void render_accuracy_plot(const std::vector<AccuracySeries>& series, const std::filesystem::path& out,
                          const std::string& title = "");

/// Median accuracy against feature count with interquartile bands (real and scrambled).
std::string sweep_plot_svg(const SweepResult& sweep, const std::string& title = "");
void render_sweep_plot(const SweepResult& sweep, const std::filesystem::path& out, const std::string& title = "");

}  // namespace eegdecode
