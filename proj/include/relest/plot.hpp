#pragma once

#include <filesystem>
#include <span>
#include <string>

#include "relest/mcmc.hpp"
#include "relest/scenario.hpp"

namespace relest {

struct PlotSize {
  int width = 800;
  int height = 400;
};

/// SVG line plot of sample value against iteration, axes "Iteration" and "θ".
/// Long chains are reduced to a per-pixel min/max envelope. Throws InputError if empty.
std::string render_trace_svg(std::span<const double> samples, PlotSize size = {});
void emit_trace_plot(const McmcChain& chain, const std::filesystem::path& path, PlotSize size = {});

/// Bar chart of average error per method with +-1 standard deviation whiskers.
std::string render_bench_svg(const BenchTable& table, PlotSize size = {});

}  // namespace relest
