#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ppto/experiments.hpp"

namespace ppto {

struct PlotStyle {
    int width = 720;
    int height = 480;
    bool draw_error_bars = true;
};

struct RenderedFigure {
    std::string svg;
    std::string csv;
};

/// Deterministic SVG line plot and CSV table. Throws ConfigError for a dataset
/// without series or with series that do not match the x grid.
RenderedFigure render_figure(const FigureDataset& dataset, const PlotStyle& style = {});

std::string to_csv(const FigureDataset& dataset);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;  // empty cells parse as NaN
};

CsvTable parse_csv(const std::string& text);

/// 16 hex digits of FNV-1a over the dataset metadata.
std::string metadata_hash(const FigureDataset& dataset);

struct WrittenFigure {
    std::filesystem::path csv_path;
    std::filesystem::path svg_path;
};

/// Writes <figure_id>_<hash>.csv and .svg into `dir` (created if missing). Throws IoError.
WrittenFigure write_figure(const FigureDataset& dataset, const std::filesystem::path& dir,
                           const PlotStyle& style = {});

}  // namespace ppto
