#pragma once

// CSV and JSON output. Numbers use 17 significant digits so doubles round-trip.

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "ppp/experiments.hpp"
#include "ppp/linalg.hpp"

namespace ppp::io {

/// %.17g, with "nan", "inf", "-inf" for non-finite values.
std::string format_number(double x);

/// Writes `header` then one line per row; throws Error on I/O failure.
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

/// Trace CSV with columns k, residual, w_err, u_err, intertwine.
void write_trace_csv(const std::filesystem::path& path, const std::vector<TraceRow>& rows);

/// Image as a grid_side x grid_side CSV in row-major order, no header.
void write_image_csv(const std::filesystem::path& path, const Vector& image, int grid_side);

void write_json(const std::filesystem::path& path, const nlohmann::json& j);

nlohmann::json to_json(const Vector& v);

/// Creates the directory if needed.
void ensure_dir(const std::filesystem::path& dir);

}  // namespace ppp::io
