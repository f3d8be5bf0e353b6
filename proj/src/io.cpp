#include "ppp/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace ppp::io {

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  return out;
}

}  // namespace

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  auto out = open_out(path);
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_number(row[i]);
    out << '\n';
  }
  if (!out) throw Error("write to '" + path.string() + "' failed");
}

void write_trace_csv(const std::filesystem::path& path, const std::vector<TraceRow>& rows) {
  auto out = open_out(path);
  out << "k,residual,w_err,u_err,intertwine\n";
  for (const auto& r : rows)
    out << r.k << ',' << format_number(r.residual) << ',' << format_number(r.w_err) << ','
        << format_number(r.u_err) << ',' << format_number(r.intertwine) << '\n';
  if (!out) throw Error("write to '" + path.string() + "' failed");
}

void write_image_csv(const std::filesystem::path& path, const Vector& image, int grid_side) {
  detail::require_dims(image.size() == Index(grid_side) * grid_side, "write_image_csv");
  auto out = open_out(path);
  for (int r = 0; r < grid_side; ++r) {
    for (int c = 0; c < grid_side; ++c) out << (c ? "," : "") << format_number(image(Index(r) * grid_side + c));
    out << '\n';
  }
  if (!out) throw Error("write to '" + path.string() + "' failed");
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
  if (!out) throw Error("write to '" + path.string() + "' failed");
}

nlohmann::json to_json(const Vector& v) {
  nlohmann::json arr = nlohmann::json::array();
  for (Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create directory '" + dir.string() + "': " + ec.message());
}

}  // namespace ppp::io
