#include "wit/io.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdio>
#include <tuple>
#include <fstream>

namespace wit::io {

std::string format_double(double v) {
  char buf[40];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    double back = 0.0;
    std::sscanf(buf, "%lf", &back);
    if (back == v) return buf;
  }
  return buf;
}

std::uint64_t fnv1a(const std::string& data) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open output file " + path.string());
  out << text;
}

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open output file " + path.string());
  for (size_t i = 0; i < header.size(); ++i)
    out << header[i] << (i + 1 < header.size() ? "," : "\n");
  for (const auto& row : rows)
    for (size_t i = 0; i < row.size(); ++i)
      out << row[i] << (i + 1 < row.size() ? "," : "\n");
}

std::string complex_description_json(const CellComplex& cc) {
  nlohmann::json j;
  j["dimension"] = cc.dimension;
  j["topology"] = cc.topology == Topology::Torus ? "torus" : "sphere";
  if (cc.topology == Topology::Torus) {
    j["resolution"] = cc.resolution;
    j["periods"] = cc.periods;
  } else {
    j["subdivisions"] = cc.subdivisions;
  }
  std::vector<int> counts;
  for (int q = 0; q <= cc.dimension; ++q) counts.push_back(cc.cells(q));
  j["cell_counts"] = counts;
  return j.dump(2) + "\n";
}

void write_coboundary_csv(const std::filesystem::path& path, const SpMat& d) {
  std::vector<std::tuple<int, int, double>> trips;
  for (int k = 0; k < d.outerSize(); ++k)
    for (SpMat::InnerIterator it(d, k); it; ++it)
      trips.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()),
                         it.value());
  std::sort(trips.begin(), trips.end());
  std::vector<std::vector<std::string>> rows;
  rows.reserve(trips.size());
  for (const auto& [r, c, v] : trips)
    rows.push_back({std::to_string(r), std::to_string(c), format_double(v)});
  write_csv(path, {"row", "col", "value"}, rows);
}

}  // namespace wit::io
