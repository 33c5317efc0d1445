// JSON (de)serialization for instances and reports. Complex numbers are
// two-element arrays, matrices row-major, multi-indices integer arrays.
#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "cohesive/family.hpp"

namespace cohesive {

using json = nlohmann::ordered_json;

inline std::string fnv1a_hex(const std::string& bytes) {
  unsigned long long h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

inline json complex_to_json(const cplx& z) { return json::array({z.real(), z.imag()}); }

inline cplx complex_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2)
    throw std::invalid_argument("complex numbers serialize as [re, im]");
  return cplx(j[0].get<double>(), j[1].get<double>());
}

inline json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (int r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < m.cols(); ++c) row.push_back(complex_to_json(m(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Matrix matrix_from_json(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty())
    throw std::invalid_argument(where + ": matrix must be a non-empty array of rows");
  const int rows = static_cast<int>(j.size());
  const int cols = static_cast<int>(j[0].size());
  Matrix m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    if (static_cast<int>(j[r].size()) != cols)
      throw std::invalid_argument(where + ": ragged matrix rows");
    for (int c = 0; c < cols; ++c) m(r, c) = complex_from_json(j[r][c]);
  }
  return m;
}

inline json graded_space_to_json(const GradedSpace& s) {
  json out = json::array();
  for (const auto& [d, n] : s.components()) out.push_back(json::array({d, n}));
  return out;
}

inline GradedSpace graded_space_from_json(const json& j, const std::string& where) {
  if (!j.is_array()) throw std::invalid_argument(where + ": expected [[degree, dim], ...]");
  std::vector<std::pair<int, int>> comps;
  for (const auto& e : j) comps.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
  return GradedSpace(std::move(comps));
}

// term list: [{"form": label, "end_degree": k, "blocks":
//   [{"source_degree": d, "matrix": [...]}, ...]}, ...]
inline json element_to_json(const AlgebraElement& x) {
  json terms = json::array();
  for (const auto& [key, m] : x.terms()) {
    json blocks = json::array();
    for (const auto& [d, b] : m.blocks())
      blocks.push_back({{"source_degree", d}, {"matrix", matrix_to_json(b)}});
    terms.push_back({{"form", x.base()->label(key.first)},
                     {"end_degree", key.second},
                     {"blocks", std::move(blocks)}});
  }
  return terms;
}

inline AlgebraElement element_from_json(const json& j, const BasePtr& base,
                                        const GradedSpace& source, const GradedSpace& target,
                                        const std::string& where) {
  AlgebraElement x(base, source, target);
  if (j.is_null()) return x;
  if (!j.is_array()) throw std::invalid_argument(where + ": expected a term array");
  for (const auto& t : j) {
    const int r = base->index_of(t.at("form").get<std::string>());
    const int e = t.at("end_degree").get<int>();
    GradedMap m(source, target, e);
    for (const auto& b : t.at("blocks")) {
      const int d = b.at("source_degree").get<int>();
      m.set_block(d, matrix_from_json(b.at("matrix"), where));
    }
    x.add_term(r, m);
  }
  return x;
}

inline json multi_index_to_json(const MultiIndex& i) { return json(i.v); }

inline MultiIndex multi_index_from_json(const json& j) {
  return MultiIndex(j.get<std::vector<int>>());
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

inline void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << bytes;
}

}  // namespace cohesive
