#ifndef CARNOT_IO_HPP
#define CARNOT_IO_HPP

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "carnot/algebra.hpp"
#include "carnot/errors.hpp"

namespace carnot {

using json = nlohmann::json;

// Algebra file format:
//   {"layers":[2,1], "brackets":[{"i":1,"j":2,"out":{"3":"1"}}, ...]}
// Rational coefficients are strings "p" or "p/q"; basis indices 1-based and
// layer-contiguous.

inline json algebra_to_json(const CarnotAlgebra& a) {
  json j;
  j["layers"] = a.layer_dims();
  json brackets = json::array();
  for (const auto& [key, value] : a.structure()) {
    json rel;
    rel["i"] = key.first + 1;
    rel["j"] = key.second + 1;
    json out = json::object();
    for (const auto& [t, c] : value) out[std::to_string(t + 1)] = rat_to_string(c);
    rel["out"] = std::move(out);
    brackets.push_back(std::move(rel));
  }
  j["brackets"] = std::move(brackets);
  return j;
}

inline CarnotAlgebra algebra_from_json(const json& j) {
  if (!j.is_object() || !j.contains("layers") || !j["layers"].is_array())
    throw ParseError("algebra file must be an object with a 'layers' array");
  std::vector<std::size_t> layers;
  for (const auto& d : j["layers"]) {
    if (!d.is_number_unsigned() || d.get<std::size_t>() == 0)
      throw ParseError("layer dimensions must be positive integers");
    layers.push_back(d.get<std::size_t>());
  }
  std::vector<BracketRelation> table;
  if (j.contains("brackets")) {
    if (!j["brackets"].is_array()) throw ParseError("'brackets' must be an array");
    for (const auto& rel : j["brackets"]) {
      if (!rel.is_object() || !rel.contains("i") || !rel.contains("j") || !rel.contains("out"))
        throw ParseError("bracket entries need fields i, j, out");
      BracketRelation br;
      br.i = rel["i"].get<std::size_t>();
      br.j = rel["j"].get<std::size_t>();
      if (!rel["out"].is_object()) throw ParseError("bracket 'out' must be an object");
      for (const auto& [k, v] : rel["out"].items()) {
        std::size_t target = 0;
        try {
          target = static_cast<std::size_t>(std::stoul(k));
        } catch (...) {
          throw ParseError("bad bracket target index '" + k + "'");
        }
        if (!v.is_string()) throw ParseError("bracket coefficients must be rational strings");
        br.out.emplace_back(target, rat_from_string(v.get<std::string>()));
      }
      table.push_back(std::move(br));
    }
  }
  return build_algebra(layers, table);
}

inline json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open file: " + path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ParseError("invalid JSON in " + path + ": " + e.what());
  }
  return j;
}

inline CarnotAlgebra load_algebra(const std::string& path) { return algebra_from_json(load_json_file(path)); }

inline void save_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open file for writing: " + path);
  out << j.dump(2) << "\n";
}

// Vectors on the command line: comma-separated rationals, e.g. "1,0,-1/2".
inline Vec parse_vector(const std::string& text, std::size_t expect_dim) {
  Vec v;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t b = item.find_first_not_of(" \t");
    std::size_t e = item.find_last_not_of(" \t");
    if (b == std::string::npos) throw ParseError("empty coordinate in vector literal");
    v.push_back(rat_from_string(item.substr(b, e - b + 1)));
  }
  if (v.size() != expect_dim)
    throw ParseError("vector has " + std::to_string(v.size()) + " coordinates, expected " +
                     std::to_string(expect_dim));
  return v;
}

inline std::string format_vector(const Vec& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ",";
    s += rat_to_string(v[i]);
  }
  return s;
}

inline json vector_to_json(const Vec& v) {
  json arr = json::array();
  for (const Rat& c : v) arr.push_back(rat_to_string(c));
  return arr;
}

inline Vec vector_from_json(const json& arr) {
  if (!arr.is_array()) throw ParseError("vector must be a JSON array of rational strings");
  Vec v;
  for (const auto& c : arr) {
    if (!c.is_string()) throw ParseError("vector entries must be rational strings");
    v.push_back(rat_from_string(c.get<std::string>()));
  }
  return v;
}

inline json matrix_to_json(const MatQ& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.rows; ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < m.cols; ++j) row.push_back(rat_to_string(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline MatQ matrix_from_json(const json& rows) {
  if (!rows.is_array() || rows.empty()) throw ParseError("matrix must be a non-empty array of rows");
  MatQ m(rows.size(), rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!rows[i].is_array() || rows[i].size() != m.cols) throw ParseError("ragged matrix rows");
    for (std::size_t j = 0; j < m.cols; ++j) {
      if (!rows[i][j].is_string()) throw ParseError("matrix entries must be rational strings");
      m(i, j) = rat_from_string(rows[i][j].get<std::string>());
    }
  }
  return m;
}

}  // namespace carnot

#endif
