// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "qpm/builders.hpp"
#include "qpm/medium.hpp"

namespace qpm::io {

using json = nlohmann::json;

// Model document: MediumSpec keys plus an optional "kick" vector.
struct Model {
  MediumSpec spec;
  std::optional<RVec> kick;

  RVec kick_or_default() const { return kick ? *kick : spec.gen_coord_vector; }
};

namespace detail {

inline json real_rows(const RMat& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json r = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
    rows.push_back(std::move(r));
  }
  return rows;
}

inline json real_list(const RVec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

inline double number(const json& j, const std::string& what) {
  if (!j.is_number()) throw MalformedModel(what + ": expected a number");
  return j.get<double>();
}

// Nested rows or a flat row-major list.
inline RMat read_matrix(const json& j, Eigen::Index rows, Eigen::Index cols, const std::string& what) {
  if (!j.is_array()) throw MalformedModel(what + ": expected an array");
  RMat m(rows, cols);
  if (!j.empty() && j.front().is_array()) {
    if (static_cast<Eigen::Index>(j.size()) != rows) throw MalformedModel(what + ": wrong row count");
    for (Eigen::Index i = 0; i < rows; ++i) {
      const json& r = j[static_cast<std::size_t>(i)];
      if (!r.is_array() || static_cast<Eigen::Index>(r.size()) != cols)
        throw MalformedModel(what + ": wrong column count");
      for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = number(r[static_cast<std::size_t>(c)], what);
    }
  } else {
    if (static_cast<Eigen::Index>(j.size()) != rows * cols) throw MalformedModel(what + ": wrong element count");
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = number(j[static_cast<std::size_t>(i * cols + c)], what);
  }
  return m;
}

inline RVec read_vector(const json& j, Eigen::Index n, const std::string& what) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != n) throw MalformedModel(what + ": expected " + std::to_string(n) + " entries");
  RVec v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = number(j[static_cast<std::size_t>(i)], what);
  return v;
}

inline const json& require(const json& doc, const char* key) {
  auto it = doc.find(key);
  if (it == doc.end()) throw MalformedModel(std::string("missing key ") + key);
  return *it;
}

}  // namespace detail

inline json model_to_json(const MediumSpec& s, const std::optional<RVec>& kick = {}) {
  json doc;
  doc["n"] = s.n;
  doc["coords"] = detail::real_rows(s.coords);
  json cov = json::array();
  for (const auto& c : s.covariances) cov.push_back(detail::real_rows(c));
  doc["covariances"] = std::move(cov);
  doc["kernel_re"] = detail::real_rows(s.kernel.real());
  doc["kernel_im"] = detail::real_rows(s.kernel.imag());
  doc["damping_re"] = detail::real_rows(s.damping.real());
  doc["damping_im"] = detail::real_rows(s.damping.imag());
  json kinds = json::array();
  for (auto k : s.source_kind) kinds.push_back(k == SourceKind::charge ? "charge" : "dipole_component");
  doc["source_kind"] = std::move(kinds);
  doc["gen_coord_vector"] = detail::real_list(s.gen_coord_vector);
  if (kick) doc["kick"] = detail::real_list(*kick);
  return doc;
}

inline Model model_from_json(const json& doc) {
  if (!doc.is_object()) throw MalformedModel("top level must be an object");
  Model m;
  auto& s = m.spec;
  const json& jn = detail::require(doc, "n");
  if (!jn.is_number_integer() || jn.get<long long>() <= 0) throw MalformedModel("n must be a positive integer");
  s.n = jn.get<Eigen::Index>();
  const Eigen::Index n = s.n;
  s.coords = detail::read_matrix(detail::require(doc, "coords"), 3, n, "coords");
  const json& cov = detail::require(doc, "covariances");
  if (!cov.is_array() || static_cast<Eigen::Index>(cov.size()) != n) throw MalformedModel("covariances: need n entries");
  for (const auto& c : cov) s.covariances.push_back(detail::read_matrix(c, 3, 3, "covariances"));
  auto complex_matrix = [&](const char* re, const char* im) {
    Mat out = detail::read_matrix(detail::require(doc, re), n, n, re).cast<cd>();
    if (doc.contains(im)) out += I_unit * detail::read_matrix(doc[im], n, n, im).cast<cd>();
    return out;
  };
  s.kernel = complex_matrix("kernel_re", "kernel_im");
  s.damping = complex_matrix("damping_re", "damping_im");
  const json& kinds = detail::require(doc, "source_kind");
  auto parse_kind = [](const json& k) {
    if (!k.is_string()) throw MalformedModel("source_kind entries must be strings");
    const auto v = k.get<std::string>();
    if (v == "charge") return SourceKind::charge;
    if (v == "dipole_component" || v == "dipole") return SourceKind::dipole_component;
    throw MalformedModel("unknown source_kind " + v);
  };
  if (kinds.is_string()) {
    s.source_kind.assign(static_cast<std::size_t>(n), parse_kind(kinds));
  } else {
    if (!kinds.is_array() || static_cast<Eigen::Index>(kinds.size()) != n) throw MalformedModel("source_kind: need n entries");
    for (const auto& k : kinds) s.source_kind.push_back(parse_kind(k));
  }
  s.gen_coord_vector = detail::read_vector(detail::require(doc, "gen_coord_vector"), n, "gen_coord_vector");
  if (doc.contains("kick")) m.kick = detail::read_vector(doc["kick"], n, "kick");
  s.validate();
  return m;
}

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MalformedModel("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

inline json parse_json(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw MalformedModel(origin + ": " + e.what());
  }
}

inline Model read_model(const std::string& path) { return model_from_json(parse_json(read_text(path), path)); }

inline std::string dump(const json& doc) { return doc.dump(1) + "\n"; }

inline DrudeParams drude_params_from_json(const json& doc) {
  if (!doc.is_object()) throw MalformedModel("Drude parameters must be an object");
  DrudeParams p;
  p.drude_factor = detail::number(detail::require(doc, "drude_factor"), "drude_factor");
  p.relaxation = detail::number(detail::require(doc, "relaxation"), "relaxation");
  p.gaussian_width = detail::number(detail::require(doc, "gaussian_width"), "gaussian_width");
  if (doc.contains("tunneling")) {
    const json& t = doc["tunneling"];
    if (!t.is_object()) throw MalformedModel("tunneling must be an object");
    if (t.contains("enabled")) {
      if (!t["enabled"].is_boolean()) throw MalformedModel("tunneling.enabled must be boolean");
      p.tunneling.enabled = t["enabled"].get<bool>();
    }
    if (t.contains("d0")) p.tunneling.d0 = detail::number(t["d0"], "tunneling.d0");
    if (t.contains("steepness")) p.tunneling.steepness = detail::number(t["steepness"], "tunneling.steepness");
  }
  p.validate();
  return p;
}

inline DrudeParams read_drude_params(const std::string& path) {
  return drude_params_from_json(parse_json(read_text(path), path));
}

// 12 significant digits, fixed C locale.
inline std::string fmt(double v) {
  if (v == 0.0) return "0";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

class CsvWriter {
 public:
  explicit CsvWriter(std::string header_comment = {}) {
    if (!header_comment.empty()) out_ << "# " << header_comment << "\n";
  }
  template <class... T>
  void header(const T&... cols) {
    row_strings({std::string(cols)...});
  }
  void row_strings(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
    out_ << "\n";
  }
  void row(const std::vector<double>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << fmt(cells[i]);
    out_ << "\n";
  }
  std::string str() const { return out_.str(); }

 private:
  std::ostringstream out_;
};

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw MalformedModel("cannot write " + path);
  out << text;
  if (!out) throw MalformedModel("write failed for " + path);
}

// FNV-1a 64
inline std::uint64_t checksum(const std::string& data, std::uint64_t h = 14695981039346656037ull) {
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace qpm::io
