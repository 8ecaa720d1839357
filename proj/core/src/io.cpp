#include "hmmdual/io.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "hmmdual/errors.hpp"

namespace hmmdual {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

json parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::ParseError, "cannot open model file " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    fail(ErrorCode::ParseError, std::string("invalid JSON: ") + e.what());
  }
  return j;
}

Eigen::MatrixXd read_matrix(const json& j, const std::string& key, int rows,
                            int cols) {
  if (!j.contains(key)) {
    fail(ErrorCode::ParseError, "missing required field \"" + key + "\"");
  }
  const json& m = j.at(key);
  if (!m.is_array() || static_cast<int>(m.size()) != rows) {
    fail(ErrorCode::ParseError,
         "field \"" + key + "\" must be an array of " + std::to_string(rows) +
             " rows");
  }
  Eigen::MatrixXd out(rows, cols);
  for (int i = 0; i < rows; ++i) {
    const json& row = m.at(static_cast<std::size_t>(i));
    if (!row.is_array() || static_cast<int>(row.size()) != cols) {
      fail(ErrorCode::ParseError,
           "row " + std::to_string(i) + " of \"" + key + "\" must have " +
               std::to_string(cols) + " entries");
    }
    for (int jcol = 0; jcol < cols; ++jcol) {
      const json& v = row.at(static_cast<std::size_t>(jcol));
      if (!v.is_number()) {
        fail(ErrorCode::ParseError,
             "non-numeric entry in \"" + key + "\"");
      }
      out(i, jcol) = v.get<double>();
    }
  }
  return out;
}

int read_dim(const json& j, const std::string& key) {
  if (!j.contains(key) || !j.at(key).is_number_integer()) {
    fail(ErrorCode::ParseError,
         "missing or non-integer field \"" + key + "\"");
  }
  return j.at(key).get<int>();
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

void emit(const ordered_json& v, std::ostream& os, int indent, int depth);

void emit_indent(std::ostream& os, int indent, int depth) {
  if (indent <= 0) return;
  os << '\n';
  for (int i = 0; i < indent * depth; ++i) os << ' ';
}

void emit(const ordered_json& v, std::ostream& os, int indent, int depth) {
  switch (v.type()) {
    case ordered_json::value_t::object: {
      if (v.empty()) {
        os << "{}";
        return;
      }
      os << '{';
      bool first = true;
      for (const auto& item : v.items()) {
        if (!first) os << ',';
        first = false;
        emit_indent(os, indent, depth + 1);
        os << ordered_json(item.key()).dump() << (indent > 0 ? ": " : ":");
        emit(item.value(), os, indent, depth + 1);
      }
      emit_indent(os, indent, depth);
      os << '}';
      return;
    }
    case ordered_json::value_t::array: {
      if (v.empty()) {
        os << "[]";
        return;
      }
      os << '[';
      bool first = true;
      for (const auto& item : v) {
        if (!first) os << ',';
        first = false;
        emit_indent(os, indent, depth + 1);
        emit(item, os, indent, depth + 1);
      }
      emit_indent(os, indent, depth);
      os << ']';
      return;
    }
    case ordered_json::value_t::number_float:
      os << format_g17(v.get<double>());
      return;
    default:
      os << v.dump();
      return;
  }
}

}  // namespace

std::string format_g17(double x) {
  if (!std::isfinite(x)) return "null";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

void dump_json17(const ordered_json& value, std::ostream& os, int indent) {
  emit(value, os, indent, 0);
  os << '\n';
}

std::string dump_json17(const ordered_json& value, int indent) {
  std::ostringstream os;
  dump_json17(value, os, indent);
  return os.str();
}

std::string model_hash(
    const FiniteHMM& model,
    const std::map<std::string, ProbabilityVector>& priors) {
  std::ostringstream canon;
  canon << "d=" << model.d << ";m=" << model.m << ";A=";
  for (int i = 0; i < model.d; ++i) {
    for (int j = 0; j < model.d; ++j) canon << format_g17(model.A(i, j)) << ',';
  }
  canon << ";H=";
  for (int i = 0; i < model.d; ++i) {
    for (int j = 0; j < model.m; ++j) canon << format_g17(model.H(i, j)) << ',';
  }
  canon << ";priors=";
  for (const auto& [name, p] : priors) {
    canon << name << ':';
    for (int i = 0; i < p.size(); ++i) canon << format_g17(p.values(i)) << ',';
    canon << ';';
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a(canon.str())));
  return buf;
}

ModelFile load_model(const std::string& path, double tol_model) {
  const json j = parse_file(path);
  if (!j.is_object()) {
    fail(ErrorCode::ParseError, "model file must hold a JSON object");
  }
  for (const auto& item : j.items()) {
    const std::string& key = item.key();
    if (key != "d" && key != "m" && key != "A" && key != "H" &&
        key != "priors") {
      fail(ErrorCode::ParseError, "unknown top-level key \"" + key + "\"");
    }
  }
  ModelFile out;
  const int d = read_dim(j, "d");
  const int m = read_dim(j, "m");
  if (d < 1 || m < 1) {
    fail(ErrorCode::ParseError, "dimensions must be positive");
  }
  FiniteHMM model;
  model.d = d;
  model.m = m;
  model.A = read_matrix(j, "A", d, d);
  model.H = read_matrix(j, "H", d, m);
  out.model = validate(std::move(model), tol_model);

  if (j.contains("priors")) {
    const json& priors = j.at("priors");
    if (!priors.is_object()) {
      fail(ErrorCode::ParseError, "\"priors\" must be an object");
    }
    for (const auto& item : priors.items()) {
      const json& arr = item.value();
      if (!arr.is_array() || static_cast<int>(arr.size()) != d) {
        fail(ErrorCode::ParseError,
             "prior \"" + item.key() + "\" must have " + std::to_string(d) +
                 " entries");
      }
      Eigen::VectorXd v(d);
      for (int i = 0; i < d; ++i) {
        const json& entry = arr.at(static_cast<std::size_t>(i));
        if (!entry.is_number()) {
          fail(ErrorCode::ParseError,
               "non-numeric entry in prior \"" + item.key() + "\"");
        }
        v(i) = entry.get<double>();
      }
      out.priors.emplace(item.key(), make_probability(std::move(v), tol_model));
    }
  }
  out.hash = model_hash(out.model, out.priors);
  return out;
}

LinearPair load_linear_pair(const std::string& path, double T) {
  const json j = parse_file(path);
  if (!j.is_object()) {
    fail(ErrorCode::ParseError, "model file must hold a JSON object");
  }
  const int d = read_dim(j, "d");
  const int m = read_dim(j, "m");
  LinearPair pair;
  pair.A = read_matrix(j, "A", d, d);
  pair.H = read_matrix(j, "H", d, m);
  pair.T = T;
  return validate_linear_pair(std::move(pair));
}

}  // namespace hmmdual
