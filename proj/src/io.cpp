#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mkedge/io.hpp"

namespace mkedge {

namespace {

using nlohmann::json;

constexpr double kCenteringTolerance = 1e-12;

[[noreturn]] void field_error(const std::string& field, const std::string& what) {
  throw Error(ErrorCode::ParseError, "field '" + field + "': " + what);
}

std::string locate(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t k = 0; k < byte && k < text.size(); ++k) {
    if (text[k] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

const json& require(const json& doc, const std::string& field) {
  const auto it = doc.find(field);
  if (it == doc.end()) field_error(field, "missing");
  return *it;
}

int read_int(const json& doc, const std::string& field) {
  const json& v = require(doc, field);
  if (!v.is_number_integer()) field_error(field, "expected an integer");
  return v.get<int>();
}

Vector read_vector(const json& v, const std::string& field, int len) {
  if (!v.is_array()) field_error(field, "expected an array");
  if (static_cast<int>(v.size()) != len) {
    field_error(field, "expected " + std::to_string(len) + " entries, found " + std::to_string(v.size()));
  }
  Vector out(len);
  for (int k = 0; k < len; ++k) {
    const json& e = v[static_cast<std::size_t>(k)];
    if (!e.is_number()) field_error(field + "[" + std::to_string(k) + "]", "expected a number");
    out(k) = e.get<double>();
  }
  return out;
}

Matrix read_matrix(const json& v, const std::string& field, int n) {
  if (!v.is_array()) field_error(field, "expected an array of rows");
  if (static_cast<int>(v.size()) != n) {
    field_error(field, "expected " + std::to_string(n) + " rows, found " + std::to_string(v.size()));
  }
  Matrix out(n, n);
  for (int i = 0; i < n; ++i) {
    out.row(i) = read_vector(v[static_cast<std::size_t>(i)], field + "[" + std::to_string(i) + "]", n).transpose();
  }
  return out;
}

ChainSpec parse_chain(const json& doc, Notes* notes) {
  const int d = read_int(doc, "d");
  if (d < 2) field_error("d", "state count must be >= 2");
  ChainSpec spec;
  spec.P = read_matrix(require(doc, "P"), "P", d);
  spec.f = read_vector(require(doc, "f"), "f", d);
  if (const auto it = doc.find("mu"); it != doc.end()) {
    spec.mu = read_vector(*it, "mu", d);
  } else {
    spec.mu = Vector::Constant(d, 1.0 / d);
    if (notes) notes->push_back("mu absent: using the uniform distribution");
  }
  if (const auto it = doc.find("label"); it != doc.end()) {
    if (!it->is_string()) field_error("label", "expected a string");
    spec.label = it->get<std::string>();
  }
  spec = validate(std::move(spec), notes);
  const StationaryStructure ss = stationary(spec);
  const double mean = ss.pi.dot(spec.f);
  if (std::abs(mean) > kCenteringTolerance) {
    spec = center_observable(std::move(spec), ss.pi);
    if (notes) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "observable centered: subtracted stationary mean " << mean;
      notes->push_back(msg.str());
    }
  }
  return spec;
}

KernelTable parse_kernel(const json& doc) {
  KernelTable kt;
  kt.m = read_int(doc, "m");
  if (kt.m < 2) field_error("m", "grid size must be >= 2");
  kt.values = read_matrix(require(doc, "kernel"), "kernel", kt.m);
  kt.f_values = read_vector(require(doc, "f"), "f", kt.m);
  if (const auto it = doc.find("mu"); it != doc.end()) kt.mu = read_vector(*it, "mu", kt.m);
  return kt;
}

json to_json(const Vector& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

json to_json(const Matrix& M) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    std::vector<double> r(static_cast<std::size_t>(M.cols()));
    for (Eigen::Index j = 0; j < M.cols(); ++j) r[static_cast<std::size_t>(j)] = M(i, j);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace

InputDocument parse_document(const std::string& text, Notes* notes) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, "malformed JSON at " + locate(text, e.byte > 0 ? e.byte - 1 : 0));
  }
  if (!doc.is_object()) throw Error(ErrorCode::ParseError, "document must be a JSON object");
  if (doc.contains("kernel")) return parse_kernel(doc);
  return parse_chain(doc, notes);
}

InputDocument parse_spec(const std::string& path, Notes* notes) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_document(buf.str(), notes);
}

std::string write_spec(const ChainSpec& spec) {
  json doc;
  doc["d"] = spec.d();
  doc["P"] = to_json(spec.P);
  doc["f"] = to_json(spec.f);
  doc["mu"] = to_json(spec.mu);
  doc["label"] = spec.label;
  return doc.dump(2) + "\n";
}

std::string write_kernel(const KernelTable& kt) {
  json doc;
  doc["m"] = kt.m;
  doc["kernel"] = to_json(kt.values);
  doc["f"] = to_json(kt.f_values);
  if (kt.mu) doc["mu"] = to_json(*kt.mu);
  return doc.dump(2) + "\n";
}

}  // namespace mkedge
