#pragma once

// JSON persistence. Documents are built with nlohmann::json and rendered by
// a small writer that prints every floating-point number with 17 significant
// digits, so identical inputs give byte-identical files.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "ideal/grid.hpp"
#include "json.hpp"

namespace ideal {

using Json = nlohmann::json;

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void write_string(std::string& out, const std::string& s) {
  out += Json(s).dump();
}

inline void write_double(std::string& out, double x) {
  if (!std::isfinite(x)) {
    out += "null";
    return;
  }
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  out += buf;
}

inline void write_json(std::string& out, const Json& j, int indent, int depth) {
  const auto newline = [&](int d) {
    if (indent < 0) return;
    out += '\n';
    out.append(static_cast<std::size_t>(indent * d), ' ');
  };
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ',';
        first = false;
        newline(depth + 1);
        write_string(out, it.key());
        out += indent < 0 ? ":" : ": ";
        write_json(out, it.value(), indent, depth + 1);
      }
      newline(depth);
      out += '}';
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      // Numeric arrays stay on one line.
      const bool flat = std::all_of(j.begin(), j.end(), [](const Json& e) { return e.is_number(); });
      out += '[';
      bool first = true;
      for (const auto& e : j) {
        if (!first) out += flat && indent >= 0 ? ", " : ",";
        first = false;
        if (!flat) newline(depth + 1);
        write_json(out, e, indent, depth + 1);
      }
      if (!flat) newline(depth);
      out += ']';
      return;
    }
    case Json::value_t::number_float:
      write_double(out, j.get<double>());
      return;
    default:
      out += j.dump();
  }
}

}  // namespace detail

inline std::string render_json(const Json& j, int indent = 2) {
  std::string out;
  detail::write_json(out, j, indent, 0);
  out += '\n';
  return out;
}

inline void save_json(const std::string& path, const Json& j) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  os << render_json(j);
  if (!os) throw IoError("failed writing '" + path + "'");
}

inline Json load_json(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open '" + path + "'");
  try {
    return Json::parse(is);
  } catch (const Json::exception& e) {
    throw IoError("malformed JSON in '" + path + "': " + e.what());
  }
}

inline Json field_to_json(const ScalarField2D& f) {
  Json j;
  j["nx"] = f.grid.nx;
  j["ny"] = f.grid.ny;
  j["hx"] = f.grid.hx;
  j["hy"] = f.grid.hy;
  j["origin"] = Json::array({f.grid.u0, f.grid.v0});
  j["name"] = f.name;
  j["values"] = f.values;
  return j;
}

inline ScalarField2D field_from_json(const Json& j) {
  try {
    ScalarField2D f;
    f.grid.nx = j.at("nx").get<int>();
    f.grid.ny = j.at("ny").get<int>();
    f.grid.hx = j.at("hx").get<double>();
    f.grid.hy = j.at("hy").get<double>();
    const auto& o = j.at("origin");
    if (!o.is_array() || o.size() != 2) throw IoError("field 'origin' must be a 2-element array");
    f.grid.u0 = o[0].get<double>();
    f.grid.v0 = o[1].get<double>();
    f.name = j.value("name", std::string{});
    f.values = j.at("values").get<std::vector<double>>();
    f.validate();
    return f;
  } catch (const Json::exception& e) {
    throw IoError(std::string("malformed field document: ") + e.what());
  } catch (const GridError& e) {
    throw IoError(std::string("invalid field document: ") + e.what());
  }
}

inline void save_field(const std::string& path, const ScalarField2D& f) { save_json(path, field_to_json(f)); }
inline ScalarField2D load_field(const std::string& path) { return field_from_json(load_json(path)); }

}  // namespace ideal
