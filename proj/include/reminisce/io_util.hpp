#pragma once

#include <algorithm>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

#include "json.hpp"

namespace reminisce {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// "%.17g": enough digits for any double to round-trip exactly.
std::string format_double(double v);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view contents);
/// Fails if the file already exists.
void write_new_file(const std::filesystem::path& path, std::string_view contents);

nlohmann::json read_json_file(const std::filesystem::path& path);
/// Two-space indented with a trailing newline; floating-point numbers are
/// printed with format_double so they read back bit-exactly.
template <typename Json>
std::string dump_json(const Json& j);

/// 64-bit FNV-1a, hex encoded.
std::string fnv1a_hex(std::string_view bytes);

/// Quotes a CSV field when it contains a comma, quote or newline.
std::string csv_field(std::string_view s);

namespace detail {

template <typename Json>
void dump_json_to(const Json& j, int indent, std::string& out) {
  const std::string pad(static_cast<std::size_t>(indent + 2), ' ');
  const std::string close_pad(static_cast<std::size_t>(indent), ' ');
  if (j.is_object()) {
    if (j.empty()) {
      out += "{}";
      return;
    }
    out += "{\n";
    bool first = true;
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (!first) out += ",\n";
      first = false;
      out += pad;
      out += Json(it.key()).dump();
      out += ": ";
      dump_json_to(it.value(), indent + 2, out);
    }
    out += "\n" + close_pad + "}";
  } else if (j.is_array()) {
    if (j.empty()) {
      out += "[]";
      return;
    }
    // Arrays of scalars stay on one line.
    const bool flat = std::none_of(j.begin(), j.end(),
                                   [](const Json& e) { return e.is_structured(); });
    out += flat ? "[" : "[\n";
    bool first = true;
    for (const auto& e : j) {
      if (!first) out += flat ? ", " : ",\n";
      first = false;
      if (!flat) out += pad;
      dump_json_to(e, indent + 2, out);
    }
    out += flat ? "]" : "\n" + close_pad + "]";
  } else if (j.is_number_float()) {
    out += format_double(j.template get<double>());
  } else {
    out += j.dump();
  }
}

}  // namespace detail

template <typename Json>
std::string dump_json(const Json& j) {
  std::string out;
  detail::dump_json_to(j, 0, out);
  out += "\n";
  return out;
}

}  // namespace reminisce
