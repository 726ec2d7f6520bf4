#include <cmath>
#include <cstdio>
#include <fstream>

#include <openssl/evp.h>

#include "degenlab/cli.hpp"
#include "degenlab/error.hpp"

namespace degenlab::cli {

Json num(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

namespace {

std::string cell(const Json& v) {
  if (v.is_null()) return {};
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number()) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v.get<double>());
    return buf;
  }
  const std::string s = v.is_string() ? v.get<std::string>() : v.dump();
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

}  // namespace

std::string to_csv(const CsvTable& table) {
  if (table.header.empty()) throw DomainError("CSV table needs a header");
  std::string out;
  auto row = [&](const std::vector<Json>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cell(cells[i]);
    }
    out += '\n';
  };
  std::vector<Json> head(table.header.begin(), table.header.end());
  row(head);
  for (const auto& r : table.rows) {
    if (r.size() != table.header.size()) throw DimensionMismatch("CSV row width differs from the header");
    row(r);
  }
  return out;
}

void emit_csv(const CsvTable& table, const std::filesystem::path& path) {
  if (table.rows.empty()) throw DomainError("CSV series is empty");
  const std::string text = to_csv(table);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

std::string sha256_hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw Error("HashError", "SHA-256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

std::string determinism_hash(const Json& body) {
  Json b = body;
  b.erase("determinism_hash");
  if (b.contains("config")) {
    b["config"].erase("output");
    b["config"].erase("threads");
  }
  return sha256_hex(b.dump());
}

Json Report::document() const {
  Json d = body;
  d["timing"] = timing;
  return d;
}

}  // namespace degenlab::cli
