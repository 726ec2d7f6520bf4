#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace degenlab::cli {

using Json = nlohmann::json;

inline constexpr const char* tool_version = "1.0.0";
inline constexpr int schema_version = 1;

/// INI text: top-level `key = value` pairs, `[section]` headers, `;` between
/// pairs on one line, `#` comments.  Repeated [profile] sections form a list.
/// Values: "quoted", [list, of, values], true/false, numbers, bare words.
Json parse_ini(std::string_view text);

/// INI or JSON (by .json extension or a leading '{').
Json parse_document(std::string_view text, bool json);
Json load_document(const std::filesystem::path& path);

struct RunConfig {
  std::string command;
  Json doc;  // validated, defaults filled in
};

/// Validates `doc` against the schema of its command; unknown keys, missing
/// required keys and ill-typed values raise ConfigError.
RunConfig make_config(Json doc);
RunConfig load_config(const std::filesystem::path& path);

/// Commands run() understands.
const std::vector<std::string>& commands();

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<Json>> rows;  // numbers, strings, booleans or null
};

/// RFC 4180 quoting, %.17g numbers, LF line endings, header first.
std::string to_csv(const CsvTable& table);
void emit_csv(const CsvTable& table, const std::filesystem::path& path);

struct Report {
  Json body;  // schema, tool_version, command, config, results, violations, determinism_hash
  Json timing;
  std::optional<CsvTable> csv;

  std::size_t violations() const { return body.at("violations").size(); }
  int exit_code() const { return violations() ? 2 : 0; }
  /// body plus the timing block.
  Json document() const;
};

std::string sha256_hex(std::string_view data);

/// SHA-256 of the canonical body, without the hash itself and without the
/// config's output paths and thread count.
std::string determinism_hash(const Json& body);

Report run(const RunConfig& cfg);

/// run() plus the configured JSON/CSV outputs.  Returns the exit code:
/// 0 done, 2 check violations, 1 errors (reported on `err`).
int execute(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// JSON number, or "inf" / "-inf" / "nan" for non-finite values.
Json num(double v);

}  // namespace degenlab::cli
