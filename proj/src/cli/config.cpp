#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <regex>
#include <sstream>

#include "degenlab/cli.hpp"
#include "degenlab/error.hpp"
#include "degenlab/numeric.hpp"

namespace degenlab::cli {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void fail(std::size_t line, const std::string& what) {
  throw ConfigError("line " + std::to_string(line) + ": " + what);
}

// Splits on `sep` outside quotes and brackets.
std::vector<std::string> split_top(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  int depth = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (quoted) {
      cur += c;
      if (c == '\\' && i + 1 < s.size()) cur += s[++i];
      else if (c == '"') quoted = false;
      continue;
    }
    if (c == '"') quoted = true;
    else if (c == '[') ++depth;
    else if (c == ']') --depth;
    else if (c == sep && depth == 0) {
      out.push_back(cur);
      cur.clear();
      continue;
    }
    cur += c;
  }
  out.push_back(cur);
  return out;
}

std::string strip_comment(std::string_view s) {
  bool quoted = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (quoted) {
      if (s[i] == '\\') ++i;
      else if (s[i] == '"') quoted = false;
    } else if (s[i] == '"') {
      quoted = true;
    } else if (s[i] == '#') {
      return std::string(s.substr(0, i));
    }
  }
  return std::string(s);
}

Json parse_value(const std::string& raw, std::size_t line) {
  const std::string v = trim(raw);
  if (v.empty()) fail(line, "missing value");
  if (v.front() == '"') {
    if (v.size() < 2 || v.back() != '"') fail(line, "unterminated string");
    std::string out;
    for (std::size_t i = 1; i + 1 < v.size(); ++i) {
      if (v[i] == '\\' && i + 2 < v.size()) {
        const char n = v[++i];
        out += n == 'n' ? '\n' : n == 't' ? '\t' : n;
      } else if (v[i] == '"') {
        fail(line, "unescaped quote inside string");
      } else {
        out += v[i];
      }
    }
    return out;
  }
  if (v.front() == '[') {
    if (v.back() != ']') fail(line, "unterminated list");
    Json arr = Json::array();
    const std::string inner = trim(std::string_view(v).substr(1, v.size() - 2));
    if (inner.empty()) return arr;
    for (const auto& item : split_top(inner, ',')) arr.push_back(parse_value(item, line));
    return arr;
  }
  if (v == "true") return true;
  if (v == "false") return false;
  const char* b = v.c_str();
  char* e = nullptr;
  const long long iv = std::strtoll(b, &e, 10);
  if (*e == '\0') return iv;
  const double dv = std::strtod(b, &e);
  if (*e == '\0') return dv;
  return v;
}

}  // namespace

Json parse_ini(std::string_view text) {
  Json doc = Json::object();
  Json* section = &doc;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line = 0;
  static const std::regex header(R"(^\[([A-Za-z_][A-Za-z0-9_-]*)\]$)");
  while (std::getline(in, raw)) {
    ++line;
    const std::string s = trim(strip_comment(raw));
    if (s.empty()) continue;
    std::smatch m;
    if (std::regex_match(s, m, header)) {
      const std::string name = m[1];
      if (name == "profile") {
        auto& list = doc["profile"];
        if (list.is_null()) list = Json::array();
        list.push_back(Json::object());
        section = &list.back();
      } else {
        if (doc.contains(name)) fail(line, "section [" + name + "] appears twice");
        doc[name] = Json::object();
        section = &doc[name];
      }
      continue;
    }
    for (const auto& pair : split_top(s, ';')) {
      const std::string p = trim(pair);
      if (p.empty()) continue;
      const auto eq = p.find('=');
      if (eq == std::string::npos) fail(line, "expected key = value");
      const std::string key = trim(std::string_view(p).substr(0, eq));
      if (key.empty()) fail(line, "empty key");
      if (section->contains(key)) fail(line, "duplicate key '" + key + "'");
      (*section)[key] = parse_value(p.substr(eq + 1), line);
    }
  }
  return doc;
}

Json parse_document(std::string_view text, bool json) {
  if (!json) {
    const auto b = text.find_first_not_of(" \t\r\n");
    json = b != std::string_view::npos && text[b] == '{';
  }
  if (!json) return parse_ini(text);
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
}

Json load_document(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_document(ss.str(), path.extension() == ".json");
}

// --- schema ----------------------------------------------------------------------

namespace {

enum class Kind { Int, Real, Bool, Str, StrList, Sweep };

struct Field {
  std::string key;
  Kind kind;
  Json def;              // null with required = false means optional
  bool required = false;
};

struct SectionSpec {
  std::string name;
  std::vector<Field> fields;
  bool list = false;           // repeated [profile]
  bool required = false;
  std::vector<std::pair<std::regex, Kind>> patterns;
};

Field req(std::string k, Kind kind) { return {std::move(k), kind, nullptr, true}; }
Field opt(std::string k, Kind kind, Json def = nullptr) { return {std::move(k), kind, std::move(def), false}; }

std::vector<Field> profile_fields() {
  return {req("name", Kind::Str), opt("m", Kind::Int, 1), opt("R", Kind::Real, 1.0), req("expr", Kind::Str),
          opt("at0", Kind::Real), opt("elliptical", Kind::Bool, false)};
}

SectionSpec profiles(bool required = true) { return {"profile", profile_fields(), true, required, {}}; }

SectionSpec family() {
  return {"family",
          {opt("m", Kind::Int, 1), opt("p", Kind::Int), opt("n", Kind::Int), opt("tail", Kind::Bool, true),
           opt("R", Kind::Real), opt("grid", Kind::Int, 201)},
          false, false, {}};
}

SectionSpec matrix() {
  return {"matrix",
          {req("n", Kind::Int), opt("m", Kind::Int, 1), req("p", Kind::Int), opt("R", Kind::Real, 1.0),
           opt("grid", Kind::Int, 201), opt("exclude", Kind::Real, 0.0)},
          false, true, {{std::regex(R"(^a\[[0-9]+\]\[[0-9]+\]$)"), Kind::Str}}};
}

const std::map<std::string, std::vector<SectionSpec>>& schema() {
  static const std::map<std::string, std::vector<SectionSpec>> s = {
      {"classify",
       {family(), profiles(),
        {"classify",
         {opt("form", Kind::Str, "both"), opt("eps", Kind::Real, 1e-2), opt("fit_window", Kind::Int, 6),
          opt("fails_slope", Kind::Real, 0.05), opt("holds_slope", Kind::Real, -0.2), opt("finest", Kind::Int, 3),
          opt("k_min", Kind::Int, 2), opt("k_max", Kind::Int, 40)},
         false, false, {}}}},
      {"koike-scan",
       {profiles(),
        {"scan",
         {opt("t_min", Kind::Real, 0.01), opt("t_max", Kind::Real, 1.0), opt("count", Kind::Int, 24),
          opt("taus", Kind::Sweep, Json::array()), opt("grid", Kind::Int, 2001)},
         false, false, {}}}},
      {"matrix-check",
       {matrix(),
        {"params",
         {opt("eps", Kind::Real, 0.25), opt("delta", Kind::Real, 0.05), opt("delta2", Kind::Real, 0.1),
          opt("cap", Kind::Real, 1e3), opt("growth_slope", Kind::Real, -0.1), opt("seminorms", Kind::Bool, true),
          opt("quasiconformal_cap", Kind::Real, 1e3)},
         false, false, {}}}},
      {"sos-verify",
       {matrix(),
        {"sos",
         {opt("delta", Kind::Real, 0.5), opt("cap", Kind::Real, 1e3), opt("residual_tol", Kind::Real, 1e-10)},
         false, true,
         {{std::regex(R"(^X\[[0-9]+\]\[[0-9]+\]$)"), Kind::StrList},
          {std::regex(R"(^Q\[[0-9]+\]\[[0-9]+\]$)"), Kind::Str}}}}},
      {"parametrix",
       {{"symbol",
         {req("expr", Kind::Str), opt("n", Kind::Int, 1), opt("order", Kind::Real, 0.0), opt("rho", Kind::Real, 1.0),
          opt("eta", Kind::Real, 0.0), opt("terms", Kind::Int, 2), opt("xi_min", Kind::Real, 10.0),
          opt("xi_max", Kind::Real, 1e4), opt("slack", Kind::Real, 0.3)},
         false, true, {}}}},
      {"sharpness",
       {{"f", profile_fields(), false, true, {}},
        {"h", profile_fields(), false, true, {}},
        {"sharpness",
         {opt("a", Kind::Real, 1.0), opt("grid", Kind::Int, 2001), opt("etas", Kind::Sweep, "10:1e4:12log"),
          opt("k", Kind::Int, 3), opt("delta", Kind::Real, 0.1)},
         false, false, {}}}},
      {"inequality-suite",
       {family(), profiles(),
        {"suite",
         {opt("bumps", Kind::Int, 500), opt("grid", Kind::Int, 4001), opt("hardy_r", Kind::Real, 0.5),
          opt("hardy_tol", Kind::Real, 0.05), opt("taus", Kind::Sweep, Json::array({10.0, 100.0, 1000.0, 10000.0}))},
         false, false, {}}}},
      {"lowerbound",
       {profiles(),
        {"lowerbound",
         {opt("taus", Kind::Sweep, Json::array({10.0, 100.0, 1000.0})), opt("grid", Kind::Int, 2001),
          opt("a", Kind::Real, 1.0), opt("cap", Kind::Real, 1e3)},
         false, false, {}}}},
  };
  return s;
}

const char* kind_name(Kind k) {
  switch (k) {
    case Kind::Int: return "an integer";
    case Kind::Real: return "a number";
    case Kind::Bool: return "true or false";
    case Kind::Str: return "a string";
    case Kind::StrList: return "a list of strings";
    case Kind::Sweep: return "a list of numbers or lo:hi:N[log]";
  }
  return "";
}

std::vector<double> expand_sweep(const std::string& s, const std::string& where) {
  static const std::regex re(R"(^\s*([^:]+):([^:]+):([0-9]+)(log)?\s*$)");
  std::smatch m;
  if (!std::regex_match(s, m, re)) throw ConfigError("key '" + where + "': expected lo:hi:N[log], got '" + s + "'");
  char* e = nullptr;
  const std::string a = m[1], b = m[2];
  const double lo = std::strtod(a.c_str(), &e);
  if (*e) throw ConfigError("key '" + where + "': bad bound '" + a + "'");
  const double hi = std::strtod(b.c_str(), &e);
  if (*e) throw ConfigError("key '" + where + "': bad bound '" + b + "'");
  const auto n = static_cast<std::size_t>(std::stoul(m[3]));
  if (n < 1) throw ConfigError("key '" + where + "': empty sweep");
  if (n == 1) return {lo};
  if (m[4].matched) {
    if (!(lo > 0 && hi > 0)) throw ConfigError("key '" + where + "': log sweep needs positive bounds");
    return numeric::logspace(lo, hi, n);
  }
  return numeric::linspace(lo, hi, n);
}

Json coerce(const Json& v, Kind kind, const std::string& where) {
  auto bad = [&]() -> Json { throw ConfigError("key '" + where + "': expected " + kind_name(kind)); };
  switch (kind) {
    case Kind::Int:
      if (v.is_number_integer()) return v;
      if (v.is_number_float() && std::floor(v.get<double>()) == v.get<double>() && std::fabs(v.get<double>()) < 1e15)
        return static_cast<long long>(v.get<double>());
      return bad();
    case Kind::Real:
      if (v.is_number()) return v.get<double>();
      return bad();
    case Kind::Bool:
      if (v.is_boolean()) return v;
      return bad();
    case Kind::Str:
      if (v.is_string()) return v;
      return bad();
    case Kind::StrList:
      if (v.is_string()) return Json::array({v});
      if (!v.is_array()) return bad();
      for (const auto& x : v)
        if (!x.is_string()) return bad();
      return v;
    case Kind::Sweep: {
      if (v.is_string()) return expand_sweep(v.get<std::string>(), where);
      if (v.is_number()) return Json::array({v.get<double>()});
      if (!v.is_array()) return bad();
      Json out = Json::array();
      for (const auto& x : v) {
        if (!x.is_number()) return bad();
        out.push_back(x.get<double>());
      }
      return out;
    }
  }
  return bad();
}

Json validate_section(const Json& in, const SectionSpec& spec, const std::string& where) {
  if (!in.is_object()) throw ConfigError("key '" + where + "': expected a section");
  Json out = Json::object();
  for (const auto& f : spec.fields) {
    const std::string key = where + "." + f.key;
    if (in.contains(f.key) && !in.at(f.key).is_null()) {
      out[f.key] = coerce(in.at(f.key), f.kind, key);
    } else if (f.required) {
      throw ConfigError("missing key '" + key + "'");
    } else {
      out[f.key] = f.def.is_null() ? Json(nullptr) : coerce(f.def, f.kind, key);
    }
  }
  for (const auto& [k, v] : in.items()) {
    if (out.contains(k)) continue;
    bool matched = false;
    for (const auto& [re, kind] : spec.patterns) {
      if (std::regex_match(k, re)) {
        out[k] = coerce(v, kind, where + "." + k);
        matched = true;
        break;
      }
    }
    if (!matched) throw ConfigError("unknown key '" + where + "." + k + "'");
  }
  return out;
}

}  // namespace

const std::vector<std::string>& commands() {
  static const std::vector<std::string> c = [] {
    std::vector<std::string> v;
    for (const auto& [k, _] : schema()) v.push_back(k);
    return v;
  }();
  return c;
}

RunConfig make_config(Json doc) {
  if (doc.is_null() || (doc.is_object() && doc.empty())) throw ConfigError("empty configuration");
  if (!doc.is_object()) throw ConfigError("configuration must be a table of keys");
  if (!doc.contains("command")) throw ConfigError("missing key 'command'");
  if (!doc["command"].is_string()) throw ConfigError("key 'command': expected a string");
  const std::string command = doc["command"];
  const auto it = schema().find(command);
  if (it == schema().end()) throw ConfigError("key 'command': unknown command '" + command + "'");

  Json out = Json::object();
  out["command"] = command;
  out["seed"] = nullptr;
  if (doc.contains("seed") && !doc["seed"].is_null()) {
    const Json s = coerce(doc["seed"], Kind::Int, "seed");
    if (s.get<long long>() < 0) throw ConfigError("key 'seed': must be nonnegative");
    out["seed"] = s;
  }
  out["threads"] = doc.contains("threads") ? coerce(doc["threads"], Kind::Int, "threads") : Json(0);
  if (out["threads"].get<long long>() < 0) throw ConfigError("key 'threads': must be nonnegative");
  const SectionSpec output{"output", {opt("json", Kind::Str, ""), opt("csv", Kind::Str, "")}, false, false, {}};
  out["output"] = validate_section(doc.value("output", Json::object()), output, "output");

  for (const auto& spec : it->second) {
    if (!doc.contains(spec.name)) {
      if (spec.required) throw ConfigError("missing section [" + spec.name + "]");
      if (spec.list) continue;
      out[spec.name] = validate_section(Json::object(), spec, spec.name);
      continue;
    }
    const Json& sec = doc.at(spec.name);
    if (spec.list) {
      const Json arr = sec.is_array() ? sec : Json::array({sec});
      if (arr.empty() && spec.required) throw ConfigError("section [" + spec.name + "] is empty");
      Json list = Json::array();
      for (std::size_t i = 0; i < arr.size(); ++i)
        list.push_back(validate_section(arr[i], spec, spec.name + "[" + std::to_string(i) + "]"));
      out[spec.name] = list;
    } else {
      out[spec.name] = validate_section(sec, spec, spec.name);
    }
  }
  for (const auto& [k, _] : doc.items()) {
    if (!out.contains(k)) throw ConfigError("unknown key '" + k + "' for command " + command);
  }
  return {command, out};
}

RunConfig load_config(const std::filesystem::path& path) { return make_config(load_document(path)); }

}  // namespace degenlab::cli
