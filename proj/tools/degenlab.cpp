#include <iostream>
#include <map>
#include <optional>

#include "CLI11.hpp"
#include "degenlab/cli.hpp"
#include "degenlab/error.hpp"

using degenlab::cli::Json;

namespace {

struct Common {
  std::optional<long long> threads;
  std::optional<long long> seed;
  std::string json, csv;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--threads", c.threads, "cap on worker threads (0 = all cores)");
  app->add_option("--seed", c.seed, "seed for randomized suites");
  app->add_option("--json", c.json, "write the JSON report here");
  app->add_option("--csv", c.csv, "write the CSV series here");
}

void apply_common(Json& doc, const Common& c) {
  if (c.threads) doc["threads"] = *c.threads;
  if (c.seed) doc["seed"] = *c.seed;
  if (!doc.contains("output")) doc["output"] = Json::object();
  if (!c.json.empty()) doc["output"]["json"] = c.json;
  if (!c.csv.empty()) doc["output"]["csv"] = c.csv;
}

// A profile file holds top-level profile keys or one [profile] section.
Json profile_fragment(const std::string& path) {
  Json d = degenlab::cli::load_document(path);
  if (d.contains("profile")) {
    const Json& p = d["profile"];
    if (p.is_array()) {
      if (p.size() != 1) throw degenlab::ConfigError(path + ": expected one [profile]");
      return p[0];
    }
    return p;
  }
  return d;
}

// "eps=0.25,delta=0.05" -> {"eps": 0.25, ...}
Json key_values(const std::string& text, const std::string& flag) {
  Json out = Json::object();
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find(',', pos);
    if (end == std::string::npos) end = text.size();
    const std::string item = text.substr(pos, end - pos);
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw degenlab::ConfigError(flag + ": expected key=value, got '" + item + "'");
    out[item.substr(0, eq)] = degenlab::cli::parse_ini("v = " + item.substr(eq + 1))["v"];
    pos = end + 1;
  }
  return out;
}

Json sweep(const std::string& text) {
  if (text.find(':') != std::string::npos) return text;
  Json arr = Json::array();
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find(',', pos);
    if (end == std::string::npos) end = text.size();
    arr.push_back(std::stod(text.substr(pos, end - pos)));
    pos = end + 1;
  }
  return arr;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"degenlab: hypoellipticity criteria, matrix checks, symbol calculus and sharpness experiments"};
  app.require_subcommand(1);
  std::map<std::string, Common> common;
  std::map<std::string, std::string> files;
  std::map<std::string, std::string> text;
  std::map<std::string, double> reals;
  std::map<std::string, long long> ints;

  auto sub = [&](const std::string& name, const std::string& help) {
    auto* s = app.add_subcommand(name, help);
    s->set_help_flag("--help", "print this help message and exit");
    add_common(s, common[name]);
    return s;
  };

  auto* run = sub("run", "run a configuration file");
  run->add_option("config", files["run"], "INI or JSON configuration")->required()->check(CLI::ExistingFile);

  auto* cls = sub("classify", "Koike criterion classifier");
  cls->add_option("--family", files["family"], "family file ([family] and [profile] sections)")->required();
  cls->add_option("--form", text["form"], "sum-product, max-min or both");

  auto* ks = sub("koike-scan", "mu(t, g) and w(tau) tables for one profile");
  ks->add_option("--profile", files["profile"], "profile file")->required();
  ks->add_option("--taus", text["ks-taus"], "tau list or lo:hi:N[log]");

  auto* mc = sub("matrix-check", "subordinate, quasiconformal and differential checks");
  mc->add_option("--matrix", files["matrix"], "matrix file ([matrix] with a[k][j] entries)")->required();
  mc->add_option("--params", text["params"], "eps=..,delta=..,delta2=..,cap=..");

  auto* sos = sub("sos-verify", "verify a supplied sum-of-squares decomposition");
  sos->add_option("--matrix", files["sos-matrix"], "matrix file")->required();
  sos->add_option("--sos", files["sos"], "decomposition file ([sos] with X[k][i], Q[i][j])")->required();

  auto* par = sub("parametrix", "parametrix chain and residual decay");
  par->add_option("--symbol", text["symbol"], "symbol a(x, xi)")->required();
  par->add_option("--n", ints["n"], "spatial dimension");
  par->add_option("--order", reals["order"], "nominal order m of the symbol");
  par->add_option("--terms", ints["terms"], "number M of correction terms (0..2)");

  auto* sh = sub("sharpness", "eigenvalue scan and Hoshiro ratios");
  sh->add_option("--f", files["f"], "profile file for f")->required();
  sh->add_option("--h", files["h"], "profile file for h")->required();
  sh->add_option("--etas", text["etas"], "eta list or lo:hi:N[log]");
  sh->add_option("--k", ints["k"], "derivative order k");
  sh->add_option("--delta", reals["delta"], "t half-width delta");
  sh->add_option("--grid", ints["sh-grid"], "nodes per axis");

  auto* iq = sub("inequality-suite", "Hardy, sufficiency and Malgrange property tests");
  iq->add_option("--family", files["iq-family"], "family file")->required();
  iq->add_option("--bumps", ints["bumps"], "number of random bumps");
  iq->add_option("--taus", text["iq-taus"], "tau list or lo:hi:N[log]");
  iq->add_option("--grid", ints["iq-grid"], "nodes per axis");

  auto* lb = sub("lowerbound", "lambda0 against w(tau)^2");
  lb->add_option("--f", files["lb-f"], "profile file for f")->required();
  lb->add_option("--taus", text["lb-taus"], "tau list or lo:hi:N[log]");
  lb->add_option("--grid", ints["lb-grid"], "nodes per axis");

  CLI11_PARSE(app, argc, argv);

  try {
    Json doc;
    auto given = [&](CLI::App* s, const char* flag) { return s->count(flag) > 0; };
    CLI::App* chosen = app.get_subcommands().front();
    const std::string name = chosen->get_name();
    if (name == "run") {
      doc = degenlab::cli::load_document(files["run"]);
    } else if (name == "classify") {
      doc = degenlab::cli::load_document(files["family"]);
      if (given(cls, "--form")) doc["classify"]["form"] = text["form"];
    } else if (name == "koike-scan") {
      doc["profile"] = Json::array({profile_fragment(files["profile"])});
      if (given(ks, "--taus")) doc["scan"]["taus"] = sweep(text["ks-taus"]);
    } else if (name == "matrix-check") {
      doc = degenlab::cli::load_document(files["matrix"]);
      if (given(mc, "--params")) {
        for (const auto& [k, v] : key_values(text["params"], "--params").items()) doc["params"][k] = v;
      }
    } else if (name == "sos-verify") {
      doc = degenlab::cli::load_document(files["sos-matrix"]);
      const Json s = degenlab::cli::load_document(files["sos"]);
      doc["sos"] = s.contains("sos") ? s["sos"] : s;
    } else if (name == "parametrix") {
      doc["symbol"]["expr"] = text["symbol"];
      if (given(par, "--n")) doc["symbol"]["n"] = ints["n"];
      if (given(par, "--order")) doc["symbol"]["order"] = reals["order"];
      if (given(par, "--terms")) doc["symbol"]["terms"] = ints["terms"];
    } else if (name == "sharpness") {
      doc["f"] = profile_fragment(files["f"]);
      doc["h"] = profile_fragment(files["h"]);
      doc["sharpness"] = Json::object();
      if (given(sh, "--etas")) doc["sharpness"]["etas"] = sweep(text["etas"]);
      if (given(sh, "--k")) doc["sharpness"]["k"] = ints["k"];
      if (given(sh, "--delta")) doc["sharpness"]["delta"] = reals["delta"];
      if (given(sh, "--grid")) doc["sharpness"]["grid"] = ints["sh-grid"];
    } else if (name == "inequality-suite") {
      doc = degenlab::cli::load_document(files["iq-family"]);
      if (given(iq, "--bumps")) doc["suite"]["bumps"] = ints["bumps"];
      if (given(iq, "--taus")) doc["suite"]["taus"] = sweep(text["iq-taus"]);
      if (given(iq, "--grid")) doc["suite"]["grid"] = ints["iq-grid"];
    } else if (name == "lowerbound") {
      doc["profile"] = Json::array({profile_fragment(files["lb-f"])});
      doc["lowerbound"] = Json::object();
      if (given(lb, "--taus")) doc["lowerbound"]["taus"] = sweep(text["lb-taus"]);
      if (given(lb, "--grid")) doc["lowerbound"]["grid"] = ints["lb-grid"];
    }
    if (name != "run") doc["command"] = name;
    apply_common(doc, common[name]);
    return degenlab::cli::execute(degenlab::cli::make_config(std::move(doc)), std::cout, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
