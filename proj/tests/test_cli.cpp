#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "degenlab/cli.hpp"
#include "degenlab/error.hpp"
#include "doctest.h"

using namespace degenlab;
using namespace degenlab::cli;

namespace {

const std::filesystem::path configs = DEGENLAB_CONFIG_DIR;

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* ks_family = R"ini(
command = classify
[family]
m = 1; p = 3; n = 3
[profile]
name = "lam2"; expr = "1"; elliptical = true
[profile]
name = "lam3"; expr = "exp(-2/abs(x1))"; at0 = 0; elliptical = true
)ini";

}  // namespace

TEST_CASE("parse_ini: sections, separators, values") {
  const Json d = parse_ini(R"ini(
seed = 7   # trailing comment
[family]
m = 1; p = 3 ; tail = false
[profile]
name = "a;b # not a comment"; list = [1, 2.5, "x, y"]
[profile]
name = bare; neg = -3e-2
)ini");
  CHECK(d["seed"] == 7);
  CHECK(d["family"]["p"] == 3);
  CHECK(d["family"]["tail"] == false);
  REQUIRE(d["profile"].size() == 2);
  CHECK(d["profile"][0]["name"] == "a;b # not a comment");
  CHECK(d["profile"][0]["list"][1] == 2.5);
  CHECK(d["profile"][0]["list"][2] == "x, y");
  CHECK(d["profile"][1]["name"] == "bare");
  CHECK(d["profile"][1]["neg"].get<double>() == -3e-2);
  CHECK_THROWS_AS(parse_ini("[a]\n[a]\n"), ConfigError);
  CHECK_THROWS_AS(parse_ini("x = 1; x = 2"), ConfigError);
  CHECK_THROWS_AS(parse_ini("novalue"), ConfigError);
  CHECK_THROWS_AS(parse_ini("s = \"open"), ConfigError);
}

TEST_CASE("make_config: validation") {
  CHECK_THROWS_AS(make_config(Json::object()), ConfigError);
  CHECK_THROWS_AS(make_config(parse_ini("")), ConfigError);
  CHECK_THROWS_AS(make_config(parse_ini("seed = 1")), ConfigError);
  CHECK_THROWS_AS(make_config(parse_ini("command = nope")), ConfigError);
  Json d = parse_ini(ks_family);
  const auto cfg = make_config(d);
  CHECK(cfg.command == "classify");
  CHECK(cfg.doc["family"]["grid"] == 201);
  CHECK(cfg.doc["profile"][0]["R"] == 1.0);
  CHECK(cfg.doc["classify"]["form"] == "both");
  d["family"]["colour"] = 1;
  try {
    make_config(d);
    FAIL("unknown key accepted");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("family.colour") != std::string::npos);
  }
  Json t = parse_ini(ks_family);
  t["family"]["p"] = "three";
  CHECK_THROWS_AS(make_config(t), ConfigError);
  Json u = parse_ini(ks_family);
  u["extra"] = Json::object();
  CHECK_THROWS_AS(make_config(u), ConfigError);
  Json s = parse_ini("command = sharpness\n[f]\nname = \"f\"; expr = \"1\"\n[h]\nname = \"h\"; expr = \"1\"\n");
  const auto sc = make_config(s);
  CHECK(sc.doc["sharpness"]["etas"].size() == 12);
  CHECK(sc.doc["sharpness"]["etas"][0].get<double>() == doctest::Approx(10.0));
  CHECK(sc.doc["sharpness"]["etas"][11].get<double>() == doctest::Approx(1e4));
  s["sharpness"] = {{"etas", "10:1e4"}};
  CHECK_THROWS_AS(make_config(s), ConfigError);
}

TEST_CASE("run: classify lambda3 = exp(-2/|x|) as Fails") {
  const auto rep = run(make_config(parse_ini(ks_family)));
  CHECK(rep.body["results"]["verdict"] == "Fails");
  CHECK(rep.exit_code() == 2);
  const auto holds = run(load_config(configs / "classify_holds.ini"));
  CHECK(holds.body["results"]["verdict"] == "Holds");
  CHECK(holds.exit_code() == 0);
  CHECK(holds.body["schema"] == schema_version);
  CHECK(holds.body["tool_version"] == tool_version);
  CHECK(holds.body["config"]["command"] == "classify");
  CHECK(holds.body["determinism_hash"].get<std::string>().size() == 64);
}

TEST_CASE("execute: exit codes") {
  std::ostringstream out, err;
  CHECK(execute(make_config(parse_ini(ks_family)), out, err) == 2);
  CHECK(execute(load_config(configs / "classify_holds.ini"), out, err) == 0);
  Json bad = parse_ini(ks_family);
  bad["profile"][1]["expr"] = "exp(";
  CHECK(execute(make_config(bad), out, err) == 1);
  CHECK(err.str().find("SyntaxError") != std::string::npos);
  Json suite = load_document(configs / "inequality.ini");
  suite.erase("seed");
  std::ostringstream e2;
  CHECK(execute(make_config(suite), out, e2) == 1);
  CHECK(e2.str().find("seed") != std::string::npos);
}

TEST_CASE("run: sharpness series and CSV") {
  const auto rep = run(load_config(configs / "sharpness.ini"));
  REQUIRE(rep.csv);
  CHECK(rep.csv->rows.size() == 12);
  CHECK(rep.csv->header == std::vector<std::string>{"eta", "lambda0", "mass_half", "log_ratio_k"});
  const std::string text = to_csv(*rep.csv);
  CHECK(std::count(text.begin(), text.end(), '\n') == 13);
  CHECK(text.find('\r') == std::string::npos);
  CHECK(text.substr(0, text.find('\n')) == "eta,lambda0,mass_half,log_ratio_k");
  // Full precision: every value parses back to the identical double.
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  std::size_t r = 0;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string cell;
    std::size_t col = 0;
    while (std::getline(ls, cell, ',')) CHECK(std::strtod(cell.c_str(), nullptr) == rep.csv->rows[r][col++].get<double>());
    ++r;
  }
  CHECK(r == 12);
}

TEST_CASE("to_csv: quoting and round trip") {
  CsvTable t{{"name", "value"}, {}};
  t.rows.push_back({"plain", 0.1});
  t.rows.push_back({"has,comma", 1.0 / 3.0});
  t.rows.push_back({"has \"quote\"", -2.5e-300});
  t.rows.push_back({"line\nbreak", nullptr});
  const std::string s = to_csv(t);
  CHECK(s == "name,value\nplain,0.10000000000000001\n\"has,comma\",0.33333333333333331\n"
             "\"has \"\"quote\"\"\",-2.5e-300\n\"line\nbreak\",\n");
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  CsvTable v{{"x"}, {}};
  for (int i = 0; i < 200; ++i) v.rows.push_back({std::ldexp(u(rng), static_cast<int>(rng() % 200) - 100)});
  std::istringstream in(to_csv(v));
  std::string line;
  std::getline(in, line);
  CHECK(line == "x");
  for (int i = 0; i < 200; ++i) {
    std::getline(in, line);
    CHECK(std::strtod(line.c_str(), nullptr) == v.rows[static_cast<std::size_t>(i)][0].get<double>());
  }
  CsvTable empty{{"x"}, {}};
  CHECK_THROWS_AS(emit_csv(empty, "/tmp/never.csv"), DomainError);
  CHECK_THROWS_AS(emit_csv(v, "/nonexistent-dir/x.csv"), IoError);
}

TEST_CASE("sha256 and determinism hash") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  const auto a = run(load_config(configs / "inequality.ini"));
  Json d = load_document(configs / "inequality.ini");
  d["threads"] = 1;
  d["output"] = {{"json", "/tmp/elsewhere.json"}};
  const auto b = run(make_config(d));
  CHECK(a.body["determinism_hash"] == b.body["determinism_hash"]);
  CHECK(a.body["determinism_hash"] == determinism_hash(a.body));
  d["seed"] = 43;
  CHECK(run(make_config(d)).body["determinism_hash"] != a.body["determinism_hash"]);
}

TEST_CASE("JSON and INI configs are interchangeable") {
  const auto ini = run(load_config(configs / "sharpness.ini"));
  Json doc = parse_document(slurp(configs / "sharpness.ini"), false);
  const auto js = run(make_config(Json::parse(doc.dump())));
  CHECK(ini.body["determinism_hash"] == js.body["determinism_hash"]);
  const auto stock = run(load_config(configs / "sharpness.json"));
  CHECK(stock.body["results"]["fit_meaningful"] == false);
}

TEST_CASE("run: every stock config completes") {
  for (const auto& entry : std::filesystem::directory_iterator(configs)) {
    CAPTURE(entry.path().string());
    const auto rep = run(load_config(entry.path()));
    CHECK(rep.body.contains("results"));
    CHECK((rep.exit_code() == 0 || rep.exit_code() == 2));
  }
}

TEST_CASE("run: module checks surface as violations") {
  const auto sos = run(load_config(configs / "sos_diag.ini"));
  CHECK(sos.body["results"]["residual"].get<double>() <= 1e-12);
  CHECK(sos.exit_code() == 0);
  Json kink = load_document(configs / "sos_diag.ini");
  kink["matrix"]["a[2][2]"] = "x1^2";
  kink["sos"]["X[2][1]"] = Json::array({"0", "abs(x1)"});
  const auto k = run(make_config(kink));
  CHECK(k.body["results"]["residual"].get<double>() <= 1e-12);
  CHECK(k.exit_code() == 2);
  const auto par = run(load_config(configs / "parametrix.ini"));
  CHECK(par.body["results"]["slope"].get<double>() < -2.7);
  CHECK(par.exit_code() == 0);
  Json lin = load_document(configs / "lowerbound.ini");
  const auto lb = run(make_config(lin));
  CHECK(lb.body["results"]["rows"][1]["c"].get<double>() == doctest::Approx(4.0).epsilon(0.1));
}
