#include <chrono>
#include <fstream>
#include <ostream>
#include <regex>

#include "degenlab/cli.hpp"
#include "degenlab/error.hpp"
#include "degenlab/inequal.hpp"
#include "degenlab/koike.hpp"
#include "degenlab/matrixcheck.hpp"
#include "degenlab/numeric.hpp"
#include "degenlab/spectral.hpp"
#include "degenlab/symcalc.hpp"

namespace degenlab::cli {

namespace {

using Clock = std::chrono::steady_clock;

struct Context {
  Context(const Json& c, unsigned t) : cfg(c), threads(t) {}
  const Json& cfg;
  unsigned threads;
  Json results = Json::object();
  Json violations = Json::array();
  std::optional<CsvTable> csv;

  void violation(std::string check, std::string message, Json detail = Json::object()) {
    Json v = {{"check", std::move(check)}, {"message", std::move(message)}};
    if (!detail.empty()) v["detail"] = std::move(detail);
    violations.push_back(std::move(v));
  }
};

Json point(std::span<const double> x) {
  Json a = Json::array();
  for (double v : x) a.push_back(num(v));
  return a;
}

Json series(std::span<const double> x) { return point(x); }

int geti(const Json& j, const char* k) { return static_cast<int>(j.at(k).get<long long>()); }
double getd(const Json& j, const char* k) { return j.at(k).get<double>(); }
std::vector<double> getv(const Json& j, const char* k) { return j.at(k).get<std::vector<double>>(); }

Profile make_profile(const Json& p) {
  std::optional<double> at0;
  if (!p.at("at0").is_null()) at0 = getd(p, "at0");
  return Profile::parse(p.at("name").get<std::string>(), geti(p, "m"), getd(p, "R"), p.at("expr").get<std::string>(),
                        at0, p.at("elliptical").get<bool>());
}

std::vector<Profile> make_profiles(const Json& cfg) {
  std::vector<Profile> out;
  for (const auto& p : cfg.at("profile")) out.push_back(make_profile(p));
  return out;
}

Profile single_profile(const Json& cfg, const char* command) {
  if (cfg.at("profile").size() != 1) throw ConfigError(std::string(command) + " expects exactly one [profile]");
  return make_profile(cfg.at("profile")[0]);
}

DegeneracyFamily make_family(const Json& cfg) {
  const Json& f = cfg.at("family");
  auto profs = make_profiles(cfg);
  const int m = geti(f, "m");
  const int count = static_cast<int>(profs.size());
  const int p = f.at("p").is_null() ? m + count : geti(f, "p");
  const int n = f.at("n").is_null() ? p : geti(f, "n");
  double radius = HUGE_VAL;
  for (const auto& pr : profs) radius = std::min(radius, pr.support_radius());
  if (!f.at("R").is_null()) radius = getd(f, "R");
  return DegeneracyFamily(m, p, n, std::move(profs), f.at("tail").get<bool>(), Grid(m, radius, geti(f, "grid")));
}

std::shared_ptr<const Grid> make_grid(int m, double radius, int n) {
  return std::make_shared<const Grid>(m, radius, n, m == 2);
}

// --- commands --------------------------------------------------------------------

void run_classify(Context& c) {
  const auto fam = make_family(c.cfg);
  const Json& opt = c.cfg.at("classify");
  ClassifierThresholds th;
  th.eps = getd(opt, "eps");
  th.fit_window = geti(opt, "fit_window");
  th.fails_slope = getd(opt, "fails_slope");
  th.holds_slope = getd(opt, "holds_slope");
  th.finest = geti(opt, "finest");
  th.k_min = geti(opt, "k_min");
  th.k_max = geti(opt, "k_max");
  const std::string form = opt.at("form");
  std::vector<CriterionForm> forms;
  if (form == "sum-product" || form == "both") forms.push_back(CriterionForm::SumProduct);
  if (form == "max-min" || form == "both") forms.push_back(CriterionForm::MaxMin);
  if (forms.empty()) throw ConfigError("key 'classify.form': expected sum-product, max-min or both");

  const Grid check_grid(fam.m(), fam.support_radius(), geti(c.cfg.at("family"), "grid"));
  bool monotone = true;
  Json mono = Json::array();
  for (const auto& p : fam.profiles()) {
    const auto r = check_strong_monotone(p, check_grid);
    monotone = monotone && r.holds;
    mono.push_back({{"profile", p.name()}, {"strongly_monotone", r.holds}});
  }
  c.results["profiles"] = mono;
  c.results["iff_applies"] = monotone;
  c.results["label"] = monotone ? "iff regime: criterion decides hypoellipticity of the diagonal operator"
                                : "criterion holds/fails only; no converse claimed";

  CsvTable csv{{"form", "k", "t", "log_mu", "log_p", "c", "clamped"}, {}};
  Json reports = Json::array();
  for (auto fm : forms) {
    const auto rep = classify(fam, fm, th);
    Json scales = Json::array();
    for (const auto& s : rep.scales) {
      scales.push_back({{"k", s.k}, {"t", num(s.t)}, {"log_mu", num(s.log_mu)}, {"log_p", num(s.log_p)},
                        {"c", num(s.c)}, {"clamped", s.clamped}});
      csv.rows.push_back({to_string(fm), s.k, s.t, s.log_mu, s.log_p, s.c, s.clamped});
    }
    reports.push_back({{"form", to_string(fm)}, {"verdict", to_string(rep.verdict)}, {"slope", num(rep.slope)},
                       {"any_clamped", rep.any_clamped}, {"note", rep.note}, {"scales", scales}});
    if (rep.verdict == Verdict::Fails)
      c.violation("koike_criterion", "criterion fails for the " + to_string(fm) + " form", {{"form", to_string(fm)}});
  }
  c.results["forms"] = reports;
  c.results["verdict"] = reports[0]["verdict"];
  c.csv = std::move(csv);
}

void run_koike_scan(Context& c) {
  const auto g = single_profile(c.cfg, "koike-scan");
  const Json& s = c.cfg.at("scan");
  const double lo = getd(s, "t_min"), hi = getd(s, "t_max");
  if (!(lo > 0 && hi >= lo)) throw ConfigError("key 'scan.t_min': need 0 < t_min <= t_max");
  const auto ts = numeric::logspace(lo, hi, static_cast<std::size_t>(geti(s, "count")));
  CsvTable csv{{"t", "mu", "argmax"}, {}};
  Json rows = Json::array();
  for (double t : ts) {
    const auto r = mu(t, g);
    rows.push_back({{"t", num(t)}, {"mu", num(r.value)}, {"argmax", num(r.argmax_radius)}});
    csv.rows.push_back({t, r.value, r.argmax_radius});
  }
  c.results["mu"] = rows;
  const Grid grid(g.dimension(), g.support_radius(), geti(s, "grid"));
  const auto env = radial_envelopes(g, grid);
  Json wr = Json::array();
  for (double tau : getv(s, "taus")) {
    Json row = {{"tau", num(tau)}, {"w", num(w_of_tau(env, tau))}};
    try {
      row["r"] = num(r_of_tau(env, tau));
    } catch (const NoCrossing& e) {
      row["r"] = nullptr;
      row["r_error"] = e.what();
    }
    wr.push_back(row);
  }
  c.results["w_of_tau"] = wr;
  c.csv = std::move(csv);
}

struct MatrixSpec {
  int n, m, p;
  MatrixFunction a;
  std::vector<Point> samples;
  std::shared_ptr<const Grid> grid;
};

std::pair<int, int> indices(const std::string& key) {
  static const std::regex re(R"(^[A-Za-z]\[([0-9]+)\]\[([0-9]+)\]$)");
  std::smatch m;
  std::regex_match(key, m, re);
  return {std::stoi(m[1]), std::stoi(m[2])};
}

MatrixSpec make_matrix(const Json& cfg) {
  const Json& s = cfg.at("matrix");
  const int n = geti(s, "n"), m = geti(s, "m"), p = geti(s, "p");
  if (n < 1 || m < 1 || m > n) throw ConfigError("key 'matrix.m': need 1 <= m <= n");
  MatrixFunction a(n, n);
  for (const auto& [k, v] : s.items()) {
    if (k.empty() || k[0] != 'a' || k.find('[') == std::string::npos) continue;
    auto [i, j] = indices(k);
    if (i < 1 || j < 1 || i > n || j > n) throw ConfigError("key 'matrix." + k + "': index out of range");
    a.set(std::min(i, j), std::max(i, j), v.get<std::string>());
  }
  auto grid = std::make_shared<const Grid>(m, getd(s, "R"), geti(s, "grid"));
  auto samples = sample_points(*grid, n, getd(s, "exclude"));
  return {n, m, p, std::move(a), std::move(samples), std::move(grid)};
}

void run_matrix_check(Context& c) {
  auto ms = make_matrix(c.cfg);
  const Json& par = c.cfg.at("params");
  const GrushinMatrix g(ms.n, ms.m, ms.p, ms.a);

  const auto sub = check_subordinate(ms.a, ms.samples);
  c.results["subordinate"] = {{"constant", num(sub.constant)}, {"range_mismatch", sub.range_mismatch},
                              {"worst_var", sub.worst_var}, {"witness_x", point(sub.witness_x)},
                              {"witness_xi", point(sub.witness_xi)}};
  if (sub.range_mismatch)
    c.violation("subordinate", "d_k A moves a direction A annihilates", {{"x", point(sub.witness_x)}});

  if (ms.p <= ms.n) {
    const int b = ms.n - ms.p + 1;
    MatrixFunction q(b, ms.n);
    for (int i = 1; i <= b; ++i)
      for (int j = i; j <= b; ++j) q.set(i, j, ms.a.entry(ms.p - 1 + i, ms.p - 1 + j));
    const auto qc = check_quasiconformal(q, ms.samples, getd(par, "quasiconformal_cap"));
    c.results["quasiconformal"] = {{"ratio_bound", num(qc.ratio_bound)}, {"ok", qc.ok}, {"where", point(qc.where)},
                                   {"lambda_min", num(qc.lambda_min)}, {"lambda_max", num(qc.lambda_max)},
                                   {"reason", qc.reason}};
    if (!qc.ok) c.violation("quasiconformal", qc.reason, {{"x", point(qc.where)}});
  }

  const EstimateParams ep(getd(par, "eps"), getd(par, "delta"), getd(par, "delta2"));
  DifferentialOptions opt;
  opt.cap = getd(par, "cap");
  opt.growth_slope = getd(par, "growth_slope");
  opt.min_radius = getd(c.cfg.at("matrix"), "exclude");
  opt.seminorms = par.at("seminorms").get<bool>();
  const auto rep = check_differential_estimates(g, ep, *ms.grid, opt);
  CsvTable csv{{"k", "j", "regime", "mu", "exponent", "constant", "growth_slope", "flagged"}, {}};
  Json entries = Json::array();
  for (const auto& e : rep.entries) {
    std::string mu;
    for (int v : e.mu) mu += std::to_string(v);
    entries.push_back({{"k", e.k}, {"j", e.j}, {"regime", e.regime}, {"mu", e.mu}, {"exponent", num(e.exponent)},
                       {"constant", num(e.constant)}, {"argmax", point(e.argmax)},
                       {"growth_slope", num(e.growth_slope)}, {"flagged", e.flagged}});
    csv.rows.push_back({e.k, e.j, e.regime, mu, e.exponent, e.constant, e.growth_slope, e.flagged});
    if (e.flagged)
      c.violation("differential_estimate", "entry a[" + std::to_string(e.k) + "][" + std::to_string(e.j) +
                                               "] exceeds its bound (" + e.regime + ", mu = " + mu + ")",
                  {{"constant", num(e.constant)}, {"at", point(e.argmax)}});
  }
  Json semis = Json::array();
  for (const auto& s : rep.seminorms) {
    semis.push_back({{"k", s.k}, {"j", s.j}, {"regime", s.regime}, {"mu", s.mu}, {"value", num(s.value)},
                     {"at", point(s.at)}, {"flagged", s.flagged}});
    if (s.flagged)
      c.violation("seminorm", "Hoelder seminorm of a[" + std::to_string(s.k) + "][" + std::to_string(s.j) +
                                  "] exceeds the cap",
                  {{"value", num(s.value)}, {"at", point(s.at)}});
  }
  c.results["differential"] = {{"delta_prime", num(rep.delta_prime)}, {"pass", rep.pass}, {"entries", entries},
                               {"seminorms", semis}};
  c.csv = std::move(csv);
}

void run_sos_verify(Context& c) {
  auto ms = make_matrix(c.cfg);
  const Json& s = c.cfg.at("sos");
  const GrushinMatrix g(ms.n, ms.m, ms.p, ms.a);
  const expr::VarSet vars = expr::VarSet::spatial(ms.n);
  SosDecomposition cand;
  cand.x.resize(static_cast<std::size_t>(std::max(ms.p - 1, 0)));
  const int b = ms.n - ms.p + 1;
  std::optional<MatrixFunction> q;
  for (const auto& [k, v] : s.items()) {
    if (k.find('[') == std::string::npos) continue;
    auto [i, j] = indices(k);
    if (k[0] == 'X') {
      if (i < 1 || i > ms.p - 1) throw ConfigError("key 'sos." + k + "': k must lie in 1..p-1");
      if (j < 1) throw ConfigError("key 'sos." + k + "': i must be positive");
      if (static_cast<int>(v.size()) != ms.n) throw ConfigError("key 'sos." + k + "': expected n components");
      auto& list = cand.x[static_cast<std::size_t>(i - 1)];
      if (list.size() < static_cast<std::size_t>(j)) list.resize(static_cast<std::size_t>(j));
      std::vector<expr::Expr> vec;
      for (const auto& comp : v) vec.push_back(expr::parse(comp.get<std::string>(), vars));
      list[static_cast<std::size_t>(j - 1)] = std::move(vec);
    } else {
      if (b < 1 || i < 1 || j < 1 || i > b || j > b) throw ConfigError("key 'sos." + k + "': index out of range");
      if (!q) q.emplace(b, ms.n);
      q->set(std::min(i, j), std::max(i, j), v.get<std::string>());
    }
  }
  for (std::size_t k = 0; k < cand.x.size(); ++k)
    for (std::size_t i = 0; i < cand.x[k].size(); ++i)
      if (cand.x[k][i].empty())
        throw ConfigError("missing key 'sos.X[" + std::to_string(k + 1) + "][" + std::to_string(i + 1) + "]'");
  cand.q = std::move(q);
  SosOptions opt;
  opt.delta = getd(s, "delta");
  opt.cap = getd(s, "cap");
  opt.residual_tol = getd(s, "residual_tol");
  const auto rep = verify_sos(g, cand, *ms.grid, opt);

  CsvTable csv{{"k", "lower", "upper", "pass"}, {}};
  Json sandwich = Json::array();
  for (const auto& r : rep.sandwich) {
    sandwich.push_back({{"k", r.k}, {"lower", num(r.lower)}, {"upper", num(r.upper)}, {"pass", r.pass},
                        {"witness_x", point(r.witness_x)}});
    csv.rows.push_back({r.k, r.lower, r.upper, r.pass});
  }
  Json holder = Json::array();
  for (const auto& h : rep.holder)
    holder.push_back({{"k", h.k}, {"i", h.i}, {"component", h.component}, {"value", num(h.value)},
                      {"at", point(h.at)}, {"flagged", h.flagged}});
  c.results["residual"] = num(rep.residual);
  c.results["residual_at"] = point(rep.residual_at);
  c.results["sandwich"] = sandwich;
  c.results["holder"] = holder;
  if (rep.q_vs_app)
    c.results["q_vs_app"] = {{"beta", num(rep.q_vs_app->beta)}, {"alpha", num(rep.q_vs_app->alpha)},
                             {"comparable", rep.q_vs_app->comparable}};
  c.results["pass"] = rep.pass();
  if (!rep.residual_ok) c.violation("sos_residual", "A differs from the supplied sum of squares");
  if (!rep.sandwich_ok) c.violation("sos_sandwich", "Z_k sandwich bounds fail or exceed the cap");
  if (!rep.q_ok) c.violation("sos_q", "Q_p is not comparable to a_pp I");
  if (!rep.holder_ok) c.violation("sos_holder", "a vector field fails the C^{2,delta} check");
  c.csv = std::move(csv);
}

Json complex_json(const ComplexExpr& e) { return {{"re", expr::print(e.re)}, {"im", expr::print(e.im)}}; }

void run_parametrix(Context& c) {
  const Json& s = c.cfg.at("symbol");
  const int n = geti(s, "n"), terms = geti(s, "terms");
  const auto a = SymbolExpr::parse(s.at("expr").get<std::string>(), n, getd(s, "order"), getd(s, "rho"),
                                   getd(s, "eta"));
  const auto lat = Lattice::standard(n, getd(s, "xi_min"), getd(s, "xi_max"));
  const auto chain = parametrix(a, terms, lat);
  const auto res = residual_order(chain, lat);
  Json b = Json::array();
  for (const auto& bj : chain.b) b.push_back(complex_json(bj));
  c.results["b"] = b;
  c.results["b1_displayed"] = complex_json(chain.b1_displayed);
  c.results["ellipticity"] = num(chain.ellipticity);
  c.results["residual"] = complex_json(res.residual);
  c.results["residual_zero"] = res.residual.is_zero();
  c.results["slope"] = num(res.slope);
  const double expected = -(terms + 1) * getd(s, "rho") + getd(s, "slack");
  c.results["slope_bound"] = num(expected);
  if (!(res.slope <= expected))
    c.violation("residual_order", "residual decays slower than expected",
                {{"slope", num(res.slope)}, {"bound", num(expected)}});
  CsvTable csv{{"xi_norm", "sup_abs"}, {}};
  for (std::size_t i = 0; i < res.xi_norms.size(); ++i) csv.rows.push_back({res.xi_norms[i], res.sup_abs[i]});
  c.csv = std::move(csv);
}

void run_sharpness(Context& c) {
  const auto f = make_profile(c.cfg.at("f"));
  const auto h = make_profile(c.cfg.at("h"));
  const Json& s = c.cfg.at("sharpness");
  const double a = getd(s, "a");
  const auto etas = getv(s, "etas");
  const int k = geti(s, "k");
  const double delta = getd(s, "delta");
  const auto grid = make_grid(f.dimension(), a, geti(s, "grid"));
  const auto series_ = lambda0_scan(f, h, a, etas, grid, c.threads);
  const auto hr = hoshiro_ratio(series_, k, delta);
  Json b = Json::array();
  for (const auto& v : series_.b) b.push_back(v ? num(*v) : Json(nullptr));
  c.results["etas"] = series(series_.etas);
  c.results["lambda0"] = series(series_.lambda0);
  c.results["mass_half"] = series(series_.mass_half);
  c.results["iterations"] = series_.iterations;
  c.results["b"] = b;
  c.results["c1"] = num(series_.c1);
  c.results["c1_intercept"] = num(series_.c1_intercept);
  c.results["q"] = num(series_.q);
  c.results["fit_meaningful"] = series_.fit_meaningful;
  c.results["note"] = series_.note;
  c.results["hoshiro"] = {{"k", hr.k}, {"delta", num(hr.delta)}, {"log_ratio", series(hr.log_ratio)},
                          {"exponent", num(hr.exponent)}, {"sqrt_c1_delta", num(hr.sqrt_c1_delta)},
                          {"contradiction", hr.contradiction}};
  CsvTable csv{{"eta", "lambda0", "mass_half", "log_ratio_k"}, {}};
  for (std::size_t i = 0; i < etas.size(); ++i)
    csv.rows.push_back({series_.etas[i], series_.lambda0[i], series_.mass_half[i], hr.log_ratio[i]});
  c.csv = std::move(csv);
}

void run_inequality_suite(Context& c) {
  if (c.cfg.at("seed").is_null()) throw ConfigError("key 'seed': mandatory for randomized suites");
  const auto seed = static_cast<std::uint64_t>(c.cfg.at("seed").get<long long>());
  const auto fam = make_family(c.cfg);
  const Json& s = c.cfg.at("suite");
  const auto count = static_cast<std::size_t>(geti(s, "bumps"));
  const double r = getd(s, "hardy_r"), tol = getd(s, "hardy_tol");
  const auto grid = make_grid(fam.m(), fam.support_radius(), geti(s, "grid"));
  if (!(r > 0.0 && r <= fam.support_radius())) throw ConfigError("key 'suite.hardy_r': must lie in (0, R]");
  const auto bumps = random_bumps(grid, seed, count, r, c.threads);

  const auto lam = fam.sum_profile();
  const double mu_r = mu(r, sqrt_profile(lam)).value;
  std::vector<HardyResult> hardy(count);
  numeric::parallel_for(count, c.threads, [&](std::size_t i) { hardy[i] = check_hardy_claim(lam, bumps[i], r, mu_r); });
  CsvTable csv{{"bump", "center", "width", "hardy_ratio"}, {}};
  double worst = 0.0;
  std::size_t worst_i = 0;
  for (std::size_t i = 0; i < count; ++i) {
    const auto& p = *bumps[i].params();
    csv.rows.push_back({static_cast<long long>(i), p.center[0], p.width, hardy[i].ratio});
    if (hardy[i].ratio > worst) {
      worst = hardy[i].ratio;
      worst_i = i;
    }
    if (hardy[i].ratio > 1.0 + tol)
      c.violation("hardy", "Hardy ratio above 1 + tolerance",
                  {{"bump", i}, {"ratio", num(hardy[i].ratio)}, {"center", point(p.center)}, {"width", p.width}});
  }
  c.results["hardy"] = {{"r", num(r)}, {"mu", num(mu_r)}, {"max_ratio", num(worst)}, {"worst_bump", worst_i}};

  const auto taus = getv(s, "taus");
  if (!taus.empty()) {
    const auto sw = suffic_sweep(fam, bumps, taus, c.threads);
    Json rows = Json::array();
    for (std::size_t i = 0; i < sw.taus.size(); ++i)
      rows.push_back({{"tau", num(sw.taus[i])}, {"worst_delta", num(sw.worst_delta[i])},
                      {"worst_bump", sw.worst_bump[i]}, {"worst_split", num(sw.worst_split[i])}});
    c.results["suffic"] = {{"rows", rows}, {"monotone", sw.monotone}, {"note", sw.note}};
  }

  const auto lp = fam.product_profile();
  Json aux = Json::array();
  for (double tau : taus) {
    Json row = {{"tau", num(tau)}};
    try {
      const double sv = r_of_tau(lp, tau, *grid);
      std::vector<double> ratio(count);
      numeric::parallel_for(count, c.threads,
                            [&](std::size_t i) { ratio[i] = check_bound_aux(lp, bumps[i], tau, sv, 1).ratio; });
      row["s"] = num(sv);
      row["max_ratio"] = num(*std::max_element(ratio.begin(), ratio.end()));
    } catch (const Error& e) {
      row["skipped"] = e.what();
    }
    aux.push_back(row);
  }
  c.results["bound_aux"] = aux;
  const auto mg = check_malgrange(lp, *grid);
  c.results["malgrange"] = {{"constant", num(mg.constant)}, {"argmax", point(mg.argmax)}, {"skipped", mg.skipped}};
  c.csv = std::move(csv);
}

void run_lowerbound(Context& c) {
  const auto f = single_profile(c.cfg, "lowerbound");
  const Json& s = c.cfg.at("lowerbound");
  const double a = getd(s, "a"), cap = getd(s, "cap");
  const auto taus = getv(s, "taus");
  const auto grid = make_grid(f.dimension(), a, geti(s, "grid"));
  const auto rep = lowerbound_check(f, taus, grid, a, c.threads);
  CsvTable csv{{"tau", "w", "lambda0", "c"}, {}};
  Json rows = Json::array();
  for (const auto& r : rep.rows) {
    rows.push_back({{"tau", num(r.tau)}, {"w", num(r.w)}, {"lambda0", num(r.lambda0)}, {"c", num(r.c)}});
    csv.rows.push_back({r.tau, r.w, r.lambda0, r.c});
  }
  c.results["rows"] = rows;
  c.results["c_max"] = num(rep.c_max);
  if (!(rep.c_max <= cap)) c.violation("lowerbound", "w(tau)^2 / lambda0 exceeds the cap", {{"c_max", num(rep.c_max)}});
  c.csv = std::move(csv);
}

}  // namespace

Report run(const RunConfig& cfg) {
  const auto start = Clock::now();
  Context c(cfg.doc, static_cast<unsigned>(cfg.doc.at("threads").get<long long>()));
  const std::string& cmd = cfg.command;
  if (cmd == "classify") run_classify(c);
  else if (cmd == "koike-scan") run_koike_scan(c);
  else if (cmd == "matrix-check") run_matrix_check(c);
  else if (cmd == "sos-verify") run_sos_verify(c);
  else if (cmd == "parametrix") run_parametrix(c);
  else if (cmd == "sharpness") run_sharpness(c);
  else if (cmd == "inequality-suite") run_inequality_suite(c);
  else if (cmd == "lowerbound") run_lowerbound(c);
  else throw ConfigError("key 'command': unknown command '" + cmd + "'");

  Report rep;
  rep.body = {{"schema", schema_version}, {"tool_version", tool_version}, {"command", cmd},
              {"config", cfg.doc}, {"results", std::move(c.results)}, {"violations", std::move(c.violations)}};
  rep.body["determinism_hash"] = determinism_hash(rep.body);
  rep.timing = {{"wall_seconds", std::chrono::duration<double>(Clock::now() - start).count()}};
  rep.csv = std::move(c.csv);
  return rep;
}

int execute(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    const auto rep = run(cfg);
    const Json& o = cfg.doc.at("output");
    const std::string json_path = o.at("json"), csv_path = o.at("csv");
    if (!json_path.empty()) {
      std::ofstream f(json_path, std::ios::binary);
      if (!f) throw IoError("cannot write " + json_path);
      f << rep.document().dump(2) << '\n';
    }
    if (!csv_path.empty()) {
      if (!rep.csv) throw ConfigError("key 'output.csv': command " + cfg.command + " has no series");
      emit_csv(*rep.csv, csv_path);
    }
    out << cfg.command << ": " << rep.violations() << " violation(s), hash "
        << rep.body.at("determinism_hash").get<std::string>() << '\n';
    for (const auto& v : rep.body.at("violations"))
      out << "  " << v.at("check").get<std::string>() << ": " << v.at("message").get<std::string>() << '\n';
    return rep.exit_code();
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace degenlab::cli
