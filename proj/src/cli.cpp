#include "gammaflag/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "gammaflag/flatsections.hpp"
#include "gammaflag/gammaclass.hpp"
#include "gammaflag/lie.hpp"
#include "gammaflag/mirror.hpp"
#include "gammaflag/qh.hpp"
#include "gammaflag/schubert.hpp"

namespace gammaflag::cli {

using nlohmann::json;

namespace {

struct RunConfig {
  std::string space;
  std::string ip;
  std::vector<double> q;
  std::vector<double> hbar_grid;
  std::vector<double> s_grid;
  std::vector<std::string> h;  // complex entries "re" or "re+imj"
  double hbar = 1.0;
  int order = 60;
  double tol = -1;  // command default when negative
  unsigned seed = 12345;
  std::string plot_dir;
  std::string format = "json";
};

std::vector<int> parse_ip(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ','))
    if (!tok.empty()) out.push_back(std::stoi(tok));
  return out;
}

cplx parse_cplx(const std::string& s) {
  std::string t = s;
  if (!t.empty() && (t.back() == 'j' || t.back() == 'i')) {
    // split at the last sign that is not an exponent sign
    for (std::size_t k = t.size() - 1; k > 0; --k)
      if ((t[k] == '+' || t[k] == '-') && t[k - 1] != 'e' && t[k - 1] != 'E') {
        double re = std::stod(t.substr(0, k));
        std::string im = t.substr(k, t.size() - k - 1);
        if (im == "+" || im == "-") im += "1";
        return {re, std::stod(im)};
      }
    std::string im = t.substr(0, t.size() - 1);
    return {0.0, im.empty() || im == "+" ? 1.0 : im == "-" ? -1.0 : std::stod(im)};
  }
  return {std::stod(t), 0.0};
}

json cjson(cplx z) { return json::array({z.real(), z.imag()}); }

struct Context {
  lie::FlagSpace X;
  schubert::Schubert S;
  qh::QConnection Q;
  explicit Context(lie::FlagSpace X_) : X(std::move(X_)), S(X), Q(qh::build_connection(S)) {}
};

lie::FlagSpace resolve(const RunConfig& c) {
  if (c.space.empty()) throw CLI::ValidationError("space", "a space is required");
  return lie::make_space(c.space, parse_ip(c.ip));
}

std::vector<double> q_or_ones(const RunConfig& c, const lie::FlagSpace& X) {
  if (c.q.empty()) return std::vector<double>(X.ndiv(), 1.0);
  if (c.q.size() == 1 && X.ndiv() > 1) return std::vector<double>(X.ndiv(), c.q[0]);
  if ((int)c.q.size() != X.ndiv())
    throw std::invalid_argument("expected " + std::to_string(X.ndiv()) + " values for --q");
  for (double v : c.q)
    if (!(v > 0)) throw std::invalid_argument("--q values must be positive");
  return c.q;
}

std::vector<cplx> h_or_zero(const RunConfig& c, const lie::FlagSpace& X) {
  std::vector<cplx> h(X.rank(), 0.0);
  if (c.h.empty()) return h;
  if (c.h.size() == 1) {
    for (auto& v : h) v = parse_cplx(c.h[0]);
    return h;
  }
  if ((int)c.h.size() != X.rank())
    throw std::invalid_argument("expected " + std::to_string(X.rank()) + " values for --h");
  for (int j = 0; j < X.rank(); ++j) h[j] = parse_cplx(c.h[j]);
  return h;
}

void emit_plot(const RunConfig& c, const std::string& name,
               const std::vector<std::pair<double, double>>& pts) {
  if (c.plot_dir.empty()) return;
  std::filesystem::create_directories(c.plot_dir);
  std::ofstream f(std::filesystem::path(c.plot_dir) / name);
  f.precision(17);
  for (auto& [x, y] : pts) f << x << ' ' << y << '\n';
}

double tol_or(const RunConfig& c, double d) { return c.tol > 0 ? c.tol : d; }

// ---------------------------------------------------------------- commands

json cmd_describe(const RunConfig& c, bool& ok) {
  auto X = resolve(c);
  json j = lie::to_json(X);
  j["command"] = "describe";
  ok = true;
  return j;
}

json cmd_spectra(const RunConfig& c, bool& ok) {
  Context ctx(resolve(c));
  auto q = q_or_ones(c, ctx.X);
  auto rep = qh::conjecture_O_certify(ctx.Q, q, tol_or(c, 1e-8));
  json j = rep.to_json();
  j["command"] = "spectra";
  ok = rep.status == "certified";
  return j;
}

json cmd_positive_point(const RunConfig& c, bool& ok) {
  Context ctx(resolve(c));
  auto q = q_or_ones(c, ctx.X);
  auto p = qh::schubert_positive_point(ctx.Q, q);
  double tol = tol_or(c, 1e-9);
  bool positive = true;
  for (double v : p.lambda) positive = positive && v > 0;
  double diff = std::abs(p.lambda_c1 - p.E_O);
  ok = positive && diff < tol;
  return {{"command", "positive-point"}, {"space", ctx.X.label}, {"q", q},
          {"lambda", p.lambda},          {"N", p.N},            {"E_O", p.E_O},
          {"lambda_c1", p.lambda_c1},    {"abs_diff", diff},    {"hom_residual", p.hom_residual},
          {"all_positive", positive},    {"passes", ok}};
}

json cmd_mirror(const RunConfig& c, bool& ok) {
  Context ctx(resolve(c));
  mirror::MirrorSpace M(ctx.X);
  auto F = mirror::chart_potential(M, M.pinned);
  auto q = q_or_ones(c, ctx.X);
  auto cp = mirror::critical_point(F, q);
  auto rep = qh::conjecture_O_certify(ctx.Q, q);
  double diff = std::abs(cp.f - rep.E_O);
  json vals = json::array();
  std::vector<std::pair<double, double>> plot;
  mirror::IBOptions opt;
  opt.seed = c.seed;
  std::vector<cplx> h = h_or_zero(c, ctx.X);
  for (double hb : c.hbar_grid) {
    auto r = mirror::ib_integral(M, F, hb, h, q, 0, opt);
    vals.push_back({{"hbar", hb}, {"value", cjson(r.value())}, {"log_scale", r.log_scale},
                    {"scaled", cjson(r.value_scaled)}, {"err", r.error}, {"status", r.status}});
    plot.push_back({hb, std::log(std::abs(r.value_scaled)) + r.log_scale});
  }
  emit_plot(c, "mirror_log_ib.dat", plot);
  ok = diff < tol_or(c, 1e-8);
  json P = json::array();
  for (const auto& p : F.P) P.push_back(p.str());
  return {{"command", "mirror"},         {"space", ctx.X.label},
          {"t", q},                      {"word", lie::word_string(M.pinned)},
          {"P", P},                      {"positive_coefficients", F.positive},
          {"a_star", cp.a},              {"f_star", cp.f},
          {"E_O", rep.E_O},              {"abs_diff", diff},
          {"hessian_det", cp.hessian.determinant()},
          {"integral_values", vals},     {"passes", ok}};
}

json cmd_integrals(const RunConfig& c, bool& ok) {
  Context ctx(resolve(c));
  mirror::MirrorSpace M(ctx.X);
  auto F = mirror::chart_potential(M, M.pinned);
  auto q = q_or_ones(c, ctx.X);
  auto h = h_or_zero(c, ctx.X);
  auto G = gammaclass::gamma_class(ctx.S);
  auto Mi = flat::mir_inverse_on_c1_span(ctx.Q);
  double tol = tol_or(c, 1e-6);
  std::vector<double> grid = c.hbar_grid.empty() ? std::vector<double>{c.hbar} : c.hbar_grid;
  std::vector<cplx> qc(q.begin(), q.end());
  mirror::IBOptions opt;
  opt.seed = c.seed;
  flat::IAOptions iopt;
  iopt.order = c.order;
  json rows = json::array();
  ok = true;
  double worst = 0;
  for (double hb : grid) {
    std::vector<cplx> one(ctx.S.n(), 0.0);
    one[0] = 1;
    cplx ia = flat::ia_integral(ctx.Q, G, hb, h, qc, one, iopt);
    cplx ib = mirror::ib_integral(M, F, hb, h, q, 0, opt).value();
    worst = std::max(worst, std::abs(ia - ib));
    rows.push_back({{"hbar", hb}, {"y", "1"}, {"IA", cjson(ia)}, {"IB", cjson(ib)},
                    {"abs_diff", std::abs(ia - ib)}});
    if (Mi.complete) {
      for (int v = 0; v < ctx.S.n(); ++v) {
        std::vector<cplx> y(ctx.S.n());
        for (int w = 0; w < ctx.S.n(); ++w) y[w] = ctx.S.dual_coeffs(v)[w].eval(h);
        cplx a = flat::ia_integral(ctx.Q, G, hb, h, qc, y, iopt);
        cplx b = mirror::ib_dual(M, F, Mi, v, hb, h, q, opt);
        worst = std::max(worst, std::abs(a - b));
        rows.push_back({{"hbar", hb},
                        {"y", "sigma^" + lie::word_string(ctx.X.W.words[ctx.X.P.WP[v]])},
                        {"IA", cjson(a)},
                        {"IB", cjson(b)},
                        {"abs_diff", std::abs(a - b)}});
      }
    }
  }
  ok = worst < tol;
  json hj = json::array();
  for (auto z : h) hj.push_back(cjson(z));
  return {{"command", "integrals"}, {"space", ctx.X.label}, {"q", q},
          {"h", hj},                {"mir_inverse", Mi.status}, {"rows", rows},
          {"max_abs_diff", worst},  {"tol", tol},           {"passes", ok}};
}

json cmd_gamma(const RunConfig& c, bool& ok) {
  Context ctx(resolve(c));
  auto G = gammaclass::gamma_class(ctx.S);
  std::vector<double> grid = c.s_grid;
  if (grid.empty())
    for (double s = 10; s <= 60; s += 5) grid.push_back(s);
  flat::JOptions jo;
  jo.order = c.order;
  auto lim = flat::gamma_limit(ctx.Q, grid, jo);
  for (int v = 0; v < ctx.S.n(); ++v) {
    std::vector<std::pair<double, double>> pts;
    for (std::size_t k = 0; k < grid.size(); ++k) pts.push_back({grid[k], lim.ratios[k][v]});
    emit_plot(c, "gamma_ratio_" + std::to_string(v) + ".dat", pts);
  }
  ok = lim.status == "converged" && lim.max_distance < tol_or(c, 1e-3);
  json j = lim.to_json();
  j["command"] = "gamma";
  j["space"] = ctx.X.label;
  j["gamma_class"] = G.coeffs;
  j["passes"] = ok;
  return j;
}

json cmd_asymptotics(const RunConfig& c, bool& ok) {
  Context ctx(resolve(c));
  mirror::MirrorSpace M(ctx.X);
  auto F = mirror::chart_potential(M, M.pinned);
  auto Mi = flat::mir_inverse_on_c1_span(ctx.Q);
  if (!Mi.complete)
    throw mirror::UnsupportedSpace("asymptotics needs cohomology generated by c1; Mir inverse is " +
                                   Mi.status);
  std::vector<double> q(ctx.X.ndiv(), 1.0);
  auto E = qh::conjecture_O_certify(ctx.Q, q).E_O;
  auto grid = c.hbar_grid;
  if (grid.empty()) grid = {0.02, 0.03, 0.05, 0.07, 0.1, 0.15, 0.2};
  auto s = mirror::gamma_section(M, F, Mi, q);
  auto rep = flat::asymptotic_class_test(ctx.Q, s, E, grid);
  json j = {{"command", "asymptotics"}, {"space", ctx.X.label}, {"E", E}, {"section", rep.to_json()}};
  ok = rep.passes;
  std::vector<std::pair<double, double>> pts;
  for (std::size_t k = 0; k < rep.grid.size(); ++k) pts.push_back({std::log(rep.grid[k]), rep.log_norms[k]});
  emit_plot(c, "asymptotics_log_norm.dat", pts);
  if (F.ell <= 2) {
    auto t = mirror::torus_section(M, F, Mi, q);
    flat::FlatSection pert;
    pert.provenance = "integral";
    pert.eval = [&](double hb) {
      auto a = s.eval(hb), b = t.eval(hb);
      flat::ScaledVec r;
      r.log_scale = std::max(a.log_scale, b.log_scale);
      r.v = a.v * std::exp(a.log_scale - r.log_scale) + 1e-6 * b.v * std::exp(b.log_scale - r.log_scale);
      return r;
    };
    auto prep = flat::asymptotic_class_test(ctx.Q, pert, E, grid);
    j["perturbed"] = prep.to_json();
    ok = ok && !prep.passes;
  }
  j["passes"] = ok;
  return j;
}

void print(const json& j, const RunConfig& c, std::ostream& out) {
  if (c.format == "csv") {
    out << "key,value\n";
    const json flat = j.flatten();
    for (auto& [k, v] : flat.items()) out << k << ',' << v.dump() << '\n';
  } else {
    out << j.dump(2) << '\n';
  }
}

// --config FILE holds key = value lines with the flag names as keys. Values
// given on the command line win over the file.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::vector<std::string> out, given;
  std::string path;
  for (std::size_t k = 0; k < args.size(); ++k) {
    const std::string& a = args[k];
    if (a == "--config") {
      if (k + 1 == args.size()) throw std::invalid_argument("--config needs a file");
      path = args[++k];
      continue;
    }
    if (a.rfind("--config=", 0) == 0) {
      path = a.substr(9);
      continue;
    }
    if (a.rfind("--", 0) == 0) given.push_back(a.substr(2, a.find('=') - 2));
    out.push_back(a);
  }
  if (path.empty()) return out;
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("cannot read " + path);
  for (const auto& item : CLI::ConfigINI().from_config(f)) {
    std::string key = item.name;
    std::replace(key.begin(), key.end(), '_', '-');
    if (key == "t") key = "q";
    if (std::find(given.begin(), given.end(), key) != given.end()) continue;
    if (key == "space" && !out.empty() && out.size() > 1 && out[1].rfind("-", 0) != 0) continue;
    std::string v;
    for (std::size_t i = 0; i < item.inputs.size(); ++i) v += (i ? "," : "") + item.inputs[i];
    out.push_back("--" + key + "=" + v);
  }
  return out;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"Gamma conjecture I toolkit for flag varieties"};
  app.require_subcommand(1);
  app.set_help_flag("--help", "print help");  // -h would clash with --h

  using Fn = json (*)(const RunConfig&, bool&);
  std::vector<std::pair<CLI::App*, Fn>> cmds;
  auto add = [&](const std::string& name, const std::string& help, Fn fn) {
    auto* sub = app.add_subcommand(name, help);
    sub->set_help_flag("--help", "print help");
    sub->add_option("space,--space", cfg.space, "P<n>, Gr<k><n>, Fl<n> or a type such as A3");
    sub->add_option("--ip", cfg.ip, "Levi simple roots, 1-based, comma separated")->expected(0, 1);
    sub->add_option("--q,--t", cfg.q, "q values (alpha_i(t) on the mirror side)")->delimiter(',');
    sub->add_option("--hbar", cfg.hbar, "hbar");
    sub->add_option("--hbar-grid", cfg.hbar_grid, "hbar grid")->delimiter(',');
    sub->add_option("--s-grid", cfg.s_grid, "s grid for the J-function")->delimiter(',');
    sub->add_option("--h", cfg.h, "equivariant parameter, one complex per simple root (1.5-0.2j)")
        ->delimiter(',');
    sub->add_option("--order", cfg.order, "series order")->check(CLI::PositiveNumber);
    sub->add_option("--tol", cfg.tol, "check tolerance")->check(CLI::PositiveNumber);
    sub->add_option("--seed", cfg.seed, "Monte Carlo seed");
    sub->add_option("--emit-plot-data", cfg.plot_dir, "directory for two-column data files");
    sub->add_option("--format", cfg.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    cmds.push_back({sub, fn});
  };
  add("describe", "roots, W^P, ell, c1 pairings, beta multiset", cmd_describe);
  add("spectra", "spectrum of c1* and the Conjecture O check", cmd_spectra);
  add("positive-point", "Schubert positive point", cmd_positive_point);
  add("mirror", "critical point of the mirror and I^B values", cmd_mirror);
  add("integrals", "I^A against I^B", cmd_integrals);
  add("gamma", "Gamma class and the J-function limit", cmd_gamma);
  add("asymptotics", "asymptotic class of the Gamma-hat flat section", cmd_asymptotics);

  std::vector<std::string> argv;
  try {
    argv = expand_config(args);
  } catch (const std::exception& e) {
    err << "config: " << e.what() << '\n';
    return 2;
  }
  std::vector<std::string> rev(argv.rbegin(), argv.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n';
    return 2;
  }
  for (auto& [sub, fn] : cmds) {
    if (!sub->parsed()) continue;
    try {
      bool ok = false;
      json j = fn(cfg, ok);
      print(j, cfg, out);
      return ok ? 0 : 1;
    } catch (const mirror::UnsupportedSpace& e) {
      err << "unsupported space: " << e.what() << '\n';
      print({{"command", sub->get_name()}, {"error", "unsupported_space"}, {"message", e.what()}}, cfg, out);
      return 2;
    } catch (const std::exception& e) {
      err << "error: " << e.what() << '\n';
      print({{"command", sub->get_name()}, {"error", "invalid_input"}, {"message", e.what()}}, cfg, out);
      return 2;
    }
  }
  return 2;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.push_back(argv[i]);
  return run_cli(args, out, err);
}

}  // namespace gammaflag::cli
