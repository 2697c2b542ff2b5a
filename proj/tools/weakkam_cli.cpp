#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "weakkam/cohomology.hpp"
#include "weakkam/cost_system.hpp"
#include "weakkam/critical.hpp"
#include "weakkam/io.hpp"
#include "weakkam/lagrangian.hpp"
#include "weakkam/lax_oleinik.hpp"
#include "weakkam/subsolution.hpp"

using weakkam::cost_system;
using weakkam::format_number;
using weakkam::io_error;

namespace {

// Flag beats WEAKKAM_TOL beats the per-command default.
double resolve_tol(const CLI::Option* opt, double flag_value, double fallback) {
  if (opt->count() > 0) return flag_value;
  if (const char* env = std::getenv("WEAKKAM_TOL")) {
    char* end = nullptr;
    const double v = std::strtod(env, &end);
    if (end == env || *end != '\0' || !(v > 0))
      throw io_error("WEAKKAM_TOL must be a positive number");
    return v;
  }
  return fallback;
}

void with_output(const std::string& path, const std::function<void(std::ostream&)>& fn) {
  if (path.empty()) {
    fn(std::cout);
    return;
  }
  std::ofstream out(path);
  if (!out) throw io_error("cannot write " + path);
  fn(out);
}

// Report JSON is assembled by hand so every number passes through
// format_number; nlohmann would print full precision.
std::string json_ints(const std::vector<int>& v) {
  std::ostringstream s;
  s << "[";
  for (std::size_t i = 0; i < v.size(); ++i) s << (i ? ", " : "") << v[i];
  s << "]";
  return s.str();
}

std::string json_pairs(const std::vector<std::pair<int, int>>& v) {
  std::ostringstream s;
  s << "[";
  for (std::size_t i = 0; i < v.size(); ++i)
    s << (i ? ", " : "") << "[" << v[i].first << ", " << v[i].second << "]";
  s << "]";
  return s.str();
}

std::string json_numbers(const std::vector<double>& v) {
  std::ostringstream s;
  s << "[";
  for (std::size_t i = 0; i < v.size(); ++i) s << (i ? ", " : "") << format_number(v[i]);
  s << "]";
  return s.str();
}

const char* json_bool(bool b) { return b ? "true" : "false"; }

std::vector<double> read_values_csv(const std::string& path, int n) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw io_error(path + ": empty file");
  std::vector<double> u(n);
  std::vector<char> seen(n, 0);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw io_error(path + ": expected state,value rows");
    int state = 0;
    double value = 0;
    try {
      state = std::stoi(line.substr(0, comma));
      value = std::stod(line.substr(comma + 1));
    } catch (const std::exception&) {
      throw io_error(path + ": bad row \"" + line + "\"");
    }
    if (state < 0 || state >= n) throw io_error(path + ": state " + std::to_string(state) +
                                                " out of range for n = " + std::to_string(n));
    u[state] = value;
    seen[state] = 1;
  }
  for (int i = 0; i < n; ++i)
    if (!seen[i]) throw io_error(path + ": no value for state " + std::to_string(i));
  return u;
}

std::string audit_json(const weakkam::strictness_audit<double>& a) {
  std::ostringstream s;
  s << "{\"min_slack_off_aubry\": ";
  if (a.min_slack_off_aubry)
    s << format_number(*a.min_slack_off_aubry);
  else
    s << "null";
  s << ", \"max_abs_slack_on_aubry\": " << format_number(a.max_abs_slack_on_aubry)
    << ", \"pass\": " << json_bool(a.pass) << "}";
  return s.str();
}

struct property_row {
  std::string name;
  bool pass = false;
  std::string detail;  // empty unless failing
};

int emit_properties(const std::vector<property_row>& rows) {
  bool all = true;
  std::cout << "{\"properties\": [";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    all = all && rows[i].pass;
    std::cout << (i ? ", " : "") << "{\"name\": \"" << rows[i].name
              << "\", \"pass\": " << json_bool(rows[i].pass);
    if (!rows[i].detail.empty()) std::cout << ", \"detail\": \"" << rows[i].detail << "\"";
    std::cout << "}";
  }
  std::cout << "], \"pass\": " << json_bool(all) << "}\n";
  return all ? 0 : 1;
}

int run_audit(const cost_system<double>& sys, double tol, int random_count, unsigned seed) {
  std::vector<property_row> rows;
  auto add = [&](const std::string& name, bool pass, std::string detail = "") {
    rows.push_back({name, pass, pass ? "" : std::move(detail)});
  };

  const auto report = weakkam::validate(sys);
  add("validate", report.failures.empty(),
      report.failures.empty() ? "" : report.failures.front());

  const auto karp = weakkam::critical_value(sys, weakkam::critical_mode::karp, tol);
  const auto bis = weakkam::critical_value(sys, weakkam::critical_mode::bisect, tol);
  bool agree = std::abs(karp.alpha - bis.alpha) <= tol;
  if (sys.n() <= 10) {
    const auto brute = weakkam::critical_value(sys, weakkam::critical_mode::brute, tol);
    agree = agree && std::abs(karp.alpha - brute.alpha) <= tol;
  }
  add("critical_agreement", agree, "methods disagree beyond tol");

  const auto wm = weakkam::weak_kam(sys, weakkam::kam_sign::minus, tol);
  const auto wp = weakkam::weak_kam(sys, weakkam::kam_sign::plus, tol);
  const auto tm = weakkam::lax_minus(sys, wm.u);
  const auto tp = weakkam::lax_plus(sys, wp.u);
  double rm = 0, rp = 0;
  for (int x = 0; x < sys.n(); ++x) {
    rm = std::max(rm, std::abs(wm.u[x] - tm[x] - karp.alpha));
    rp = std::max(rp, std::abs(wp.u[x] - tp[x] + karp.alpha));
  }
  add("weak_kam_fixed_points", rm <= tol && rp <= tol,
      "residuals " + format_number(rm) + ", " + format_number(rp));

  double norm_m = -1e300, norm_p = 1e300;
  for (int a : wm.aubry.nodes) {
    norm_m = std::max(norm_m, wm.u[a]);
    norm_p = std::min(norm_p, wp.u[a]);
  }
  add("weak_kam_normalization", std::abs(norm_m) <= tol && std::abs(norm_p) <= tol,
      "extrema over Aubry nodes off zero");

  const auto A = weakkam::aubry(sys, tol);
  bool certs = !A.certificates.empty() || A.pairs.empty();
  for (const auto& cyc : A.certificates) {
    double total = 0;
    for (std::size_t i = 0; i < cyc.size(); ++i)
      total = total + sys.cost(cyc[i], cyc[(i + 1) % cyc.size()]) + karp.alpha;
    certs = certs && std::abs(total) <= tol * double(cyc.size() + 1);
  }
  add("aubry_certificates", certs, "a certificate cycle is not tight");

  const auto st = weakkam::strict_subsolution(sys, tol);
  const auto Ast = weakkam::aubry_of(sys, st.u, st.alpha, tol);
  add("strict_subsolution",
      st.audit.pass && Ast.nodes == A.nodes && Ast.pairs == A.pairs,
      "constructed subsolution is not strict or shifts the Aubry set");

  const auto pinned = weakkam::pin_to(sys, wm.u, tol);
  add("pin", pinned.audit.pass, "pinned value function fails the strictness audit");

  const auto reg = weakkam::regularize(sys, st.u, st.alpha, tol);
  const auto Areg = weakkam::aubry_of(sys, reg, st.alpha, tol);
  add("regularize",
      weakkam::is_subsolution(sys, reg, st.alpha, tol) && Areg.nodes == A.nodes &&
          Areg.pairs == A.pairs,
      "regularized function lost domination or Aubry data");

  std::vector<double> mid(sys.n());
  const auto env = weakkam::lax_minus(sys, st.u);
  for (int x = 0; x < sys.n(); ++x) mid[x] = st.u[x] + 0.5 * (env[x] + st.alpha - st.u[x]);
  for (int a : Ast.nodes) mid[a] = st.u[a];
  const auto sw = weakkam::verify_sandwich(sys, st.u, mid, st.alpha, tol);
  add("sandwich", sw.preconditions_ok && sw.pass,
      sw.preconditions_ok ? "sandwich assertions failed" : "sandwich preconditions failed");

  if (random_count > 0) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> lam(0.1, 1.0), shift(-2.0, 2.0);
    bool ok = true;
    for (int it = 0; it < random_count && ok; ++it) {
      const double l = lam(rng), c = shift(rng);
      std::vector<double> u(sys.n());
      for (int x = 0; x < sys.n(); ++x) u[x] = l * st.u[x] + (1.0 - l) * wm.u[x] + c;
      ok = ok && weakkam::is_subsolution(sys, u, st.alpha, tol);
      ok = ok && weakkam::audit_strictness(sys, u, st.alpha, A.pairs, tol).pass;
      const auto Au = weakkam::aubry_of(sys, u, st.alpha, tol);
      ok = ok && Au.nodes == A.nodes && Au.pairs == A.pairs;
    }
    add("random_mixtures", ok, "a random strict mixture failed the suite");
  }

  return emit_properties(rows);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"weak KAM solver toolkit for finite cost systems"};
  app.require_subcommand(1);

  std::string input, output, values_path, sign = "minus", mode = "karp";
  double tol = 1e-9;
  bool want_audit = false;
  int samples = 64, steps = 25, copies = 3, random_count = 0, grid_override = 0;
  unsigned seed = 1;
  double h_min = 0, h_max = 0;
  std::vector<double> h_class;

  auto add_common = [&](CLI::App* sc, bool with_output_flag = true) {
    sc->add_option("--input", input, "input file (JSON)")->required();
    if (with_output_flag) sc->add_option("--output", output, "write the main artifact here");
    return sc->add_option("--tol", tol, "comparison tolerance");
  };

  auto* sc_critical = app.add_subcommand("critical", "critical value and a minimizing cycle");
  auto* opt_tol_critical = add_common(sc_critical);
  sc_critical->add_option("--mode", mode, "karp, bisect, or brute")
      ->check(CLI::IsMember({"karp", "bisect", "brute"}));

  auto* sc_weakkam = app.add_subcommand("weak-kam", "weak KAM solution values as CSV");
  auto* opt_tol_weakkam = add_common(sc_weakkam);
  sc_weakkam->add_option("--sign", sign, "minus or plus")
      ->check(CLI::IsMember({"minus", "plus"}));

  auto* sc_aubry = app.add_subcommand("aubry", "Aubry nodes and pairs");
  auto* opt_tol_aubry = add_common(sc_aubry);

  auto* sc_strict = app.add_subcommand("strict", "strict critical subsolution values");
  auto* opt_tol_strict = add_common(sc_strict);
  sc_strict->add_flag("--audit", want_audit, "append the strictness audit JSON");

  auto* sc_pin = app.add_subcommand("pin", "pin a subsolution to strictness off its Aubry set");
  auto* opt_tol_pin = add_common(sc_pin);
  sc_pin->add_option("--values", values_path, "value CSV to pin (default: weak KAM minus)");
  sc_pin->add_flag("--audit", want_audit, "append the strictness audit JSON");

  auto* sc_reg = app.add_subcommand("regularize", "forward then backward Lax-Oleinik round");
  auto* opt_tol_reg = add_common(sc_reg);
  sc_reg->add_option("--values", values_path,
                     "value CSV to regularize (default: the strict subsolution)");

  auto* sc_lag = app.add_subcommand("lagrangian-cost", "discretize a Lagrangian to a graph file");
  add_common(sc_lag);
  sc_lag->add_option("--grid", grid_override, "override the grid size from the config");

  auto* sc_twist = app.add_subcommand("twist-audit", "Legendre injectivity audit");
  auto* opt_tol_twist = add_common(sc_twist, false);
  sc_twist->add_option("--samples", samples, "sample count")->check(CLI::PositiveNumber);

  auto* sc_star = app.add_subcommand("aubry-star", "lifted Aubry set of a Lagrangian grid");
  auto* opt_tol_star = add_common(sc_star, false);

  auto* sc_sweep = app.add_subcommand("alpha-sweep", "alpha over a line of cohomology classes");
  auto* opt_tol_sweep = add_common(sc_sweep);
  sc_sweep->add_option("--h-min", h_min, "first class coordinate")->required();
  sc_sweep->add_option("--h-max", h_max, "last class coordinate")->required();
  sc_sweep->add_option("--steps", steps, "sample count")->check(CLI::Range(1, 100000));

  auto* sc_eq = app.add_subcommand("equivariant", "equivariant solution on a finite cover");
  // --h would clash with the default -h help alias, so this subcommand only
  // answers to --help.
  sc_eq->set_help_flag("--help", "print help");
  auto* opt_tol_eq = add_common(sc_eq);
  sc_eq->add_option("--h", h_class, "cohomology class, one value per winding dimension")
      ->required()
      ->delimiter(',');
  sc_eq->add_option("--copies", copies, "cover window size K (odd)");

  auto* sc_audit = app.add_subcommand("audit", "run the invariant suite on a graph file");
  auto* opt_tol_audit = add_common(sc_audit, false);
  sc_audit->add_option("--random", random_count, "extra randomized subsolution instances");
  sc_audit->add_option("--seed", seed, "seed for the randomized instances");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (app.got_subcommand(sc_critical)) {
      const auto sys = weakkam::load_system(input);
      const double t = resolve_tol(opt_tol_critical, tol, 1e-9);
      auto m = weakkam::critical_mode::karp;
      if (mode == "bisect") m = weakkam::critical_mode::bisect;
      if (mode == "brute") m = weakkam::critical_mode::brute;
      const auto crit = weakkam::critical_value(sys, m, t);
      with_output(output, [&](std::ostream& out) {
        out << "{\"alpha\": " << format_number(crit.alpha)
            << ", \"witness\": " << json_ints(crit.witness) << "}\n";
      });
      return 0;
    }

    if (app.got_subcommand(sc_weakkam)) {
      const auto sys = weakkam::load_system(input);
      const double t = resolve_tol(opt_tol_weakkam, tol, 1e-9);
      const auto w = weakkam::weak_kam(
          sys, sign == "plus" ? weakkam::kam_sign::plus : weakkam::kam_sign::minus, t);
      with_output(output, [&](std::ostream& out) { weakkam::write_values_csv(out, w.u); });
      return 0;
    }

    if (app.got_subcommand(sc_aubry)) {
      const auto sys = weakkam::load_system(input);
      const double t = resolve_tol(opt_tol_aubry, tol, 1e-9);
      const auto A = weakkam::aubry(sys, t);
      with_output(output, [&](std::ostream& out) {
        out << "{\"nodes\": " << json_ints(A.nodes) << ", \"pairs\": " << json_pairs(A.pairs)
            << "}\n";
      });
      return 0;
    }

    if (app.got_subcommand(sc_strict)) {
      const auto sys = weakkam::load_system(input);
      const double t = resolve_tol(opt_tol_strict, tol, 1e-9);
      const auto st = weakkam::strict_subsolution(sys, t);
      with_output(output, [&](std::ostream& out) { weakkam::write_values_csv(out, st.u); });
      if (want_audit) {
        std::cout << audit_json(st.audit) << "\n";
        return st.audit.pass ? 0 : 1;
      }
      return 0;
    }

    if (app.got_subcommand(sc_pin)) {
      const auto sys = weakkam::load_system(input);
      const double t = resolve_tol(opt_tol_pin, tol, 1e-9);
      const auto u = values_path.empty()
                         ? weakkam::weak_kam(sys, weakkam::kam_sign::minus, t).u
                         : read_values_csv(values_path, sys.n());
      const auto pinned = weakkam::pin_to(sys, u, t);
      with_output(output, [&](std::ostream& out) { weakkam::write_values_csv(out, pinned.u); });
      if (want_audit) {
        std::cout << audit_json(pinned.audit) << "\n";
        return pinned.audit.pass ? 0 : 1;
      }
      return 0;
    }

    if (app.got_subcommand(sc_reg)) {
      const auto sys = weakkam::load_system(input);
      const double t = resolve_tol(opt_tol_reg, tol, 1e-9);
      const auto st = weakkam::strict_subsolution(sys, t);
      const auto u = values_path.empty() ? st.u : read_values_csv(values_path, sys.n());
      const auto reg = weakkam::regularize(sys, u, st.alpha, t);
      with_output(output, [&](std::ostream& out) { weakkam::write_values_csv(out, reg); });
      return 0;
    }

    if (app.got_subcommand(sc_lag)) {
      const auto cfg = weakkam::load_lagrangian_config(input);
      const int N = grid_override > 0 ? grid_override : cfg.grid;
      const auto sys = weakkam::discretize(cfg.spec, N);
      with_output(output, [&](std::ostream& out) { weakkam::save_system(sys, out); });
      return 0;
    }

    if (app.got_subcommand(sc_twist)) {
      const auto cfg = weakkam::load_lagrangian_config(input);
      const double t = resolve_tol(opt_tol_twist, tol, 1e-9);
      const auto rep = weakkam::twist_audit(cfg.spec, samples, t);
      std::cout << "{\"samples\": " << rep.samples << ", \"skipped\": " << rep.skipped
                << ", \"min_left_gap\": " << format_number(rep.min_left_gap)
                << ", \"min_right_gap\": " << format_number(rep.min_right_gap)
                << ", \"tol\": " << format_number(rep.tol)
                << ", \"pass\": " << json_bool(rep.pass) << "}\n";
      return rep.pass ? 0 : 1;
    }

    if (app.got_subcommand(sc_star)) {
      const auto cfg = weakkam::load_lagrangian_config(input);
      const double t = resolve_tol(opt_tol_star, tol, 1e-6);
      const auto star = weakkam::aubry_star(cfg.spec, cfg.grid, t);
      std::cout << "{\"nodes\": " << json_ints(star.aubry.nodes)
                << ", \"pairs\": " << json_pairs(star.pairs) << ", \"points\": [";
      for (std::size_t i = 0; i < star.points.size(); ++i)
        std::cout << (i ? ", " : "") << "{\"base\": " << format_number(star.points[i].base)
                  << ", \"covector\": " << format_number(star.points[i].covector) << "}";
      std::cout << "], \"ambiguous_pairs\": " << json_pairs(star.ambiguous_pairs)
                << ", \"degree_violations\": " << json_ints(star.degree_violations)
                << ", \"graph_property\": " << json_bool(star.graph_property) << "}\n";
      return 0;
    }

    if (app.got_subcommand(sc_sweep)) {
      const auto sys = weakkam::load_system(input);
      const double t = resolve_tol(opt_tol_sweep, tol, 1e-9);
      if (sys.winding_dim() < 1)
        throw weakkam::validation_error("alpha-sweep needs winding data (winding_dim >= 1)");
      std::vector<std::vector<double>> grid;
      for (int i = 0; i < steps; ++i) {
        std::vector<double> h(sys.winding_dim(), 0.0);
        h[0] = steps == 1 ? h_min : h_min + (h_max - h_min) * double(i) / double(steps - 1);
        grid.push_back(std::move(h));
      }
      const auto curve = weakkam::alpha_sweep(sys, std::move(grid), weakkam::critical_mode::karp, t);
      with_output(output, [&](std::ostream& out) {
        out << "h,alpha\n";
        for (const auto& [h, a] : curve.samples) {
          for (std::size_t k = 0; k < h.size(); ++k) out << (k ? ":" : "") << format_number(h[k]);
          out << "," << format_number(a) << "\n";
        }
      });
      const bool pass = curve.convexity_violations.empty();
      std::cout << "{\"convexity_violations\": " << json_ints(curve.convexity_violations)
                << ", \"minimizer\": " << json_numbers(curve.minimizer)
                << ", \"min_alpha\": " << format_number(curve.min_alpha)
                << ", \"superlinear_c\": " << json_numbers(curve.superlinear_c)
                << ", \"pass\": " << json_bool(pass) << "}\n";
      return pass ? 0 : 1;
    }

    if (app.got_subcommand(sc_eq)) {
      const auto sys = weakkam::load_system(input);
      const double t = resolve_tol(opt_tol_eq, tol, 1e-9);
      const auto eq = weakkam::equivariant_solution(sys, h_class, copies, t);
      with_output(output,
                  [&](std::ostream& out) { weakkam::write_lifted_csv(out, eq.cover, eq.u_lifted); });
      std::cout << "{\"alpha\": " << format_number(eq.alpha) << ", \"copies\": " << copies
                << ", \"excluded_states\": " << eq.excluded_states
                << ", \"generator_identity_ok\": " << json_bool(eq.generator_identity_ok)
                << ", \"max_fixed_point_residual\": " << format_number(eq.max_fixed_point_residual)
                << ", \"pass\": " << json_bool(eq.pass) << "}\n";
      return eq.pass ? 0 : 1;
    }

    if (app.got_subcommand(sc_audit)) {
      const auto sys = weakkam::load_system(input);
      const double t = resolve_tol(opt_tol_audit, tol, 1e-9);
      return run_audit(sys, t, random_count, seed);
    }
  } catch (const io_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
