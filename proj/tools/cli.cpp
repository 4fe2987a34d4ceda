#include "cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "graphon_lab/boundary.hpp"
#include "graphon_lab/densities.hpp"
#include "graphon_lab/ensemble.hpp"
#include "graphon_lab/errors.hpp"
#include "graphon_lab/phase.hpp"
#include "graphon_lab/solver.hpp"
#include "graphon_lab/util.hpp"
#include "graphon_lab/verify.hpp"

namespace graphon_lab::cli {

namespace {

constexpr const char* kVersion = "0.1.0";

using nlohmann::json;

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string timestamp_utc() {
  auto now = std::chrono::system_clock::now();
  std::time_t tt = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&tt));
  return buf;
}

// Canonical config string for the provenance hash: verb plus sorted args.
std::string config_hash(const std::string& verb, const std::vector<std::string>& args) {
  std::vector<std::string> sorted = args;
  std::sort(sorted.begin(), sorted.end());
  std::string all = verb;
  for (const auto& a : sorted) all += " " + a;
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(all)));
  return buf;
}

json provenance(const std::string& verb, const std::vector<std::string>& args,
                std::uint64_t seed) {
  json p;
  p["tool"] = "graphon_lab";
  p["version"] = kVersion;
  p["verb"] = verb;
  p["config_hash"] = config_hash(verb, args);
  p["seed"] = seed;
  p["timestamp"] = timestamp_utc();
  return p;
}

void csv_provenance(std::ostream& os, const std::string& verb,
                    const std::vector<std::string>& args, std::uint64_t seed) {
  os << "# graphon_lab v" << kVersion << " verb=" << verb
     << " config_hash=" << config_hash(verb, args) << " seed=" << seed << "\n";
  os << "# timestamp=" << timestamp_utc() << "\n";
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw DomainError("cannot open output file: " + path);
  return os;
}

int env_threads() {
  const char* env = std::getenv("GRAPHON_LAB_THREADS");
  if (!env) return 0;
  return std::atoi(env);
}

// Values from --config JSON fill in flags the user did not pass.
template <typename T>
void config_fill(CLI::Option* opt, const json& cfg, const std::string& key, T& value) {
  if (opt != nullptr && opt->count() == 0 && cfg.contains(key)) value = cfg.at(key).get<T>();
}

json result_json(const solver::SolveResult& res) {
  json j;
  j["graphon"] = res.graphon.to_json();
  j["value"] = res.value;
  j["lambda1"] = res.lambda1;
  j["lambda2"] = res.lambda2;
  j["el_residual_sup"] = res.el_residual_sup;
  j["constraint_residuals"] = {{"edge", res.residual_edge}, {"triangle", res.residual_triangle}};
  j["converged"] = res.converged;
  j["start_index"] = res.start_index;
  j["on_boundary"] = res.on_boundary;
  j["outer_iterations"] = res.outer_iterations;
  return j;
}

std::string num(double x) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"graphon_lab: microcanonical entropy of the edge/triangle graph ensemble"};
  app.require_subcommand(1);

  std::string config_path;
  app.add_option("--config", config_path, "JSON config file; explicit flags win");

  // ---- boundary / region ----
  double step = 0.001;
  std::string out_path;
  auto* cmd_boundary = app.add_subcommand("boundary", "boundary and transition curves (long CSV)");
  cmd_boundary->add_option("--step", step, "e grid step");
  cmd_boundary->add_option("--out", out_path, "output CSV path")->required();

  auto* cmd_region = app.add_subcommand("region", "feasible region table (wide CSV)");
  cmd_region->add_option("--step", step, "e grid step");
  cmd_region->add_option("--out", out_path, "output CSV path")->required();

  // ---- solve ----
  double e_arg = std::nan(""), t_arg = std::nan("");
  solver::SolveConfig scfg;
  int threads = 0;
  auto* cmd_solve = app.add_subcommand("solve", "minimize the rate function at fixed (e,t)");
  auto* opt_e = cmd_solve->add_option("--e", e_arg, "edge density");
  auto* opt_t = cmd_solve->add_option("--t", t_arg, "triangle density");
  auto* opt_m = cmd_solve->add_option("--m", scfg.m, "grid size");
  auto* opt_starts = cmd_solve->add_option("--starts", scfg.starts, "multistart count");
  auto* opt_seed = cmd_solve->add_option("--seed", scfg.seed, "RNG seed");
  cmd_solve->add_option("--tol-c", scfg.tol_constraint, "constraint tolerance");
  cmd_solve->add_option("--tol-g", scfg.tol_gradient, "projected-gradient tolerance");
  cmd_solve->add_option("--threads", threads, "worker threads (0 = auto)");
  cmd_solve->add_option("--out", out_path, "result JSON path")->required();

  // ---- scan ----
  phase::GridSpec grid{0.05, 0.55, 11, 0.0, 0.16, 9};
  auto* cmd_scan = app.add_subcommand("scan", "entropy surface over an (e,t) grid");
  cmd_scan->add_option("--e-min", grid.e_min);
  cmd_scan->add_option("--e-max", grid.e_max);
  cmd_scan->add_option("--e-steps", grid.e_steps);
  cmd_scan->add_option("--t-min", grid.t_min);
  cmd_scan->add_option("--t-max", grid.t_max);
  cmd_scan->add_option("--t-steps", grid.t_steps);
  cmd_scan->add_option("--m", scfg.m);
  cmd_scan->add_option("--starts", scfg.starts);
  cmd_scan->add_option("--seed", scfg.seed);
  cmd_scan->add_option("--threads", threads);
  cmd_scan->add_option("--out", out_path, "CSV path (JSON sidecar written next to it)")->required();

  // ---- transitions ----
  std::string path_kind = "fixed-e";
  double path_value = 0.3, path_from = 0.001, path_to = 0.079;
  int path_steps = 40;
  double kappa = 20.0;
  auto* cmd_trans = app.add_subcommand("transitions", "flag loss-of-analyticity along a path");
  cmd_trans->add_option("--path", path_kind, "fixed-e | fixed-eps");
  cmd_trans->add_option("--value", path_value, "the fixed parameter");
  cmd_trans->add_option("--from", path_from, "path parameter start (t or e)");
  cmd_trans->add_option("--to", path_to, "path parameter end");
  cmd_trans->add_option("--steps", path_steps, "path points");
  cmd_trans->add_option("--kappa", kappa, "second-difference threshold multiplier");
  cmd_trans->add_option("--m", scfg.m);
  cmd_trans->add_option("--starts", scfg.starts);
  cmd_trans->add_option("--seed", scfg.seed);
  cmd_trans->add_option("--threads", threads);
  cmd_trans->add_option("--out", out_path, "flags CSV path")->required();
  std::string path_out;
  cmd_trans->add_option("--path-out", path_out, "optional CSV of solved path cells");

  // ---- dos ----
  int dos_n = 7;
  std::string dos_method = "exact";
  bool dos_force = false;
  int walkers = 1;
  ensemble::WLConfig wl;
  double win_e = -1.0, win_t = -1.0, win_delta = -1.0;
  auto* cmd_dos = app.add_subcommand("dos", "density of states over the (E,T) lattice");
  cmd_dos->add_option("--n", dos_n, "vertex count")->required();
  cmd_dos->add_option("--method", dos_method, "exact | wl");
  cmd_dos->add_flag("--force", dos_force, "allow exact enumeration at n=8");
  auto* opt_dseed = cmd_dos->add_option("--seed", wl.seed);
  cmd_dos->add_option("--sweeps", wl.max_sweeps, "Wang-Landau sweep budget");
  cmd_dos->add_option("--flatness", wl.flatness);
  cmd_dos->add_option("--lnf-final", wl.ln_f_final);
  cmd_dos->add_option("--walkers", walkers, "independent walkers to merge");
  cmd_dos->add_option("--window-e", win_e);
  cmd_dos->add_option("--window-t", win_t);
  cmd_dos->add_option("--window-delta", win_delta);
  cmd_dos->add_option("--threads", threads);
  cmd_dos->add_option("--out", out_path, "CSV path")->required();

  // ---- sample ----
  int sample_n = 30;
  double sample_e = 0.25, sample_t = 0.005, sample_delta = 0.02;
  ensemble::SampleConfig sampler;
  auto* cmd_sample = app.add_subcommand("sample", "graphs from a microcanonical window");
  cmd_sample->add_option("--n", sample_n)->required();
  cmd_sample->add_option("--e", sample_e)->required();
  cmd_sample->add_option("--t", sample_t)->required();
  cmd_sample->add_option("--delta", sample_delta);
  auto* opt_sseed = cmd_sample->add_option("--seed", sampler.seed);
  cmd_sample->add_option("--burnin", sampler.burnin_sweeps);
  cmd_sample->add_option("--thin", sampler.thin_sweeps);
  cmd_sample->add_option("--count", sampler.count);
  cmd_sample->add_option("--out", out_path, "JSON-lines path")->required();

  // ---- compare ----
  std::string file_a, file_b;
  auto* cmd_compare = app.add_subcommand("compare", "reduced-graphon distance of two graphon files");
  cmd_compare->add_option("--a", file_a)->required();
  cmd_compare->add_option("--b", file_b)->required();
  cmd_compare->add_option("--out", out_path, "optional JSON path (stdout otherwise)");

  // ---- verify ----
  std::vector<std::string> suites{"all"};
  auto* cmd_verify = app.add_subcommand("verify", "run the acceptance criteria");
  cmd_verify->add_option("--suite", suites, "all or suite names");
  cmd_verify->add_option("--threads", threads);

  std::vector<char*> argv_storage;
  std::vector<std::string> argv_strings = args;
  argv_storage.push_back(const_cast<char*>("graphon_lab"));
  for (auto& s : argv_strings) argv_storage.push_back(s.data());

  try {
    app.parse(static_cast<int>(argv_storage.size()), argv_storage.data());
  } catch (const CLI::ParseError& err) {
    if (err.get_exit_code() == 0) {  // --help
      std::cout << app.help() << std::endl;
      return 0;
    }
    std::cerr << "usage error: " << err.what() << "\n" << app.help() << std::endl;
    return 64;
  }

  json cfg = json::object();
  if (!config_path.empty()) {
    std::ifstream is(config_path);
    if (!is) {
      std::cerr << "cannot read config file: " << config_path << "\n";
      return 64;
    }
    is >> cfg;
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    const std::string verb = sub->get_name();
    if (threads == 0) threads = env_threads();
    threads = resolve_threads(threads);

    if (verb == "boundary" || verb == "region") {
      auto os = open_out(out_path);
      csv_provenance(os, verb, args, 0);
      if (verb == "boundary") phase::emit_boundary_curves(os, step);
      else phase::emit_region(os, step);
      return 0;
    }

    if (verb == "solve") {
      config_fill(opt_e, cfg, "e", e_arg);
      config_fill(opt_t, cfg, "t", t_arg);
      config_fill(opt_m, cfg, "m", scfg.m);
      config_fill(opt_starts, cfg, "starts", scfg.starts);
      config_fill(opt_seed, cfg, "seed", scfg.seed);
      if (std::isnan(e_arg) || std::isnan(t_arg)) {
        std::cerr << "solve: --e and --t are required (flags or config file)\n";
        return 64;
      }
      scfg.threads = threads;
      auto res = solver::minimize_rate(e_arg, t_arg, scfg);
      json j;
      j["provenance"] = provenance(verb, args, scfg.seed);
      j["e"] = e_arg;
      j["t"] = t_arg;
      j["result"] = result_json(res);
      auto os = open_out(out_path);
      os << j.dump(2) << "\n";
      return 0;
    }

    if (verb == "scan") {
      scfg.threads = 1;  // parallelism across cells
      auto table = phase::scan(grid, scfg, threads);
      auto os = open_out(out_path);
      csv_provenance(os, verb, args, scfg.seed);
      os << "e,t,s,branch,el_residual,converged\n";
      for (const auto& p : table.points)
        os << num(p.e) << "," << num(p.t) << "," << num(p.s) << "," << p.branch << ","
           << num(p.el_residual) << "," << (p.converged ? 1 : 0) << "\n";
      json side;
      side["provenance"] = provenance(verb, args, scfg.seed);
      side["grid"] = {{"e_min", grid.e_min}, {"e_max", grid.e_max}, {"e_steps", grid.e_steps},
                      {"t_min", grid.t_min}, {"t_max", grid.t_max}, {"t_steps", grid.t_steps}};
      side["config"] = {{"m", scfg.m},
                        {"starts", scfg.starts},
                        {"seed", scfg.seed},
                        {"tol_constraint", scfg.tol_constraint},
                        {"tol_gradient", scfg.tol_gradient}};
      side["skipped"] = json::array();
      for (const auto& sk : table.skipped)
        side["skipped"].push_back({{"e", sk.e}, {"t", sk.t}, {"reason", sk.reason}});
      auto sos = open_out(out_path + ".json");
      sos << side.dump(2) << "\n";
      return 0;
    }

    if (verb == "transitions") {
      std::vector<std::pair<double, double>> cells;
      for (int i = 0; i < path_steps; ++i) {
        double u = path_steps == 1 ? path_from
                                   : path_from + (path_to - path_from) * i / (path_steps - 1.0);
        if (path_kind == "fixed-e") {
          cells.emplace_back(path_value, u);
        } else if (path_kind == "fixed-eps") {
          double eps = path_value;
          cells.emplace_back(u, u * u * u - std::pow(u - eps, 3));
        } else {
          throw DomainError("transitions: --path must be fixed-e or fixed-eps");
        }
      }
      scfg.threads = 1;
      auto pts = phase::scan_path(cells, scfg, threads);
      auto flags = phase::detect_transition(pts, kappa);
      auto os = open_out(out_path);
      csv_provenance(os, verb, args, scfg.seed);
      os << "index,e,t,branch_change,second_difference,ratio\n";
      for (const auto& f : flags)
        os << f.index << "," << num(f.e) << "," << num(f.t) << "," << (f.branch_change ? 1 : 0)
           << "," << (f.second_difference ? 1 : 0) << "," << num(f.ratio) << "\n";
      if (!path_out.empty()) {
        auto pos = open_out(path_out);
        csv_provenance(pos, verb, args, scfg.seed);
        pos << "e,t,s,branch,el_residual,converged\n";
        for (const auto& p : pts)
          pos << num(p.e) << "," << num(p.t) << "," << num(p.s) << "," << p.branch << ","
              << num(p.el_residual) << "," << (p.converged ? 1 : 0) << "\n";
      }
      return 0;
    }

    if (verb == "dos") {
      config_fill(opt_dseed, cfg, "seed", wl.seed);
      if (win_e >= 0.0 && win_delta > 0.0) wl.window = ensemble::Window{win_e, win_t, win_delta};
      ensemble::DensityOfStates dos =
          dos_method == "exact" ? ensemble::exact_enumerate(dos_n, dos_force)
          : dos_method == "wl"
              ? (walkers > 1 ? ensemble::wang_landau_merged(dos_n, wl, walkers, threads)
                             : ensemble::wang_landau(dos_n, wl))
              : throw DomainError("dos: --method must be exact or wl");
      auto os = open_out(out_path);
      csv_provenance(os, verb, args, wl.seed);
      std::ostringstream meta;
      meta << "method=" << dos_method << " seed=" << wl.seed << " walkers=" << walkers;
      dos.to_csv(os, meta.str());
      if (!dos.converged())
        std::cerr << "dos: warning: sweep budget exhausted before the final modification factor; "
                     "table flagged as partial\n";
      return 0;
    }

    if (verb == "sample") {
      config_fill(opt_sseed, cfg, "seed", sampler.seed);
      auto samples = ensemble::sample_constrained(sample_n, sample_e, sample_t, sample_delta, sampler);
      auto os = open_out(out_path);
      json head;
      head["provenance"] = provenance(verb, args, sampler.seed);
      os << head.dump() << "\n";
      for (const auto& g : samples) os << g.to_json().dump() << "\n";
      return 0;
    }

    if (verb == "compare") {
      auto load = [](const std::string& p) {
        std::ifstream is(p);
        if (!is) throw DomainError("cannot read graphon file: " + p);
        json j;
        is >> j;
        if (j.contains("result")) j = j["result"];   // accept solve output
        if (j.contains("graphon")) j = j["graphon"];
        return StepGraphon::from_json(j);
      };
      StepGraphon a = load(file_a), b = load(file_b);
      auto cut = cut_distance_labeled(a, b);
      json j;
      j["provenance"] = provenance(verb, args, 0);
      j["compare_reduced"] = solver::compare_reduced(a, b);
      j["cut_distance"] = {{"value", cut.value}, {"exact", cut.exact}};
      j["hom_metric_default_motifs"] = hom_metric(a, b, default_motifs());
      if (out_path.empty()) std::cout << j.dump(2) << std::endl;
      else open_out(out_path) << j.dump(2) << "\n";
      return 0;
    }

    if (verb == "verify") {
      int failures = verify::run_acceptance(suites, std::cout, threads);
      return failures == 0 ? 0 : 1;
    }

    std::cerr << "unknown verb\n";
    return 64;
  } catch (const EmptyWindowError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  } catch (const DomainError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  } catch (const ResourceError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  } catch (const ConvergenceError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  }
}

}  // namespace graphon_lab::cli
