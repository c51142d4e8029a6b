#include <chrono>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "ldsda/errors.hpp"
#include "ldsda/models.hpp"
#include "ldsda/report.hpp"

namespace {

using namespace ldsda;

constexpr int kExitOk = 0;
constexpr int kExitInfeasibleStart = 1;
constexpr int kExitBadArguments = 2;
constexpr int kExitBudgetExhausted = 3;

struct CommonOptions {
  std::string model;
  std::string params_path;
  int size = 0;  // cstr superstructure size override
  std::string start_csv;
  std::string neighborhood = "inf";
  double epsilon = 0.0;
  bool no_fbbt = false;
  bool no_visited = false;
  bool no_domain_check = false;
  bool no_warm_start = false;
  long max_solves = 0;  // 0 = unlimited
  int threads = 1;
  bool emit_timing = false;
  std::string out_path;
};

void add_model_flags(CLI::App* cmd, CommonOptions& opt) {
  cmd->add_option("--model", opt.model, "case study: cstr | smallbatch")
      ->required();
  cmd->add_option("--params", opt.params_path,
                  "parameter file (key = value lines, # comments)");
  cmd->add_option("--size", opt.size, "cstr superstructure size R");
  cmd->add_option("--threads", opt.threads,
                  "concurrent neighbor evaluations (default 1)");
  cmd->add_option("--max-solves", opt.max_solves,
                  "subproblem solve budget (0 = unlimited)");
  cmd->add_flag("--no-fbbt", opt.no_fbbt, "disable FBBT prescreening");
  cmd->add_flag("--no-visited", opt.no_visited, "disable the visited set");
  cmd->add_flag("--no-domain-check", opt.no_domain_check,
                "disable the lattice box check");
  cmd->add_flag("--no-warm-start", opt.no_warm_start,
                "solve every subproblem from the default start");
  cmd->add_option("--epsilon", opt.epsilon,
                  "relative improvement tolerance (default 0)");
  cmd->add_flag("--emit-timing", opt.emit_timing,
                "include wall-clock timing in the report (not byte-stable)");
  cmd->add_option("--out", opt.out_path, "report/table output path");
}

ExternalPoint parse_point(const std::string& csv) {
  ExternalPoint z;
  std::string token;
  std::stringstream ss(csv);
  while (std::getline(ss, token, ',')) {
    try {
      size_t used = 0;
      z.push_back(std::stoi(token, &used));
      if (used != token.size()) throw std::invalid_argument(token);
    } catch (const std::exception&) {
      throw InvalidParams("bad lattice point component '" + token + "'");
    }
  }
  return z;
}

struct Instance {
  BuiltGdp gdp;
  SearchConfig config;
  ExternalPoint default_start;
  std::map<std::string, std::string> config_echo;
};

Instance make_instance(const CommonOptions& opt) {
  std::map<std::string, std::string> kv;
  if (!opt.params_path.empty()) kv = read_params_file(opt.params_path);

  Instance inst;
  if (opt.model == "cstr") {
    CstrParams p = cstr_params_from(kv);
    if (opt.size > 0) p.reactors = opt.size;
    inst.gdp = build_cstr(p);
    inst.default_start = {1, 1};
  } else if (opt.model == "smallbatch") {
    if (opt.size > 0)
      throw InvalidParams("--size applies to the cstr model only");
    inst.gdp = build_small_batch(batch_params_from(kv));
    inst.default_start = {3, 3, 3};
  } else {
    throw InvalidParams("unknown model '" + opt.model + "'");
  }

  SearchConfig& cfg = inst.config;
  cfg.epsilon = opt.epsilon;
  cfg.use_fbbt = !opt.no_fbbt;
  cfg.use_visited_set = !opt.no_visited;
  cfg.use_domain_check = !opt.no_domain_check;
  cfg.use_warm_start = !opt.no_warm_start;
  if (opt.max_solves > 0) cfg.max_subproblem_solves = opt.max_solves;
  cfg.threads = opt.threads;
  auto solver_key = [&](const char* key, auto setter) {
    auto it = kv.find(key);
    if (it != kv.end()) setter(std::stod(it->second));
  };
  solver_key("kkt_tol", [&](double v) { cfg.nlp.optimality_tol = v; });
  solver_key("feas_tol", [&](double v) { cfg.nlp.feasibility_tol = v; });
  solver_key("max_inner", [&](double v) { cfg.nlp.max_inner = static_cast<int>(v); });
  solver_key("max_outer", [&](double v) { cfg.nlp.max_outer = static_cast<int>(v); });

  auto& echo = inst.config_echo;
  echo["model"] = opt.model;
  if (!opt.params_path.empty()) echo["params"] = opt.params_path;
  if (opt.size > 0) echo["size"] = std::to_string(opt.size);
  echo["neighborhood"] = opt.neighborhood;
  echo["epsilon"] = format_double(opt.epsilon);
  echo["fbbt"] = cfg.use_fbbt ? "on" : "off";
  echo["visited_set"] = cfg.use_visited_set ? "on" : "off";
  echo["domain_check"] = cfg.use_domain_check ? "on" : "off";
  echo["warm_start"] = cfg.use_warm_start ? "on" : "off";
  echo["threads"] = std::to_string(opt.threads);
  if (opt.max_solves > 0) echo["max_solves"] = std::to_string(opt.max_solves);
  return inst;
}

NeighborhoodKind parse_neighborhood(const std::string& s) {
  if (s == "2") return NeighborhoodKind::kTwo;
  if (s == "inf") return NeighborhoodKind::kInf;
  throw InvalidParams("neighborhood must be 2 or inf");
}

void write_output(const std::string& path, const std::string& content) {
  if (path.empty()) {
    std::cout << content;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidParams("cannot open output path '" + path + "'");
  out << content;
  if (!out) throw InvalidParams("failed writing '" + path + "'");
}

int write_error_record(const std::string& command, const CommonOptions& opt,
                       const std::string& status, const std::string& message,
                       int exit_code) {
  RunReport report;
  report.command = command;
  report.status = status;
  report.error_message = message;
  try {
    write_output(opt.out_path, run_report_to_text(report));
  } catch (const std::exception&) {
    std::cerr << message << "\n";
  }
  std::cerr << "error: " << message << "\n";
  return exit_code;
}

int run_solve(const CommonOptions& opt) {
  Instance inst;
  ExternalPoint z0;
  NeighborhoodKind k;
  try {
    inst = make_instance(opt);
    k = parse_neighborhood(opt.neighborhood);
    z0 = opt.start_csv.empty() ? inst.default_start
                               : parse_point(opt.start_csv);
    if (!in_box(inst.gdp.specs, z0))
      throw OutOfBounds("start point outside the lattice box");
  } catch (const Error& e) {
    return write_error_record("solve", opt, "error", e.what(),
                              kExitBadArguments);
  }

  RunReport report;
  report.command = "solve";
  report.config = inst.config_echo;
  report.config["start"] = [&] {
    std::string s;
    for (size_t i = 0; i < z0.size(); ++i)
      s += (i ? "," : "") + std::to_string(z0[i]);
    return s;
  }();

  const auto t0 = std::chrono::steady_clock::now();
  InteriorPointSolver solver;
  SearchResult result;
  try {
    result = run_ldsda(inst.gdp.model, inst.gdp.specs, z0, k, inst.config, solver);
  } catch (const InfeasibleStart& e) {
    return write_error_record("solve", opt, "infeasible_start", e.what(),
                              kExitInfeasibleStart);
  } catch (const Error& e) {
    return write_error_record("solve", opt, "error", e.what(),
                              kExitBadArguments);
  }

  report.status = result.certificate == Certificate::kBudgetExhausted
                      ? "budget_exhausted"
                      : "ok";
  report.objective = result.best_value;
  report.best_point = result.best_point;
  report.certificate = to_string(result.certificate);
  report.stats = result.stats;
  report.trajectory = result.trajectory;
  const Model& model = inst.gdp.model;
  for (int i = 0; i < model.num_continuous(); ++i) {
    if (i < static_cast<int>(result.variable_point.size()))
      report.variable_point[model.continuous(i).name] =
          result.variable_point[i];
  }
  for (int b = 0; b < model.num_booleans(); ++b) {
    if (b < static_cast<int>(result.boolean_assignment.size()) &&
        result.boolean_assignment[b] == Truth::kTrue)
      report.true_booleans.push_back(model.boolean(b).name);
  }
  if (opt.emit_timing) {
    report.wall_ms = std::chrono::duration<double, std::milli>(
                         std::chrono::steady_clock::now() - t0)
                         .count();
  }
  write_output(opt.out_path, run_report_to_text(report));
  std::cerr << "solve: f* = " << format_double(result.best_value) << " at z = (";
  for (size_t i = 0; i < result.best_point.size(); ++i)
    std::cerr << (i ? "," : "") << result.best_point[i];
  std::cerr << "), " << to_string(result.certificate) << ", "
            << result.stats.solves << " solves\n";
  return report.status == "budget_exhausted" ? kExitBudgetExhausted : kExitOk;
}

int run_enumerate(const CommonOptions& opt) {
  Instance inst;
  try {
    inst = make_instance(opt);
  } catch (const Error& e) {
    return write_error_record("enumerate", opt, "error", e.what(),
                              kExitBadArguments);
  }
  InteriorPointSolver solver;
  const EnumerateResult result =
      enumerate_lattice(inst.gdp.model, inst.gdp.specs, inst.config, solver);
  try {
    write_output(opt.out_path, lattice_to_csv(result.rows));
  } catch (const Error& e) {
    return write_error_record("enumerate", opt, "error", e.what(),
                              kExitBadArguments);
  }
  std::cerr << "enumerate: " << result.rows.size() << " rows, "
            << result.stats.solves << " solves\n";
  return result.budget_exhausted ? kExitBudgetExhausted : kExitOk;
}

int run_verify(const CommonOptions& opt, const std::string& point_csv) {
  Instance inst;
  ExternalPoint z;
  NeighborhoodKind k;
  try {
    inst = make_instance(opt);
    k = parse_neighborhood(opt.neighborhood);
    z = parse_point(point_csv);
    if (!in_box(inst.gdp.specs, z))
      throw OutOfBounds("point outside the lattice box");
  } catch (const Error& e) {
    return write_error_record("verify", opt, "error", e.what(),
                              kExitBadArguments);
  }
  InteriorPointSolver solver;
  RunReport report;
  report.command = "verify";
  report.config = inst.config_echo;
  try {
    report.verified_local =
        verify_local(inst.gdp.model, inst.gdp.specs, z, k, inst.config, solver);
  } catch (const InfeasibleStart& e) {
    return write_error_record("verify", opt, "infeasible_start", e.what(),
                              kExitInfeasibleStart);
  }
  report.status = "ok";
  report.best_point = z;
  report.certificate = *report.verified_local
                           ? (k == NeighborhoodKind::kInf ? "i-local" : "s-local")
                           : "not-local";
  write_output(opt.out_path, run_report_to_text(report));
  std::cerr << "verify: z is " << report.certificate << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generalized disjunctive programming kernel with a "
               "discrete-steepest-descent lattice search"};
  app.require_subcommand(1);

  CommonOptions solve_opt, enum_opt, verify_opt;
  std::string verify_point;

  CLI::App* solve_cmd =
      app.add_subcommand("solve", "run the lattice search on a case study");
  add_model_flags(solve_cmd, solve_opt);
  solve_cmd->add_option("--start", solve_opt.start_csv,
                        "initial lattice point, e.g. 1,1");
  solve_cmd->add_option("--neighborhood", solve_opt.neighborhood,
                        "2 | inf (default inf)");

  CLI::App* enum_cmd =
      app.add_subcommand("enumerate", "solve every lattice point");
  add_model_flags(enum_cmd, enum_opt);

  CLI::App* verify_cmd = app.add_subcommand(
      "verify", "check discrete local optimality of a lattice point");
  add_model_flags(verify_cmd, verify_opt);
  verify_cmd->add_option("--point", verify_point, "lattice point, e.g. 5,1")
      ->required();
  verify_cmd->add_option("--neighborhood", verify_opt.neighborhood,
                         "2 | inf (default inf)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitBadArguments;
  }

  if (solve_cmd->parsed()) return run_solve(solve_opt);
  if (enum_cmd->parsed()) return run_enumerate(enum_opt);
  if (verify_cmd->parsed()) return run_verify(verify_opt, verify_point);
  return kExitBadArguments;
}
