#include "h2chain/cli.hpp"

#include <chrono>
#include <fstream>
#include <map>
#include <ostream>
#include <random>
#include <sstream>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "h2chain/hash.hpp"
#include "h2chain/report.hpp"
#include "json.hpp"

#ifndef H2CHAIN_VERSION
#define H2CHAIN_VERSION "0.0.0"
#endif

namespace h2chain {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SolverFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// logfmt progress lines on the error stream.
class Log {
 public:
  Log(std::ostream& err, bool quiet) : err_(err), quiet_(quiet) {}
  void operator()(const std::string& event, const std::vector<std::pair<std::string, std::string>>& fields = {}) {
    if (quiet_) return;
    err_ << "h2chain event=" << event;
    for (const auto& [key, value] : fields) {
      const bool quote = value.empty() || value.find_first_of(" =\"") != std::string::npos;
      err_ << ' ' << key << '=' << (quote ? json(value).dump() : value);
    }
    err_ << '\n' << std::flush;
  }

 private:
  std::ostream& err_;
  bool quiet_;
};

struct Options {
  std::string scenario;
  std::string out;
  std::uint64_t seed = 1;
  int threads = 1;
  bool quiet = false;
  std::string plan_file;
  int ga_pop = GAConfig{}.population;
  int ga_gens = GAConfig{}.generations;
  std::string flat_sweep;
  std::string sensitivity;
  std::string convention = "departure";
  std::string bundle;
  std::vector<std::string> sections;
  int cases = 50;
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

double parse_number(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || text.empty() || !std::isfinite(v)) {
    throw UsageError(fmt::format("{}: '{}' is not a number", what, text));
  }
  return v;
}

// "a,b,c" or "lo:step:hi".
std::vector<double> parse_list(const std::string& text, const std::string& what) {
  std::vector<double> values;
  if (text.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream in(text);
    for (std::string part; std::getline(in, part, ':');) parts.push_back(part);
    if (parts.size() != 3) throw UsageError(what + ": ranges are written lo:step:hi");
    const double lo = parse_number(parts[0], what), step = parse_number(parts[1], what), hi = parse_number(parts[2], what);
    if (!(step > 0.0) || hi < lo) throw UsageError(what + ": range needs step > 0 and hi >= lo");
    const long count = std::lround(std::floor((hi - lo) / step + 1e-9));
    if (count > 100000) throw UsageError(what + ": range has too many points");
    for (long k = 0; k <= count; ++k) values.push_back(lo + step * static_cast<double>(k));
  } else {
    std::stringstream in(text);
    for (std::string part; std::getline(in, part, ',');) values.push_back(parse_number(part, what));
  }
  if (values.empty()) throw UsageError(what + ": empty list");
  return values;
}

struct LoadedScenario {
  Scenario scenario;
  fs::path path;
  std::string file_sha256;
  std::string fingerprint;
};

LoadedScenario load(const std::string& name) {
  LoadedScenario l;
  l.path = resolve_scenario_path(name);
  l.scenario = parse_scenario(read_file(l.path));
  l.file_sha256 = sha256_hex(read_file(l.path));
  l.fingerprint = scenario_fingerprint(l.scenario);
  return l;
}

GAConfig ga_config(const Options& o) {
  GAConfig c;
  c.population = o.ga_pop;
  c.generations = o.ga_gens;
  c.seed = o.seed;
  c.threads = o.threads;
  try {
    validate(c);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return c;
}

FollowerOptions follower_options(const Options& o) {
  FollowerOptions f;
  try {
    f.convention = parse_arrival_convention(o.convention);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return f;
}

PlanningSection run_planning(const Scenario& s, Log& log) {
  PlanningSection p;
  PlanningOptions options;
  p.price = planning_price(s);
  std::vector<StructureRecord> records;
  for (const CoalitionStructure& c : enumerate_structures(s.plant_count())) {
    StructureValue v = solve_planning(c, s, options);
    if (v.status != milp::SolveStatus::kOptimal) {
      throw SolverFailure(fmt::format("planning {} not solved to optimality ({}): {}", c.label(),
                                      milp::to_string(v.status), v.diagnostic));
    }
    log("plan.structure", {{"structure", c.label()}, {"total", exact(v.total)}, {"models", std::to_string(v.models_solved)}});
    records.push_back({c, v.block_values});
    p.structures.push_back(std::move(v));
  }
  p.verdicts = stability_report(records);
  const StructureValue& chosen = select_structure(p.structures, p.verdicts);
  p.selected = chosen.structure.label();
  for (const Block& b : chosen.structure.blocks) {
    if (b.members.size() < 2) continue;
    p.imputations.push_back(shapley_allocate(
        b.members, [&](const std::vector<int>& subset) { return coalition_value(subset, s, options); }));
  }
  log("plan.selected", {{"structure", p.selected}, {"total", exact(chosen.total)}});
  return p;
}

struct Plans {
  std::string structure;
  std::vector<PlanDecision> plans;
};

Plans plans_for(const LoadedScenario& l, const Options& o, StudyBundle& bundle, Log& log) {
  if (o.plan_file.empty()) {
    bundle.planning = run_planning(l.scenario, log);
    const auto& p = *bundle.planning;
    for (const StructureValue& v : p.structures) {
      if (v.structure.label() == p.selected) return {p.selected, v.plans};
    }
  }
  PlanFile file;
  try {
    file = parse_plan_file(read_file(o.plan_file));
  } catch (const std::invalid_argument& e) {
    throw ValidationError(e.what());
  }
  if (file.scenario_fingerprint != l.fingerprint) {
    throw ValidationError("plan file was made for a different scenario (fingerprint mismatch)");
  }
  // Builds a model once so that malformed plans fail here with a clear message.
  build_schedule_model(file.plans, l.scenario, planning_price(l.scenario));
  log("schedule.plan", {{"file", o.plan_file}, {"structure", file.structure}});
  return {file.structure, file.plans};
}

void write_outputs(const fs::path& dir, const StudyBundle& bundle, std::vector<ManifestEntry> extra,
                   std::vector<ManifestEntry>& outputs) {
  std::vector<ManifestEntry> entries = export_tables(bundle, dir);
  entries.push_back(write_file_atomic(dir, "bundle.json", bundle_to_json(bundle)));
  entries.insert(entries.end(), extra.begin(), extra.end());
  outputs = entries;
  outputs.push_back(write_manifest(dir, entries));
}

StudyBundle new_bundle(const LoadedScenario& l) {
  StudyBundle b;
  b.scenario_name = l.scenario.name;
  b.scenario_fingerprint = l.fingerprint;
  b.tariff = l.scenario.tariff.electricity_price;
  return b;
}

std::string price_text(const PriceSchedule& p) {
  std::vector<std::string> parts;
  for (double v : p.prices) parts.push_back(money(v));
  return fmt::format("{}", fmt::join(parts, " "));
}

std::vector<double> flat_grid(const Scenario& s, const Options& o) {
  const std::vector<double> grid = parse_list(o.flat_sweep, "--flat-sweep");
  for (double p : grid) {
    if (!PriceSchedule::flat(s.periods(), p).within_bounds(s, 1e-9)) {
      throw ValidationError(fmt::format("--flat-sweep: price {} lies outside the band", p));
    }
  }
  return grid;
}

// --sensitivity NAME=LIST
std::pair<SensitivityParameter, std::vector<double>> parse_sensitivity(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos) throw UsageError("--sensitivity expects NAME=LIST, e.g. Qtrans=6000,9000,12000");
  SensitivityParameter parameter;
  try {
    parameter = parse_sensitivity_parameter(text.substr(0, eq));
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return {parameter, parse_list(text.substr(eq + 1), "--sensitivity")};
}

void run_sweeps(const LoadedScenario& l, const Options& o, const Plans& plans, StudyBundle& bundle, Log& log,
                std::ostream& out) {
  const Scenario& s = l.scenario;
  if (!o.flat_sweep.empty()) {
    const std::vector<double> grid = flat_grid(s, o);
    bundle.flat_sweep = fixed_price_sweep(s, plans.plans, grid, follower_options(o));
    const SweepPoint& best = (*bundle.flat_sweep)[best_sweep_point(*bundle.flat_sweep)];
    log("sweep.flat", {{"points", std::to_string(grid.size())}, {"best_price", exact(best.price)},
                       {"best_profit", exact(best.leader_profit)}});
    out << fmt::format("flat-price optimum: {} $/kg, leader profit {} $/day\n", money(best.price),
                       money(best.leader_profit));
  }
  if (!o.sensitivity.empty()) {
    const auto [parameter, values] = parse_sensitivity(o.sensitivity);
    SensitivityOptions options;
    options.ga = ga_config(o);
    options.follower = follower_options(o);
    options.ga.on_generation = [&](int g, double best) {
      if (g % 10 == 0) log("sweep.sensitivity.generation", {{"generation", std::to_string(g)}, {"best", exact(best)}});
    };
    for (double v : values) {
      Scenario probe = s;
      if (parameter == SensitivityParameter::kOperatingCost) probe.transport.op_cost_per_period = v;
      else probe.cavern.max_injection = v;
      try {
        validate(probe);
      } catch (const ScenarioValidationError& e) {
        throw ValidationError(fmt::format("--sensitivity {}={}: {}", to_string(parameter), v, e.what()));
      }
    }
    SensitivitySection section;
    section.parameter = parameter;
    section.points = sensitivity_sweep(s, parameter, values, plans.plans, plans.structure, options);
    for (const SensitivityPoint& p : section.points) {
      log("sweep.sensitivity", {{"parameter", to_string(parameter)}, {"value", exact(p.value)}, {"structure", p.structure},
                                {"leader_profit", p.scheduled ? exact(p.equilibrium.leader_profit) : ""}});
      out << fmt::format("{} = {}: structure {}, leader profit {} $/day\n", to_string(parameter), exact(p.value),
                         p.structure, p.scheduled ? money(p.equilibrium.leader_profit) : "-");
    }
    bundle.sensitivity = std::move(section);
  }
}

int cmd_validate(const Options& o, std::ostream& out) {
  const LoadedScenario l = load(o.scenario);
  const Scenario& s = l.scenario;
  const auto [lo, hi] = std::minmax_element(s.cavern.price_floor.begin(), s.cavern.price_floor.end());
  const auto [clo, chi] = std::minmax_element(s.cavern.price_ceiling.begin(), s.cavern.price_ceiling.end());
  out << fmt::format("scenario      {}\n", s.name);
  out << fmt::format("file          {}\n", l.path.string());
  out << fmt::format("fingerprint   {}\n", l.fingerprint);
  out << fmt::format("plants        {}\n", s.plant_count());
  out << fmt::format("periods       {} x {} h\n", s.periods(), s.horizon.period_hours);
  out << fmt::format("equipment     {} compressor(s), {} liquefier(s)\n", s.catalog.compressor_types,
                     s.catalog.liquefier_types);
  out << fmt::format("retail price  {} $/kg\n", money(s.cavern.retail_price));
  out << fmt::format("price band    floor {}..{}, ceiling {}..{} $/kg\n", money(*lo), money(*hi), money(*clo),
                     money(*chi));
  out << fmt::format("injection cap {} kg/period\n", exact(s.cavern.max_injection));
  for (const PlantParams& p : s.plants) {
    double total = 0.0;
    for (double g : p.generation) total += g;
    out << fmt::format("plant {}       {} kg by-product over the horizon\n", p.id, exact(total));
  }
  return kExitOk;
}

// Random two-plant follower models cut from tiny_case, each checked against
// exhaustive enumeration.
int cmd_oracle_check(const Options& o, std::ostream& out, Log& log) {
  const Scenario base = load("tiny_case.json").scenario;
  std::mt19937_64 rng(o.seed);
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  int failures = 0, checked = 0;
  for (int c = 0; c < o.cases; ++c) {
    Scenario s = base;
    const int T = pick(1, base.periods());
    s.horizon.periods = T;
    for (PlantParams& p : s.plants) p.generation.resize(T);
    s.tariff.electricity_price.resize(T);
    s.cavern.price_floor.resize(T);
    s.cavern.price_ceiling.resize(T);
    const int cavern = s.cavern_index();
    std::vector<PlanDecision> plans;
    for (int i = 0; i < s.plant_count(); ++i) plans.push_back({i, pick(0, 1), cavern, pick(0, 4)});
    if (pick(0, 2) == 0) plans[0].destination = 1;
    PriceSchedule prices;
    for (int t = 0; t < T; ++t) {
      prices.prices.push_back(
          std::uniform_real_distribution<double>(s.cavern.price_floor[t], s.cavern.price_ceiling[t])(rng));
    }
    ModelOptions m;
    m.fleet = FleetMode::kFixed;
    m.cumulative_departures = pick(0, 1) == 1;
    m.late_arrivals_paid = pick(0, 1) == 1;
    const ScheduleModel model = build_schedule_model(plans, s, prices, m);
    if (milp::lattice_size(model.lp) > 1e5) {
      --c;
      continue;
    }
    const milp::SolveResult bb = milp::solve_milp(model.lp);
    const milp::SolveResult oracle = milp::brute_force_oracle(model.lp);
    const bool ok = bb.status == oracle.status &&
                    (bb.status != milp::SolveStatus::kOptimal ||
                     std::abs(bb.objective_value - oracle.objective_value) <=
                         1e-6 * std::max(1.0, std::abs(oracle.objective_value)));
    ++checked;
    if (!ok) ++failures;
    out << fmt::format("case {:3d}  T={} lattice={:>6}  branch-and-bound {:>14}  oracle {:>14}  {}\n", c + 1, T,
                       exact(milp::lattice_size(model.lp)), exact(bb.objective_value), exact(oracle.objective_value),
                       ok ? "ok" : "MISMATCH");
  }
  log("oracle.done", {{"cases", std::to_string(checked)}, {"failures", std::to_string(failures)}});
  out << fmt::format("{} of {} cases agree\n", checked - failures, checked);
  return failures == 0 ? kExitOk : kExitSolver;
}

int dispatch(const std::string& command, const Options& o, std::ostream& out, Log& log,
             std::vector<ManifestEntry>& outputs, std::string& scenario_hash, std::string& fingerprint) {
  if (command == "validate") return cmd_validate(o, out);
  if (command == "oracle-check") return cmd_oracle_check(o, out, log);

  if (command == "report") {
    fs::path source = o.bundle;
    if (fs::is_directory(source)) source /= "bundle.json";
    StudyBundle bundle;
    try {
      bundle = parse_bundle(read_file(source));
    } catch (const std::invalid_argument& e) {
      throw ValidationError(e.what());
    }
    std::vector<Section> sections;
    for (const std::string& name : o.sections) {
      try {
        sections.push_back(parse_section(name));
      } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
      }
    }
    std::vector<ManifestEntry> entries = export_tables(bundle, o.out, sections);
    outputs = entries;
    outputs.push_back(write_manifest(o.out, entries));
    fingerprint = bundle.scenario_fingerprint;
    for (const ManifestEntry& e : entries) out << fmt::format("{}  {}\n", e.sha256, e.path);
    return kExitOk;
  }

  const LoadedScenario l = load(o.scenario);
  scenario_hash = l.file_sha256;
  fingerprint = l.fingerprint;
  StudyBundle bundle = new_bundle(l);

  if (command == "plan") {
    bundle.planning = run_planning(l.scenario, log);
    const PlanningSection& p = *bundle.planning;
    PlanFile plan{l.fingerprint, p.selected, {}};
    for (const StructureValue& v : p.structures) {
      if (v.structure.label() == p.selected) plan.plans = v.plans;
    }
    std::vector<ManifestEntry> extra{write_file_atomic(o.out, "plan.json", plan_file_to_json(plan))};
    write_outputs(o.out, bundle, extra, outputs);
    for (std::size_t k = 0; k < p.structures.size(); ++k) {
      out << fmt::format("{:<16} total {:>14}  {}\n", p.structures[k].structure.label(), money(p.structures[k].total),
                         p.verdicts[k].stable() ? "stable" : "");
    }
    out << fmt::format("selected {}; plan written to {}\n", p.selected, (fs::path(o.out) / "plan.json").string());
    return kExitOk;
  }

  // Arguments are checked before any solving starts.
  GAConfig ga = ga_config(o);
  follower_options(o);
  if (!o.flat_sweep.empty()) ga.flat_seeds = flat_grid(l.scenario, o);
  if (!o.sensitivity.empty()) parse_sensitivity(o.sensitivity);
  if (command == "sweep" && o.flat_sweep.empty() && o.sensitivity.empty()) {
    throw UsageError("sweep needs --flat-sweep and/or --sensitivity");
  }

  const Plans plans = plans_for(l, o, bundle, log);
  if (command == "schedule") {
    ga.on_generation = [&](int g, double best) {
      if (g % 10 == 0 || g == ga.generations) {
        log("schedule.generation", {{"generation", std::to_string(g)}, {"best", exact(best)}});
      }
    };
    bundle.scheduling = optimize_prices(l.scenario, plans.plans, ga, follower_options(o));
    const EquilibriumReport& r = *bundle.scheduling;
    out << fmt::format("structure {}\nbest prices {}\nleader profit {} $/day\n", plans.structure,
                       price_text(r.best_prices), money(r.leader_profit));
    for (std::size_t k = 0; k < r.plans.size(); ++k) {
      out << fmt::format("plant {} profit {} $/day\n", r.plans[k].plant + 1, money(r.follower_profits[k]));
    }
  }
  run_sweeps(l, o, plans, bundle, log, out);
  write_outputs(o.out, bundle, {}, outputs);
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  const auto start = std::chrono::steady_clock::now();
  CLI::App app{"By-product hydrogen supply chain: coalition planning and leader-follower pricing", "h2chain"};
  app.require_subcommand(1);
  app.set_version_flag("--version", H2CHAIN_VERSION);
  Options o;

  auto common = [&](CLI::App* sub, bool scenario) {
    if (scenario) sub->add_option("scenario", o.scenario, "Scenario JSON (bundled names are found automatically)")->required();
    sub->add_option("--out", o.out, "Output directory")->default_val("h2chain-" + sub->get_name());
    sub->add_option("--seed", o.seed, "Random seed")->default_val(1);
    sub->add_option("--threads", o.threads, "Worker threads for fitness evaluation")->default_val(1)->check(CLI::PositiveNumber);
    sub->add_flag("--quiet", o.quiet, "No progress lines");
  };
  auto scheduling = [&](CLI::App* sub) {
    sub->add_option("--plan", o.plan_file, "Plan file written by 'plan' (default: plan first)");
    sub->add_option("--ga-pop", o.ga_pop, "GA population")->default_val(GAConfig{}.population);
    sub->add_option("--ga-gens", o.ga_gens, "GA generations")->default_val(GAConfig{}.generations);
    sub->add_option("--flat-sweep", o.flat_sweep, "Flat prices, a,b,c or lo:step:hi");
    sub->add_option("--sensitivity", o.sensitivity, "K3=LIST or Qtrans=LIST");
    sub->add_option("--arrival-convention", o.convention, "departure or strict")->default_val("departure");
  };

  CLI::App* validate_cmd = app.add_subcommand("validate", "Check a scenario and print its parameters");
  common(validate_cmd, true);
  CLI::App* plan_cmd = app.add_subcommand("plan", "Value every coalition structure and write a plan file");
  common(plan_cmd, true);
  CLI::App* schedule_cmd = app.add_subcommand("schedule", "Search the leader's price schedule");
  common(schedule_cmd, true);
  scheduling(schedule_cmd);
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "Flat-price and sensitivity sweeps");
  common(sweep_cmd, true);
  scheduling(sweep_cmd);
  CLI::App* report_cmd = app.add_subcommand("report", "Export CSV tables from a study bundle");
  report_cmd->add_option("bundle", o.bundle, "bundle.json or the directory holding it")->required();
  report_cmd->add_option("--section", o.sections, "planning, scheduling, flat_sweep or sensitivity (repeatable)");
  common(report_cmd, false);
  CLI::App* oracle_cmd = app.add_subcommand("oracle-check", "Branch-and-bound against exhaustive search on tiny models");
  oracle_cmd->add_option("--cases", o.cases, "Number of random models")->default_val(50)->check(CLI::PositiveNumber);
  common(oracle_cmd, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << H2CHAIN_VERSION << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "h2chain: " << e.what() << "\n";
    return kExitUsage;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  Log log(err, o.quiet);
  std::vector<ManifestEntry> outputs;
  std::string scenario_hash, fingerprint;
  int status = kExitOk;
  std::string error;
  try {
    status = dispatch(command, o, out, log, outputs, scenario_hash, fingerprint);
  } catch (const UsageError& e) {
    status = kExitUsage;
    error = e.what();
  } catch (const ValidationError& e) {
    status = kExitValidation;
    error = e.what();
  } catch (const ScenarioParseError& e) {
    status = kExitValidation;
    error = e.what();
  } catch (const ScenarioValidationError& e) {
    status = kExitValidation;
    error = e.what();
  } catch (const ModelBuildError& e) {
    status = kExitValidation;
    error = e.what();
  } catch (const MissingSectionError& e) {
    status = kExitValidation;
    error = e.what();
  } catch (const std::invalid_argument& e) {
    status = kExitValidation;
    error = e.what();
  } catch (const fs::filesystem_error& e) {
    status = kExitValidation;
    error = e.what();
  } catch (const std::exception& e) {
    status = kExitSolver;
    error = e.what();
  }
  if (!error.empty()) err << "h2chain: error: " << error << "\n";

  if (command != "validate" && command != "oracle-check" && !o.out.empty()) {
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    json files = json::array();
    for (const ManifestEntry& e : outputs) files.push_back(json{{"path", e.path}, {"sha256", e.sha256}, {"bytes", e.bytes}});
    json overrides = json::object();
    for (const CLI::Option* opt : app.get_subcommands().front()->get_options()) {
      if (opt->count() > 0 && !opt->get_lnames().empty()) overrides[opt->get_lnames().front()] = opt->as<std::string>();
    }
    const json manifest{{"subcommand", command},
                        {"arguments", std::vector<std::string>(argv + 1, argv + argc)},
                        {"scenario", json{{"path", command == "report" ? o.bundle : o.scenario},
                                          {"sha256", scenario_hash},
                                          {"fingerprint", fingerprint}}},
                        {"config", overrides},
                        {"seed", o.seed},
                        {"threads", o.threads},
                        {"tool_version", H2CHAIN_VERSION},
                        {"wall_seconds", wall},
                        {"outputs", files},
                        {"exit_status", status},
                        {"error", error}};
    try {
      write_file_atomic(o.out, "run_manifest.json", manifest.dump(2) + "\n");
    } catch (const std::exception& e) {
      err << "h2chain: error: cannot write run manifest: " << e.what() << "\n";
      if (status == kExitOk) status = kExitValidation;
    }
  }
  return status;
}

}  // namespace h2chain
