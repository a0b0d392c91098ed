// orthoinfer: ridge-type debiased inference for high-dimensional regression.
//
// Subcommands:
//   infer     per-coefficient estimates and confidence intervals from a CSV
//   models    confidence set of low-dimensional submodels
//   simulate  seeded coverage experiments and factorial summaries
//
// Exit codes: 0 success, 2 input/config error, 3 numerical error, 4 sizing guard.

#include <chrono>
#include <cstdint>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "orthoinfer/dataset.hpp"
#include "orthoinfer/errors.hpp"
#include "orthoinfer/inference.hpp"
#include "orthoinfer/model_sets.hpp"
#include "orthoinfer/orthogonalize.hpp"
#include "orthoinfer/parallel.hpp"
#include "orthoinfer/report_io.hpp"
#include "orthoinfer/rng.hpp"
#include "orthoinfer/screening.hpp"
#include "orthoinfer/simlab.hpp"
#include "orthoinfer/version.hpp"

namespace {

using namespace orthoinfer;

std::uint64_t draw_seed() {
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ static_cast<std::uint64_t>(rd());
}

std::string join_args(int argc, char** argv) {
  std::ostringstream out;
  for (int i = 0; i < argc; ++i) {
    if (i) out << ' ';
    out << argv[i];
  }
  return out.str();
}

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

struct InferArgs {
  std::string data;
  std::string response;
  double delta = 1.0;
  double a = 0.0;
  bool a_set = false;
  double alpha = 0.05;
  double tau = 1.0;
  bool tau_set = false;
  double collapse_threshold = 0.95;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string out = "infer_report";
};

int run_infer(const InferArgs& args, const std::string& command, int threads) {
  Timer timer;
  (void)threads;
  Dataset raw = load_csv(args.data, args.response);
  Dataset centered = center_columns(raw);
  auto [d, collapse_map] = collapse_correlated(centered, args.collapse_threshold);

  std::uint64_t seed = args.seed_set ? args.seed : draw_seed();
  VarianceRecord variance;
  if (args.tau_set) {
    if (!(args.tau > 0.0)) throw DataError("infer: --tau must be positive");
    variance = VarianceRecord{args.tau, "known", 0};
  } else {
    variance = estimate_variance_split(d, seed);
  }

  OrthoConfig cfg;
  cfg.delta = args.delta;
  if (args.a_set) cfg.a = args.a;
  cfg.validate();
  InferenceReport report = build_report(d, cfg, args.alpha, variance);

  const std::string csv_path = args.out + ".csv";
  const std::string json_path = args.out + ".json";
  const std::string manifest_path = args.out + ".manifest.json";

  RunManifest manifest;
  manifest.command = command;
  manifest.config = {{"data", args.data},
                     {"response", args.response},
                     {"delta", cfg.delta},
                     {"a", cfg.effective_a()},
                     {"alpha", args.alpha},
                     {"collapse_threshold", args.collapse_threshold},
                     {"variance", {{"value", variance.value}, {"method", variance.method}, {"df", variance.df}}},
                     {"columns_retained", d.p()},
                     {"columns_input", centered.p()}};
  manifest.seeds = {seed};
  manifest.inputs = {{args.data, fnv1a64_hex(read_file_bytes(args.data))}};
  manifest.outputs = {csv_path, json_path};

  atomic_write_file(csv_path, inference_report_csv(report, manifest_path));
  nlohmann::json jr = to_json(report, manifest_path);
  jr["collapse"] = to_json(collapse_map);
  jr["seed"] = seed;
  atomic_write_file(json_path, jr.dump(2) + "\n");
  manifest.wall_seconds = timer.seconds();
  atomic_write_file(manifest_path, to_json(manifest).dump(2) + "\n");
  std::cout << "wrote " << csv_path << ", " << json_path << ", " << manifest_path << "\n";
  return 0;
}

struct ModelsArgs {
  std::string data;
  std::string response;
  std::vector<int> s_hat;
  bool screen = false;
  int stability_reps = 1000;
  int screen_size = 0;  // 0 -> floor(n/3)
  int max_size = 5;
  double alpha_f = 0.05;
  double alpha = 0.05;
  double delta = 1.0;
  double a = 0.0;
  bool a_set = false;
  double tau = 1.0;
  bool tau_set = false;
  double slack = 1.0;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string out = "model_set";
};

int run_models(const ModelsArgs& args, const std::string& command, int threads) {
  Timer timer;
  (void)threads;
  Dataset raw = load_csv(args.data, args.response);
  Dataset d = center_columns(raw);
  std::uint64_t seed = args.seed_set ? args.seed : draw_seed();

  std::vector<int> s_hat = args.s_hat;
  if (args.screen) {
    int k = args.screen_size > 0 ? args.screen_size : static_cast<int>(d.n() / 3);
    ScreenFn base = marginal_screen(k);
    s_hat = args.stability_reps > 0 ? stability_screen(base, args.stability_reps, seed)(d.X, d.Y)
                                    : base(d.X, d.Y);
    if (s_hat.empty()) throw DataError("models: screening returned an empty set");
  }

  ModelConfidenceSet set = enumerate_confidence_set(d.Y, d, s_hat, args.alpha_f, args.max_size);

  VarianceRecord variance;
  if (args.tau_set) {
    if (!(args.tau > 0.0)) throw DataError("models: --tau must be positive");
    variance = VarianceRecord{args.tau, "known", 0};
  } else {
    variance = estimate_variance_split(d, seed);
  }
  OrthoConfig cfg;
  cfg.delta = args.delta;
  if (args.a_set) cfg.a = args.a;
  cfg.validate();
  InferenceReport report = build_report(d, cfg, args.alpha, variance, true, set.encompassing);
  set = ci_compatibility_filter(set, report, args.slack);

  const std::string csv_path = args.out + ".csv";
  const std::string json_path = args.out + ".json";
  const std::string manifest_path = args.out + ".manifest.json";

  RunManifest manifest;
  manifest.command = command;
  manifest.config = {{"data", args.data},
                     {"response", args.response},
                     {"s_hat", set.encompassing},
                     {"screened", args.screen},
                     {"stability_reps", args.screen ? args.stability_reps : 0},
                     {"max_size", args.max_size},
                     {"alpha_F", args.alpha_f},
                     {"alpha", args.alpha},
                     {"slack", args.slack},
                     {"variance", {{"value", variance.value}, {"method", variance.method}, {"df", variance.df}}},
                     {"candidates_enumerated", set.candidates_enumerated},
                     {"members_retained", set.members.size()},
                     {"ci_compatible", set.ci_compatible.size()}};
  manifest.seeds = {seed};
  manifest.inputs = {{args.data, fnv1a64_hex(read_file_bytes(args.data))}};
  manifest.outputs = {csv_path, json_path};

  std::string csv = "# manifest: " + manifest_path + "\n" +
                    table4_csv(set, d.column_ids, set.members);
  atomic_write_file(csv_path, csv);
  nlohmann::json js = to_json(set);
  js["manifest"] = manifest_path;
  js["seed"] = seed;
  atomic_write_file(json_path, js.dump(2) + "\n");
  manifest.wall_seconds = timer.seconds();
  atomic_write_file(manifest_path, to_json(manifest).dump(2) + "\n");
  std::cout << "candidates: " << set.candidates_enumerated << ", retained: " << set.members.size()
            << ", ci_compatible: " << set.ci_compatible.size() << "\n";
  return 0;
}

struct SimulateArgs {
  std::string config;
  bool table1 = false;
  int reps = 0;  // 0 -> keep config/preset default
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string out = "sim";
};

int run_simulate(const SimulateArgs& args, const std::string& command, int threads) {
  Timer timer;
  RunManifest manifest;
  manifest.command = command;

  if (args.table1) {
    std::uint64_t master = args.seed_set ? args.seed : draw_seed();
    manifest.seeds.push_back(master);
    const double rhos[2] = {0.9, 0.1};
    const int ns[2] = {70, 35};
    const int ps[2] = {2450, 1225};
    std::vector<SimReport> reports;
    std::vector<CellSummary> cells;
    int cell_index = 0;
    for (double rho : rhos)
      for (int n : ns)
        for (int p : ps) {
          SimConfig cfg;
          cfg.rho = rho;
          cfg.n = n;
          cfg.p = p;
          if (args.reps > 0) cfg.reps = args.reps;
          cfg.master_seed =
              SubStream(master, Role::kGeneric, static_cast<std::uint64_t>(cell_index)).next_u64();
          cfg.master_seed_set = true;
          SimReport rep = run_experiment(cfg, threads);
          std::string cell_path = args.out + "_cell" + std::to_string(cell_index) + ".json";
          atomic_write_file(cell_path,
                            to_json(rep, args.out + ".manifest.json").dump(2) + "\n");
          manifest.outputs.push_back(cell_path);
          manifest.seeds.push_back(cfg.master_seed);
          cells.push_back(cell_summary(rep));
          reports.push_back(std::move(rep));
          ++cell_index;
        }
    EffectsTable effects = factorial_effects(cells);
    const std::string table_path = args.out + "_table1.csv";
    const std::string effects_csv_path = args.out + "_effects.csv";
    const std::string effects_json_path = args.out + "_effects.json";
    const std::string manifest_path = args.out + ".manifest.json";
    atomic_write_file(table_path, table1_csv(reports, manifest_path));
    atomic_write_file(effects_csv_path, effects_csv(effects, manifest_path));
    atomic_write_file(effects_json_path, to_json(effects, manifest_path).dump(2) + "\n");
    manifest.outputs.push_back(table_path);
    manifest.outputs.push_back(effects_csv_path);
    manifest.outputs.push_back(effects_json_path);
    manifest.config = {{"preset", "table1"}, {"reps", args.reps > 0 ? args.reps : 1000}};
    manifest.wall_seconds = timer.seconds();
    atomic_write_file(manifest_path, to_json(manifest).dump(2) + "\n");
    std::cout << "wrote " << table_path << " and effects files\n";
    return 0;
  }

  std::string config_text = read_file_bytes(args.config);
  nlohmann::json jcfg;
  try {
    jcfg = nlohmann::json::parse(config_text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("simulate: invalid config JSON: ") + e.what());
  }
  SimConfig cfg = sim_config_from_json(jcfg);
  if (args.reps > 0) cfg.reps = args.reps;
  if (args.seed_set) {
    cfg.master_seed = args.seed;
    cfg.master_seed_set = true;
  }
  if (!cfg.master_seed_set) {
    cfg.master_seed = draw_seed();
    cfg.master_seed_set = true;
  }
  SimReport rep = run_experiment(cfg, threads);

  const std::string json_path = args.out + ".json";
  const std::string figure_path = args.out + "_figure.csv";
  const std::string table_path = args.out + "_table1.csv";
  const std::string manifest_path = args.out + ".manifest.json";
  manifest.seeds = {cfg.master_seed};
  manifest.config = to_json(cfg);
  manifest.inputs = {{args.config, fnv1a64_hex(config_text)}};
  manifest.outputs = {json_path, figure_path, table_path};

  atomic_write_file(json_path, to_json(rep, manifest_path).dump(2) + "\n");
  atomic_write_file(figure_path,
                    "# manifest: " + manifest_path + "\n" + export_figure_data(rep));
  atomic_write_file(table_path, table1_csv({rep}, manifest_path));
  manifest.wall_seconds = timer.seconds();
  atomic_write_file(manifest_path, to_json(manifest).dump(2) + "\n");
  std::cout << "wrote " << json_path << ", " << figure_path << ", " << table_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"orthoinfer: debiased coefficient inference for p >> n linear regression"};
  app.set_version_flag("--version", orthoinfer::kVersion);
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads,
                 "Worker threads (0 = ORTHOINFER_THREADS env or all cores)");

  InferArgs infer_args;
  auto* infer = app.add_subcommand("infer", "Confidence intervals for every coefficient");
  infer->add_option("--data", infer_args.data, "Input CSV with a header row")
      ->required()
      ->check(CLI::ExistingFile);
  infer->add_option("--response", infer_args.response, "Response column name")->required();
  infer->add_option("--delta", infer_args.delta, "Ridge regularization level")
      ->check(CLI::PositiveNumber);
  auto* infer_a = infer->add_option("--a", infer_args.a, "Numerator constant (default: delta)");
  infer->add_option("--alpha", infer_args.alpha, "Interval miscoverage level")
      ->check(CLI::Range(0.0, 1.0));
  auto* infer_tau = infer->add_option("--tau", infer_args.tau,
                                      "Known error variance (default: estimate by sample split)");
  infer->add_option("--collapse-threshold", infer_args.collapse_threshold,
                    "Collapse columns whose |correlation| with the group head exceeds this");
  auto* infer_seed = infer->add_option("--seed", infer_args.seed, "Master seed (64-bit)");
  infer->add_option("--out", infer_args.out, "Output path prefix");

  ModelsArgs models_args;
  auto* models = app.add_subcommand("models", "Confidence set of low-dimensional models");
  models->add_option("--data", models_args.data, "Input CSV with a header row")
      ->required()
      ->check(CLI::ExistingFile);
  models->add_option("--response", models_args.response, "Response column name")->required();
  auto* models_shat =
      models->add_option("--s-hat", models_args.s_hat,
                         "Encompassing set as 0-based column indices (comma separated)")
          ->delimiter(',');
  auto* models_screen =
      models->add_flag("--screen", models_args.screen, "Build the encompassing set by screening");
  models->add_option("--stability-reps", models_args.stability_reps,
                     "Half-sample repeats for the stability screen (0 = plain screen)");
  models->add_option("--screen-size", models_args.screen_size,
                     "Marginal screen size (0 = floor(n/3))");
  models->add_option("--max-size", models_args.max_size, "Largest submodel size enumerated");
  models->add_option("--alpha-f", models_args.alpha_f, "F-test rejection level")
      ->check(CLI::Range(0.0, 1.0));
  models->add_option("--alpha", models_args.alpha, "Interval miscoverage level for the CI filter")
      ->check(CLI::Range(0.0, 1.0));
  models->add_option("--delta", models_args.delta, "Ridge regularization level")
      ->check(CLI::PositiveNumber);
  auto* models_a = models->add_option("--a", models_args.a, "Numerator constant (default: delta)");
  auto* models_tau = models->add_option("--tau", models_args.tau,
                                        "Known error variance (default: estimate by sample split)");
  models->add_option("--slack", models_args.slack,
                     "CI widening multiplier for the compatibility filter");
  auto* models_seed = models->add_option("--seed", models_args.seed, "Master seed (64-bit)");
  models->add_option("--out", models_args.out, "Output path prefix");

  SimulateArgs sim_args;
  auto* simulate = app.add_subcommand("simulate", "Seeded coverage experiments");
  auto* sim_config = simulate->add_option("--config", sim_args.config, "SimConfig JSON file")
                         ->check(CLI::ExistingFile);
  auto* sim_table1 = simulate->add_flag("--table1", sim_args.table1,
                                        "Run the eight-cell factorial coverage study");
  simulate->add_option("--reps", sim_args.reps, "Override replication count");
  auto* sim_seed = simulate->add_option("--seed", sim_args.seed, "Master seed (64-bit)");
  simulate->add_option("--out", sim_args.out, "Output path prefix");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  const std::string command = join_args(argc, argv);
  try {
    if (app.got_subcommand(infer)) {
      infer_args.a_set = infer_a->count() > 0;
      infer_args.tau_set = infer_tau->count() > 0;
      infer_args.seed_set = infer_seed->count() > 0;
      return run_infer(infer_args, command, threads);
    }
    if (app.got_subcommand(models)) {
      models_args.a_set = models_a->count() > 0;
      models_args.tau_set = models_tau->count() > 0;
      models_args.seed_set = models_seed->count() > 0;
      if ((models_shat->count() > 0) == (models_screen->count() > 0))
        throw orthoinfer::DataError("models: give exactly one of --s-hat or --screen");
      return run_models(models_args, command, threads);
    }
    if (app.got_subcommand(simulate)) {
      sim_args.seed_set = sim_seed->count() > 0;
      if ((sim_config->count() > 0) == (sim_table1->count() > 0))
        throw orthoinfer::DataError("simulate: give exactly one of --config or --table1");
      return run_simulate(sim_args, command, threads);
    }
    throw orthoinfer::DataError("no subcommand selected");
  } catch (const orthoinfer::SizingError& e) {
    std::cerr << "error (sizing): " << e.what() << "\n";
    return 4;
  } catch (const orthoinfer::NumericError& e) {
    std::cerr << "error (numeric): " << e.what() << "\n";
    return 3;
  } catch (const orthoinfer::DataError& e) {
    std::cerr << "error (input): " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
