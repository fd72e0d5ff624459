// Command-line entry points: gen, synth, eval, bench, serve.
// Exit codes: 0 ok, 2 usage, 3 data or oracle, 4 environment.

#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "trajsynth/active_learning.hpp"
#include "trajsynth/bench.hpp"
#include "trajsynth/dataset_io.hpp"
#include "trajsynth/serialize.hpp"
#include "trajsynth/service.hpp"
#include "trajsynth/synthetic.hpp"
#include "trajsynth/tasks.hpp"

using namespace trajsynth;

namespace {

constexpr int kUsage = 2;
constexpr int kData = 3;
constexpr int kEnv = 4;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Flags shared by synth, eval and serve.
struct LearnFlags {
  std::string dataset;
  std::string task;
  std::string regions;
  std::vector<std::string> predicates;
  std::string convention;
  int max_predicates = 3;
  int max_params = 2;
  std::vector<std::string> ops{"seq", "and"};
  int budget = kDefaultBudget;
  int steps = 25;
  int init_pos = 2;
  int init_neg = 10;
  std::uint64_t seed = 0;
  bool random_selector = false;
};

void add_data_flags(CLI::App* app, LearnFlags& f) {
  app->add_option("--dataset", f.dataset, "Dataset file (.json or .csv)")->required();
  app->add_option("--task", f.task, "Scenario whose predicates, regions and convention to use")
      ->check(CLI::IsMember(scenario_names()));
  app->add_option("--regions", f.regions, "Region config JSON");
  app->add_option("--convention", f.convention, "Label convention")->check(CLI::IsMember({"sat", "sat-sub"}));
}

void add_learn_flags(CLI::App* app, LearnFlags& f) {
  add_data_flags(app, f);
  app->add_option("--predicates", f.predicates, "Predicates offered to the enumerator")->delimiter(',');
  app->add_option("--max-predicates", f.max_predicates, "Predicates per sketch")->check(CLI::Range(1, 6));
  app->add_option("--max-params", f.max_params, "Parameter holes per sketch")->check(CLI::Range(0, 6));
  app->add_option("--ops", f.ops, "Operators: seq, and, or, iterate")
      ->delimiter(',')
      ->check(CLI::IsMember({"seq", "and", "or", "iterate"}));
  app->add_option("--budget", f.budget, "Search steps per sketch per round")->check(CLI::PositiveNumber);
  app->add_option("--steps", f.steps, "Active-learning rounds")->check(CLI::NonNegativeNumber);
  app->add_option("--init-pos", f.init_pos, "Initial positive examples")->check(CLI::NonNegativeNumber);
  app->add_option("--init-neg", f.init_neg, "Initial negative examples")->check(CLI::NonNegativeNumber);
  app->add_option("--seed", f.seed, "Seed for the initial sample");
  app->add_flag("--random-selection", f.random_selector, "Pick questions at random instead of by disagreement");
}

// Everything a learner needs, owned in one place so pointers stay valid.
struct Session {
  Dataset data;
  std::unique_ptr<Registry> registry;
  LabelConvention convention = LabelConvention::SatSub;
  std::optional<Query> truth;
  LearnerSetup setup;
};

std::unique_ptr<Session> make_session(const LearnFlags& f, bool enumerate) {
  auto s = std::make_unique<Session>();
  s->data = load_dataset(f.dataset, format_for_path(f.dataset));
  const TaskDef* task = f.task.empty() ? nullptr : &task_def(f.task);
  RegionConfig regions;
  if (!f.regions.empty()) regions = parse_region_config(read_file(f.regions));
  else if (task) regions = scenario_regions();
  s->registry = std::make_unique<Registry>(builtin_registry(s->data, &regions));
  if (task) {
    s->convention = task->convention;
    s->truth = task_truth(*task);
  }
  if (!f.convention.empty()) s->convention = f.convention == "sat" ? LabelConvention::Sat : LabelConvention::SatSub;

  s->setup.data = &s->data;
  s->setup.registry = s->registry.get();
  s->setup.synth.convention = s->convention;
  s->setup.synth.per_sketch_budget = f.budget;
  s->setup.loop.steps = f.steps;
  s->setup.loop.initial_positives = f.init_pos;
  s->setup.loop.initial_negatives = f.init_neg;
  s->setup.loop.seed = f.seed;
  s->setup.loop.selector = f.random_selector ? Selector::Random : Selector::Disagreement;
  if (enumerate) {
    EnumConfig cfg = task ? task_enum_config(*task, *s->registry) : EnumConfig{};
    cfg.registry = s->registry.get();
    if (!task) {
      cfg.variables.clear();
      for (std::size_t i = 0; i < s->data.object_count; ++i) cfg.variables.push_back(static_cast<char>('A' + i));
    }
    if (!f.predicates.empty()) cfg.predicates = f.predicates;
    if (f.max_params > f.max_predicates) throw UsageError("--max-params exceeds --max-predicates");
    cfg.max_predicates = f.max_predicates;
    cfg.max_parameterized = f.max_params;
    cfg.operators.clear();
    for (const auto& op : f.ops) {
      if (op == "seq") cfg.operators.insert(Kind::Seq);
      else if (op == "and") cfg.operators.insert(Kind::And);
      else if (op == "or") cfg.operators.insert(Kind::Or);
      else cfg.operators.insert(Kind::Iterate);
    }
    s->setup.sketches = enumerate_sketches(cfg);
  }
  return s;
}

std::map<std::string, int> read_labels(const std::string& path) {
  const auto j = nlohmann::json::parse(read_file(path));
  std::map<std::string, int> out;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const int l = it.value().get<int>();
    if (l != 0 && l != 1) throw ParseError("labels file: label for " + it.key() + " must be 0 or 1");
    out[it.key()] = l;
  }
  return out;
}

int cmd_gen(const SyntheticSpec& spec, const std::string& out, const std::string& fmt) {
  const Dataset d = generate_synthetic(spec);
  const DataFormat f = fmt.empty() ? format_for_path(out) : fmt == "csv" ? DataFormat::Csv : DataFormat::Json;
  save_dataset(d, out, f);
  return 0;
}

int cmd_synth(const LearnFlags& f, const std::string& oracle_flag, const std::string& truth_text,
              const std::string& result_path, const std::string& transcript_path) {
  auto s = make_session(f, true);
  std::unique_ptr<Oracle> oracle;
  const std::string mode = oracle_flag.empty() ? (truth_text.empty() && !s->truth ? "labels" : "truth") : oracle_flag;
  if (mode == "truth") {
    Query q = truth_text.empty() ? (s->truth ? *s->truth : throw UsageError("--oracle truth needs --truth or --task"))
                                 : parse_query(truth_text);
    validate(q, *s->registry);
    oracle = std::make_unique<GroundTruthOracle>(q, *s->registry, s->convention);
  } else if (mode == "labels") {
    oracle = std::make_unique<FixedLabelsOracle>(s->data.labels);
  } else {
    oracle = std::make_unique<FixedLabelsOracle>(read_labels(mode));
  }
  ActiveLearner learner(s->setup);
  const Transcript t = run_loop(learner, *oracle);
  if (!result_path.empty()) write_file(result_path, synthesis_result_to_json(learner.result()));
  if (!transcript_path.empty()) write_file(transcript_path, transcript_to_json(t));
  else std::cout << transcript_to_json(t);
  return 0;
}

int cmd_eval(const LearnFlags& f, const std::string& query_text) {
  auto s = make_session(f, false);
  const Query q = parse_query(query_text);
  if (!is_complete(q)) throw UsageError("query has holes");
  validate(q, *s->registry);
  const Classifier c({q}, *s->registry, s->convention);
  std::vector<bool> pred;
  std::vector<int> truth;
  ojson matched = ojson::array();
  double tp = 0, fp = 0, fn = 0;
  for (const auto& z : s->data.trajectories) {
    const auto l = s->data.label_of(z.id);
    if (!l) throw SchemaError("trajectory " + z.id + " has no label");
    const bool p = c.predict(0, z);
    if (p) matched.push_back(z.id);
    pred.push_back(p);
    truth.push_back(*l);
    if (p && *l == 1) ++tp;
    else if (p) ++fp;
    else if (*l == 1) ++fn;
  }
  ojson j;
  j["query"] = print_query(q);
  j["precision"] = tp + fp > 0 ? tp / (tp + fp) : 0.0;
  j["recall"] = tp + fn > 0 ? tp / (tp + fn) : 0.0;
  j["f1"] = f1_score(pred, truth);
  j["matched"] = std::move(matched);
  std::cout << j.dump(2) << "\n";
  return 0;
}

struct BenchFlags {
  std::vector<std::string> tasks;
  std::string dataset;
  std::string sketches;
  std::uint64_t seed = 1;
  int pos = 20, neg = 40;
  double eps = 1e-3;
  int budget = kDefaultBudget;
  std::string out;
};

int cmd_bench(const BenchFlags& f) {
  std::vector<std::string> tasks = f.tasks;
  if (tasks.empty()) tasks = {"lane-turn", "speed-contrast", "maritime-loiter"};
  if (!f.dataset.empty() && tasks.size() != 1) throw UsageError("--dataset needs exactly one --task");
  std::vector<Dataset> data(tasks.size());
  std::vector<std::unique_ptr<Registry>> regs;
  std::vector<BenchInput> inputs;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const TaskDef& t = task_def(tasks[i]);
    if (!f.dataset.empty()) {
      data[i] = load_dataset(f.dataset, format_for_path(f.dataset));
    } else {
      SyntheticSpec spec;
      spec.scenario = t.name;
      spec.positives = f.pos;
      spec.negatives = f.neg;
      spec.seed = f.seed;
      data[i] = generate_synthetic(spec);
    }
    regs.push_back(std::make_unique<Registry>(task_registry(data[i])));
    BenchInput in;
    in.task = t.name;
    in.registry = regs.back().get();
    in.convention = t.convention;
    if (!f.sketches.empty()) {
      std::istringstream lines(read_file(f.sketches));
      for (std::string line; std::getline(lines, line);)
        if (!line.empty() && line[0] != '#') in.sketches.push_back(parse_query(line));
    } else {
      in.sketches = enumerate_sketches(task_enum_config(t, *in.registry));
    }
    for (const auto& z : data[i].trajectories)
      if (auto l = data[i].label_of(z.id)) in.examples.push_back({&z, *l});
    inputs.push_back(std::move(in));
  }
  const BenchReport r = run_bench(inputs, f.budget, f.eps);
  const std::string json = bench_report_to_json(r);
  if (!f.out.empty()) write_file(f.out, json);
  for (const auto& row : r.rows)
    std::cout << row.task << "\t" << row.method << "\t" << row.seconds << " s\t" << row.steps << " steps\t"
              << row.boxes_found << " consistent boxes\n";
  std::cout << "speedup " << r.speedup() << "x, classifications " << (r.identical() ? "identical" : "differ") << "\n";
  return 0;
}

int cmd_serve(const LearnFlags& f, const std::string& host, int port, const std::string& checkpoint,
              const std::string& static_dir) {
  auto s = make_session(f, true);
  LabelService svc(s->setup, ServiceOptions{checkpoint, static_dir});
  if (!svc.bind(host, port)) {
    std::cerr << "error: cannot listen on " << host << ":" << port << "\n";
    return kEnv;
  }
  std::cout << "listening on http://" << host << ":" << svc.port() << "\n" << std::flush;
  svc.run();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Trajectory query synthesis"};
  app.require_subcommand(1);

  SyntheticSpec spec;
  std::string gen_out, gen_format;
  auto* gen = app.add_subcommand("gen", "Generate a synthetic labeled dataset");
  gen->add_option("--scenario", spec.scenario, "Scenario")->required()->check(CLI::IsMember(scenario_names()));
  gen->add_option("--pos", spec.positives, "Positive trajectories")->check(CLI::NonNegativeNumber);
  gen->add_option("--neg", spec.negatives, "Negative trajectories")->check(CLI::NonNegativeNumber);
  gen->add_option("--noise", spec.noise, "Positional jitter, meters")->check(CLI::NonNegativeNumber);
  gen->add_option("--min-len", spec.min_length, "Shortest trajectory, frames");
  gen->add_option("--max-len", spec.max_length, "Longest trajectory, frames");
  gen->add_option("--seed", spec.seed, "Seed");
  gen->add_option("-o,--output", gen_out, "Output file")->required();
  gen->add_option("--format", gen_format, "json or csv (default: by extension)")->check(CLI::IsMember({"json", "csv"}));

  LearnFlags synth_flags;
  std::string oracle, truth, result_path, transcript_path;
  auto* synth = app.add_subcommand("synth", "Run the active-learning loop headlessly");
  add_learn_flags(synth, synth_flags);
  synth->add_option("--oracle", oracle, "truth, labels (dataset labels), or a labels JSON file");
  synth->add_option("--truth", truth, "Ground-truth query for --oracle truth");
  synth->add_option("--result", result_path, "Write the synthesis result JSON here");
  synth->add_option("--transcript", transcript_path, "Write the transcript JSON here (default stdout)");

  LearnFlags eval_flags;
  std::string eval_query;
  auto* eval = app.add_subcommand("eval", "Score a complete query against dataset labels");
  add_data_flags(eval, eval_flags);
  eval->add_option("--query", eval_query, "Complete query")->required();

  BenchFlags bench_flags;
  auto* bench = app.add_subcommand("bench", "Compare quantitative and bisection pruning pairs");
  bench->add_option("--task", bench_flags.tasks, "Scenario (repeatable)")->check(CLI::IsMember(scenario_names()));
  bench->add_option("--dataset", bench_flags.dataset, "Dataset instead of a generated one (single task)");
  bench->add_option("--sketches", bench_flags.sketches, "File with one sketch per line");
  bench->add_option("--seed", bench_flags.seed, "Generator seed");
  bench->add_option("--pos", bench_flags.pos, "Generated positives")->check(CLI::NonNegativeNumber);
  bench->add_option("--neg", bench_flags.neg, "Generated negatives")->check(CLI::NonNegativeNumber);
  bench->add_option("--eps", bench_flags.eps, "Bisection tolerance")->check(CLI::PositiveNumber);
  bench->add_option("--budget", bench_flags.budget, "Search steps per sketch")->check(CLI::PositiveNumber);
  bench->add_option("-o,--output", bench_flags.out, "Write the report JSON here");

  LearnFlags serve_flags;
  std::string host = "127.0.0.1", checkpoint, static_dir;
  int port = 8080;
  auto* serve = app.add_subcommand("serve", "Serve the labeling API");
  add_learn_flags(serve, serve_flags);
  serve->add_option("--host", host, "Listen address");
  serve->add_option("--port", port, "Listen port")->check(CLI::Range(0, 65535));
  serve->add_option("--checkpoint", checkpoint, "Session checkpoint file");
  serve->add_option("--static", static_dir, "Directory served at /");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsage;
  }

  try {
    if (*gen) return cmd_gen(spec, gen_out, gen_format);
    if (*synth) return cmd_synth(synth_flags, oracle, truth, result_path, transcript_path);
    if (*eval) return cmd_eval(eval_flags, eval_query);
    if (*bench) return cmd_bench(bench_flags);
    if (*serve) return cmd_serve(serve_flags, host, port, checkpoint, static_dir);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const SyntaxError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const QueryError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const UnknownPredicate& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kData;
  } catch (const std::exception& e) {
    // Parse, schema, sampling and oracle failures.
    std::cerr << "error: " << e.what() << "\n";
    return kData;
  }
  return kUsage;
}
