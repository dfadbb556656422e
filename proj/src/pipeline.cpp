#include "molab/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "molab/seeds.hpp"

namespace molab {

namespace {

constexpr std::uint64_t kInitTag = 0x696E6974;  // "init"
constexpr std::uint64_t kStepTag = 0x73746570;  // "step"

std::string hex64(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void ensure_parent(const std::string& path) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
}

std::string args_hash(const Manifest& m) {
  std::string text;
  for (const auto& [k, v] : m) text += k + "=" + v + "\n";
  return hex64(fnv1a64(text));
}

Manifest with_config(Manifest m, const ExperimentConfig& c) {
  std::istringstream lines(c.canonical());
  std::string line;
  while (std::getline(lines, line)) {
    const auto eq = line.find('=');
    if (line.compare(0, eq, "threads") == 0) continue;
    m.emplace_back("config." + line.substr(0, eq), line.substr(eq + 1));
  }
  return m;
}

}  // namespace

std::string manifest_path(const std::string& artifact_path) { return artifact_path + ".manifest"; }

void write_manifest(const std::string& artifact_path, const Manifest& entries) {
  const std::string p = manifest_path(artifact_path);
  std::ofstream f(p);
  if (!f) throw Error("cannot open '" + p + "' for writing");
  for (const auto& [k, v] : entries) f << k << '=' << v << '\n';
  if (!f) throw Error("write to '" + p + "' failed");
}

DatasetSplit run_gen_data(const GenDataArgs& a, std::ostream& log) {
  if (a.out.empty()) throw Error("gen-data needs an output path");
  BuildOptions opts;
  opts.solver.nx_fine = a.nx_fine;
  opts.threads = a.threads;
  opts.log = &log;
  DatasetSplit split = build_split(a.family, a.role, a.mode, a.n_alpha, a.n_ic, a.seed, opts);
  ensure_parent(a.out);
  write_dataset(split, a.out);

  Manifest args{{"family", std::string(to_string(a.family))},
                {"mode", std::string(to_string(a.mode))},
                {"role", std::string(to_string(a.role))},
                {"n_alpha", std::to_string(a.n_alpha)},
                {"n_ic", std::to_string(a.n_ic)},
                {"seed", std::to_string(a.seed)},
                {"nx_fine", std::to_string(a.nx_fine)}};
  Manifest m{{"command", "gen-data"}, {"tool_version", kToolVersion}, {"config_hash", args_hash(args)}};
  m.insert(m.end(), args.begin(), args.end());
  m.emplace_back("format", "MOLD1");
  m.emplace_back("output", a.out);
  write_manifest(a.out, m);
  log << "wrote " << split.samples.size() << " samples to " << a.out << '\n';
  return split;
}

ModelState run_train(const TrainArgs& a, std::ostream& log) {
  const ExperimentConfig& c = a.config;
  if (a.out.empty()) throw Error("train needs an output path");
  const DatasetSplit split = read_dataset(a.data);
  if (split.role != SplitRole::Train)
    log << "note: training on a split tagged '" << to_string(split.role) << "'\n";

  const ArchitectureSpec spec = make_preset(c.architecture, alpha_length(split.family), c.scale);
  ModelState model = init_model(spec, derive_seed(c.seed, {kInitTag}));
  TrainConfig tc = c.train;
  tc.seed = derive_seed(c.seed, {kStepTag});
  log << c.architecture << " (" << to_string(c.scale) << "): " << model.parameter_count() << " parameters, "
      << tc.total_steps() << " steps on " << split.samples.size() << " samples\n";

  const TrainResult result = train(std::move(model), split, tc, [&](const EpochStats& e) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "epoch %d  loss %.6e  lr %.3e\n", e.epoch, e.mean_loss, e.lr);
    log << buf;
  });

  ensure_parent(a.out);
  write_model(a.out, result.model, static_cast<std::uint8_t>(split.family));
  const std::string log_path = a.out + ".loss.csv";
  write_training_log(result.epochs, log_path);

  Manifest m{{"command", "train"}, {"tool_version", kToolVersion}, {"config_hash", hex64(c.hash())},
             {"seed", std::to_string(c.seed)}, {"init_seed", std::to_string(derive_seed(c.seed, {kInitTag}))},
             {"step_seed", std::to_string(tc.seed)}, {"data", a.data}, {"family", std::string(to_string(split.family))},
             {"parameters", std::to_string(result.model.parameter_count())},
             {"final_loss", fmt(result.loss_history.back())}, {"format", "MOLA1"}, {"output", a.out}};
  m = with_config(std::move(m), c);
  write_manifest(a.out, m);
  Manifest lm{{"command", "train"}, {"tool_version", kToolVersion}, {"config_hash", hex64(c.hash())},
              {"seed", std::to_string(c.seed)}, {"model", a.out}, {"output", log_path}};
  write_manifest(log_path, lm);
  return result.model;
}

EvalReport run_eval(const EvalArgs& a, std::ostream& log) {
  const ModelFile mf = read_model(a.model);
  const DatasetSplit split = read_dataset(a.data);
  if (mf.family_tag && *mf.family_tag != static_cast<std::uint8_t>(split.family)) {
    const auto trained = static_cast<PdeFamily>(*mf.family_tag);
    throw Error("family mismatch: model '" + a.model + "' was trained on " + std::string(to_string(trained)) +
                " but dataset '" + a.data + "' is " + std::string(to_string(split.family)));
  }
  EvalReport report = evaluate(mf.model, split);
  if (a.report.empty()) throw Error("eval needs a report path");
  ensure_parent(a.report);
  write_report_csv(report, a.report);
  Manifest m{{"command", "eval"},
             {"tool_version", kToolVersion},
             {"config_hash", args_hash({{"model", a.model}, {"data", a.data}})},
             {"model", a.model},
             {"data", a.data},
             {"family", std::string(to_string(split.family))},
             {"mode", std::string(to_string(split.mode))},
             {"architecture", report.architecture},
             {"samples", std::to_string(report.errors.size())},
             {"mean_rel_l2", fmt(report.mean_error)},
             {"output", a.report}};
  write_manifest(a.report, m);

  if (a.error_map_prefix && !split.samples.empty()) {
    const auto worst = static_cast<std::size_t>(
        std::max_element(report.errors.begin(), report.errors.end()) - report.errors.begin());
    const auto& s = split.samples[worst];
    const std::string csv = *a.error_map_prefix + ".csv", pgm = *a.error_map_prefix + ".pgm";
    ensure_parent(csv);
    export_error_map(predict_field(mf.model, s), s.target, csv, pgm);
    for (const auto& out : {csv, pgm}) {
      Manifest em{{"command", "eval"}, {"tool_version", kToolVersion}, {"model", a.model}, {"data", a.data},
                  {"sample_index", std::to_string(worst)}, {"output", out}};
      write_manifest(out, em);
    }
  }
  char buf[128];
  std::snprintf(buf, sizeof buf, "%s on %zu samples: mean relative L2 %.4f%%\n", report.architecture.c_str(),
                report.errors.size(), 100.0 * report.mean_error);
  log << buf;
  return report;
}

ScalingConstants load_scaling_constants(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot open constants file '" + path + "'");
  ScalingConstants c;
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
    line.erase(std::remove_if(line.begin(), line.end(), [](char ch) { return ch == ' ' || ch == '\t' || ch == '\r'; }),
               line.end());
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(lineno, "expected key=value");
    const std::string key = line.substr(0, eq);
    double v = 0;
    std::size_t used = 0;
    try {
      v = std::stod(line.substr(eq + 1), &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != line.size() - eq - 1) throw ConfigError(lineno, key + " expects a number");
    if (key == "C") c.C = v;
    else if (key == "C_prime") c.C_prime = v;
    else if (key == "C_double_prime") c.C_double_prime = v;
    else if (key == "C_delta") c.C_delta = v;
    else if (key == "C_zeta") c.C_zeta = v;
    else if (key == "gamma_U") c.gamma_U = v;
    else if (key == "gamma_W") c.gamma_W = v;
    else throw ConfigError(lineno, "unknown key '" + key + "'");
  }
  return c;
}

SizeReport run_scaling(const ScalingArgs& a, std::ostream& out) {
  ScalingQuery q;
  q.d_U = a.d_U;
  q.d_V = a.d_V;
  q.d_W = a.d_W;
  q.epsilon = a.epsilon;
  if (a.constants_path) q.constants = load_scaling_constants(*a.constants_path);
  SizeReport r;
  if (a.regime == "single-ff") {
    q.order = ApproximationOrder::FunctionFirst;
    r = scaling_single(q);
  } else if (a.regime == "single-fcf") {
    q.order = ApproximationOrder::FunctionalFirst;
    r = scaling_single(q);
  } else if (a.regime == "multi") {
    r = scaling_multi(q);
  } else {
    throw DomainError("unknown regime '" + a.regime + "' (expected single-ff, single-fcf or multi)");
  }
  print_size_report(r, out);
  out << '\n';
  write_size_report_csv(r, out);
  if (a.csv_out) {
    ensure_parent(*a.csv_out);
    std::ofstream f(*a.csv_out);
    if (!f) throw Error("cannot open '" + *a.csv_out + "' for writing");
    write_size_report_csv(r, f);
    Manifest m{{"command", "scaling"}, {"tool_version", kToolVersion}, {"regime", a.regime},
               {"du", std::to_string(a.d_U)}, {"dv", std::to_string(a.d_V)},
               {"dw", a.d_W ? std::to_string(*a.d_W) : "none"}, {"eps", fmt(a.epsilon)},
               {"constants", a.constants_path.value_or("default")}, {"output", *a.csv_out}};
    write_manifest(*a.csv_out, m);
  }
  return r;
}

void run_inspect_data(const std::string& path, std::ostream& out) {
  const DatasetSplit split = read_dataset(path);
  out << "file: " << path << '\n';
  print_dataset_summary(split, out);
}

namespace {
GenDataArgs gen_args(const ExperimentConfig& c, SplitRole role) {
  GenDataArgs g;
  g.family = c.family;
  g.mode = role == SplitRole::Train ? SampleMode::In : c.mode;
  g.role = role;
  g.n_alpha = role == SplitRole::Train ? c.train_alphas : c.test_alphas;
  g.n_ic = role == SplitRole::Train ? c.train_ics : c.test_ics;
  g.seed = c.seed;
  g.nx_fine = c.nx_fine;
  g.threads = c.threads;
  g.out = c.path(role == SplitRole::Train ? c.train_data : c.test_data);
  return g;
}
}  // namespace

EvalReport run_pipeline(const ExperimentConfig& c, std::ostream& log) {
  c.validate();
  run_gen_data(gen_args(c, SplitRole::Train), log);
  run_gen_data(gen_args(c, SplitRole::Test), log);
  run_train({c, c.path(c.train_data), c.path(c.model)}, log);
  return run_eval({c.path(c.model), c.path(c.test_data), c.path(c.report), {}}, log);
}

int run(std::string_view command, const ExperimentConfig& c, std::ostream& out, std::ostream& err) {
  try {
    c.validate();
    if (command == "gen-data") {
      run_gen_data(gen_args(c, SplitRole::Train), out);
      run_gen_data(gen_args(c, SplitRole::Test), out);
    } else if (command == "train") {
      run_train({c, c.path(c.train_data), c.path(c.model)}, out);
    } else if (command == "eval") {
      run_eval({c.path(c.model), c.path(c.test_data), c.path(c.report), {}}, out);
    } else if (command == "scaling") {
      run_scaling({}, out);
    } else if (command == "inspect-data") {
      run_inspect_data(c.path(c.train_data), out);
      run_inspect_data(c.path(c.test_data), out);
    } else if (command == "pipeline") {
      run_pipeline(c, out);
    } else {
      throw Error("unknown command '" + std::string(command) + "'");
    }
  } catch (const std::exception& e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    err << "error: " << msg << '\n';
    return 1;
  }
  return 0;
}

}  // namespace molab
