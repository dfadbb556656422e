#include <CLI11.hpp>

#include <iostream>

#include "molab/pipeline.hpp"

using namespace molab;

namespace {

void print_arch_info(PresetScale scale, PdeFamily family) {
  std::printf("%-12s %10s %10s  %s\n", "preset", "target", "params", "shape");
  for (const auto& name : preset_names()) {
    const ArchitectureSpec s = make_preset(name, alpha_length(family), scale);
    std::printf("%-12s %10lld %10lld  N=%d branch_out=%d", name.c_str(),
                static_cast<long long>(preset_target_parameters(name, scale)),
                static_cast<long long>(count_parameters(s)), s.trunk_count, s.branch_outputs());
    if (s.param_net_count) std::printf(" P=%d", *s.param_net_count);
    std::printf(" widths trunk/branch/param=%d/%d/%d\n", s.trunk.width, s.branch.width,
                s.has_param_net() ? s.param.width : 0);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multiple-operator learning toolkit: PDE data, operator networks, scaling calculators"};
  app.require_subcommand(1);
  app.fallthrough();
  std::uint64_t seed = 0;
  bool seed_given = false;
  app.add_option_function<std::uint64_t>(
         "--seed", [&](const std::uint64_t& s) { seed = s, seed_given = true; }, "Base seed for every sampler")
      ->default_str("0");

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "Solve a PDE family and write a dataset container");
  std::string family = "parametric-wave", mode = "in", role = "train", gen_out;
  int n_alpha = 1, n_ic = 1, nx_fine = 512, threads = 1;
  gen->add_option("--family", family, "PDE family")->required();
  gen->add_option("--n-alpha", n_alpha, "Number of parameter samples")->required();
  gen->add_option("--n-ic", n_ic, "Initial conditions per parameter")->required();
  gen->add_option("--mode", mode, "in | ood")->capture_default_str();
  gen->add_option("--role", role, "train | test")->capture_default_str();
  gen->add_option("--nx-fine", nx_fine, "Fine solver grid size")->capture_default_str();
  gen->add_option("--threads", threads, "Worker threads")->capture_default_str();
  gen->add_option("--out", gen_out, "Output path")->required();

  // train
  auto* tr = app.add_subcommand("train", "Train an architecture preset on a dataset");
  std::string arch = "mno-s", data, config_path, train_out, scale = "desk";
  std::optional<int> epochs, steps;
  std::optional<double> lr;
  tr->add_option("--arch", arch, "Preset name")->capture_default_str();
  tr->add_option("--data", data, "Training dataset")->required();
  tr->add_option("--config", config_path, "key=value config file");
  tr->add_option("--out", train_out, "Model output path")->required();
  tr->add_option("--scale", scale, "desk | paper")->capture_default_str();
  tr->add_option("--epochs", epochs, "Override epochs");
  tr->add_option("--steps-per-epoch", steps, "Override steps per epoch");
  tr->add_option("--lr", lr, "Override learning rate");

  // eval
  auto* ev = app.add_subcommand("eval", "Relative L2 report of a model on a dataset");
  std::string model, eval_data, report;
  std::optional<std::string> error_map;
  ev->add_option("--model", model, "Model file")->required();
  ev->add_option("--data", eval_data, "Test dataset")->required();
  ev->add_option("--report", report, "Report CSV path")->required();
  ev->add_option("--error-map", error_map, "Prefix for CSV/PGM error map of the worst sample");

  // scaling
  auto* sc = app.add_subcommand("scaling", "Network sizes for a target accuracy");
  ScalingArgs sargs;
  sc->add_option("--regime", sargs.regime, "single-ff | single-fcf | multi")
      ->check(CLI::IsMember({"single-ff", "single-fcf", "multi"}))
      ->capture_default_str();
  sc->add_option("--du", sargs.d_U, "Input function dimension")->required();
  sc->add_option("--dv", sargs.d_V, "Output function dimension")->required();
  sc->add_option("--dw", sargs.d_W, "Parameter function dimension (multi only)");
  sc->add_option("--eps", sargs.epsilon, "Target accuracy in (0, 1)")->required();
  sc->add_option("--constants", sargs.constants_path, "key=value constants file");
  sc->add_option("--csv", sargs.csv_out, "Also write the CSV to this path");

  // inspect-data
  auto* insp = app.add_subcommand("inspect-data", "Print a dataset summary");
  std::string inspect_path;
  insp->add_option("path", inspect_path, "Dataset container")->required();

  // pipeline
  auto* pipe = app.add_subcommand("pipeline", "gen-data, train and eval from one config file");
  std::string pipe_config;
  std::optional<std::string> pipe_out;
  pipe->add_option("--config", pipe_config, "key=value config file");
  pipe->add_option("--out-dir", pipe_out, "Override out_dir");

  // arch-info
  auto* info = app.add_subcommand("arch-info", "Parameter counts of every preset");
  std::string info_scale = "desk", info_family = "parametric-wave";
  info->add_option("--scale", info_scale, "desk | paper")->capture_default_str();
  info->add_option("--family", info_family, "Family that fixes alpha length")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      GenDataArgs g;
      g.family = parse_family(family);
      g.mode = parse_mode(mode);
      g.role = parse_role(role);
      g.n_alpha = n_alpha;
      g.n_ic = n_ic;
      g.seed = seed;
      g.nx_fine = nx_fine;
      g.threads = threads;
      g.out = gen_out;
      run_gen_data(g, std::cerr);
    } else if (tr->parsed()) {
      ExperimentConfig c = config_path.empty() ? ExperimentConfig{} : load_config(config_path);
      if (!config_path.empty() && tr->count("--arch") == 0) arch = c.architecture;
      if (!config_path.empty() && tr->count("--scale") == 0) scale = std::string(to_string(c.scale));
      set_config_key(c, "architecture", arch);
      set_config_key(c, "scale", scale);
      if (seed_given) set_config_key(c, "seed", std::to_string(seed));
      if (epochs) c.train.epochs = *epochs;
      if (steps) c.train.steps_per_epoch = *steps;
      if (lr) c.train.learning_rate = *lr;
      c.train.validate();
      run_train({c, data, train_out}, std::cerr);
    } else if (ev->parsed()) {
      run_eval({model, eval_data, report, error_map}, std::cout);
    } else if (sc->parsed()) {
      run_scaling(sargs, std::cout);
    } else if (insp->parsed()) {
      run_inspect_data(inspect_path, std::cout);
    } else if (pipe->parsed()) {
      ExperimentConfig c = pipe_config.empty() ? ExperimentConfig{} : load_config(pipe_config);
      if (pipe_out) c.out_dir = *pipe_out;
      if (seed_given) set_config_key(c, "seed", std::to_string(seed));
      run_pipeline(c, std::cerr);
    } else if (info->parsed()) {
      print_arch_info(parse_scale(info_scale), parse_family(info_family));
    }
  } catch (const std::exception& e) {
    std::string msg = e.what();
    for (auto& ch : msg)
      if (ch == '\n') ch = ' ';
    std::cerr << "error: " << msg << '\n';
    return 1;
  }
  return 0;
}
