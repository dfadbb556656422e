#include "molab/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace molab {

std::string_view to_string(PresetScale scale) { return scale == PresetScale::Desk ? "desk" : "paper"; }

PresetScale parse_scale(std::string_view s) {
  if (s == "desk") return PresetScale::Desk;
  if (s == "paper") return PresetScale::Paper;
  throw DomainError("unknown scale '" + std::string(s) + "' (expected desk or paper)");
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(std::string_view v, std::string_view key, int line) {
  T out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size() || v.empty()) {
    const char* kind = std::is_floating_point_v<T> ? "a number" : "an integer";
    throw ConfigError(line, std::string(key) + " expects " + kind + ", got '" + std::string(v) + "'");
  }
  return out;
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

using Setter = std::function<void(ExperimentConfig&, std::string_view, int)>;

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = [] {
    std::map<std::string, Setter, std::less<>> t;
    t["family"] = [](ExperimentConfig& c, std::string_view v, int) { c.family = parse_family(v); };
    t["architecture"] = [](ExperimentConfig& c, std::string_view v, int) { c.architecture = std::string(v); };
    t["scale"] = [](ExperimentConfig& c, std::string_view v, int) { c.scale = parse_scale(v); };
    t["mode"] = [](ExperimentConfig& c, std::string_view v, int) { c.mode = parse_mode(v); };
    t["seed"] = [](ExperimentConfig& c, std::string_view v, int line) {
      c.seed = parse_number<std::uint64_t>(v, "seed", line);
      c.train.seed = c.seed;
    };
    auto integer = [](int ExperimentConfig::*f, const char* name) -> Setter {
      return [f, name](ExperimentConfig& c, std::string_view v, int line) { c.*f = parse_number<int>(v, name, line); };
    };
    t["train_alphas"] = integer(&ExperimentConfig::train_alphas, "train_alphas");
    t["train_ics"] = integer(&ExperimentConfig::train_ics, "train_ics");
    t["test_alphas"] = integer(&ExperimentConfig::test_alphas, "test_alphas");
    t["test_ics"] = integer(&ExperimentConfig::test_ics, "test_ics");
    t["nx_fine"] = integer(&ExperimentConfig::nx_fine, "nx_fine");
    t["threads"] = integer(&ExperimentConfig::threads, "threads");

    auto train_real = [](double TrainConfig::*f, const char* name) -> Setter {
      return [f, name](ExperimentConfig& c, std::string_view v, int line) {
        c.train.*f = parse_number<double>(v, name, line);
      };
    };
    auto train_int = [](int TrainConfig::*f, const char* name) -> Setter {
      return [f, name](ExperimentConfig& c, std::string_view v, int line) {
        c.train.*f = parse_number<int>(v, name, line);
      };
    };
    t["learning_rate"] = train_real(&TrainConfig::learning_rate, "learning_rate");
    t["warmup_fraction"] = train_real(&TrainConfig::warmup_fraction, "warmup_fraction");
    t["weight_decay"] = train_real(&TrainConfig::weight_decay, "weight_decay");
    t["grad_clip_norm"] = train_real(&TrainConfig::grad_clip_norm, "grad_clip_norm");
    t["batch_data"] = train_int(&TrainConfig::batch_data, "batch_data");
    t["batch_task"] = train_int(&TrainConfig::batch_task, "batch_task");
    t["epochs"] = train_int(&TrainConfig::epochs, "epochs");
    t["steps_per_epoch"] = train_int(&TrainConfig::steps_per_epoch, "steps_per_epoch");
    t["scheduler"] = [](ExperimentConfig& c, std::string_view v, int) { c.train.scheduler = std::string(v); };

    auto text = [](std::string ExperimentConfig::*f) -> Setter {
      return [f](ExperimentConfig& c, std::string_view v, int) { c.*f = std::string(v); };
    };
    t["out_dir"] = text(&ExperimentConfig::out_dir);
    t["train_data"] = text(&ExperimentConfig::train_data);
    t["test_data"] = text(&ExperimentConfig::test_data);
    t["model"] = text(&ExperimentConfig::model);
    t["report"] = text(&ExperimentConfig::report);
    return t;
  }();
  return table;
}

}  // namespace

void set_config_key(ExperimentConfig& config, std::string_view key, std::string_view value, int line) {
  const auto& table = setters();
  const auto it = table.find(key);
  if (it == table.end()) throw ConfigError(line, "unknown key '" + std::string(key) + "'");
  try {
    it->second(config, value, line);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(line, e.what());
  }
}

ExperimentConfig parse_config(std::string_view text) {
  ExperimentConfig c;
  std::set<std::string, std::less<>> seen;
  int line = 0;
  while (!text.empty()) {
    ++line;
    const auto nl = text.find('\n');
    std::string_view raw = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    raw = trim(raw);
    if (raw.empty()) continue;
    const auto eq = raw.find('=');
    if (eq == std::string_view::npos) throw ConfigError(line, "expected key=value, got '" + std::string(raw) + "'");
    const std::string_view key = trim(raw.substr(0, eq));
    const std::string_view value = trim(raw.substr(eq + 1));
    if (key.empty()) throw ConfigError(line, "missing key before '='");
    if (!seen.insert(std::string(key)).second) throw ConfigError(line, "duplicate key '" + std::string(key) + "'");
    set_config_key(c, key, value, line);
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

void ExperimentConfig::validate() const {
  const auto names = preset_names();
  if (std::find(names.begin(), names.end(), architecture) == names.end())
    throw DomainError("unknown architecture preset '" + architecture + "'");
  if (train_alphas < 1 || train_ics < 1 || test_alphas < 1 || test_ics < 1)
    throw DomainError("dataset sizes must be positive");
  if (nx_fine < 64 || nx_fine % 64 != 0) throw DomainError("nx_fine must be a positive multiple of 64");
  if (threads < 1) throw DomainError("threads must be >= 1");
  train.validate();
  const std::set<std::string> paths{path(train_data), path(test_data), path(model), path(report)};
  if (paths.size() != 4) throw DomainError("train_data, test_data, model and report must be distinct paths");
}

std::string ExperimentConfig::path(const std::string& file) const {
  if (file.empty() || file.front() == '/' || out_dir.empty()) return file;
  return out_dir + "/" + file;
}

std::string ExperimentConfig::canonical() const {
  std::ostringstream o;
  o << "family=" << to_string(family) << '\n'
    << "architecture=" << architecture << '\n'
    << "scale=" << to_string(scale) << '\n'
    << "mode=" << to_string(mode) << '\n'
    << "seed=" << seed << '\n'
    << "train_alphas=" << train_alphas << '\n'
    << "train_ics=" << train_ics << '\n'
    << "test_alphas=" << test_alphas << '\n'
    << "test_ics=" << test_ics << '\n'
    << "nx_fine=" << nx_fine << '\n'
    << "threads=" << threads << '\n'
    << "learning_rate=" << fmt_double(train.learning_rate) << '\n'
    << "scheduler=" << train.scheduler << '\n'
    << "warmup_fraction=" << fmt_double(train.warmup_fraction) << '\n'
    << "weight_decay=" << fmt_double(train.weight_decay) << '\n'
    << "grad_clip_norm=" << fmt_double(train.grad_clip_norm) << '\n'
    << "batch_data=" << train.batch_data << '\n'
    << "batch_task=" << train.batch_task << '\n'
    << "epochs=" << train.epochs << '\n'
    << "steps_per_epoch=" << train.steps_per_epoch << '\n'
    << "out_dir=" << out_dir << '\n'
    << "train_data=" << train_data << '\n'
    << "test_data=" << test_data << '\n'
    << "model=" << model << '\n'
    << "report=" << report << '\n';
  return o.str();
}

std::uint64_t ExperimentConfig::hash() const {
  // threads changes scheduling only, never bytes.
  std::string text = canonical();
  const auto at = text.find("threads=");
  text.erase(at, text.find('\n', at) + 1 - at);
  return fnv1a64(text);
}

}  // namespace molab
