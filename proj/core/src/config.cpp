#include "tgrpo/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <set>
#include <sstream>

#include "tgrpo/errors.hpp"

namespace tgrpo {
namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    parts.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

[[noreturn]] void fail(const std::string& key, const std::string& what) {
  throw ConfigError("config key '" + key + "': " + what);
}

double parse_double(const std::string& key, const std::string& text) {
  double value = 0.0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || text.empty()) {
    fail(key, "expected a number, got '" + text + "'");
  }
  return value;
}

std::uint64_t parse_uint(const std::string& key, const std::string& text) {
  std::uint64_t value = 0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || text.empty()) {
    fail(key, "expected a non-negative integer, got '" + text + "'");
  }
  return value;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true") return true;
  if (text == "false") return false;
  fail(key, "expected true or false, got '" + text + "'");
}

std::vector<double> parse_doubles(const std::string& key, const std::string& text) {
  std::vector<double> out;
  if (trim(text).empty()) return out;
  for (const std::string& part : split(text, ',')) out.push_back(parse_double(key, part));
  return out;
}

Vec3 parse_vec3(const std::string& key, const std::string& text) {
  const std::vector<double> v = parse_doubles(key, text);
  if (v.size() != 3) fail(key, "expected 3 comma-separated numbers");
  return {v[0], v[1], v[2]};
}

std::string join(const std::vector<double>& values) {
  std::string out;
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (k > 0) out += ", ";
    out += format_double(values[k]);
  }
  return out;
}

std::string join_vec3(const Vec3& v) { return join({v[0], v[1], v[2]}); }

using Setter = std::function<void(ExperimentConfig&, const std::string& key,
                                  const std::string& value)>;

const std::map<std::string, std::map<std::string, Setter>>& setters() {
  static const auto* table = new std::map<std::string, std::map<std::string, Setter>>{
      {"train",
       {
           {"group_size", [](auto& c, auto& k, auto& v) { c.train.group_size = parse_uint(k, v); }},
           {"alpha_step", [](auto& c, auto& k, auto& v) { c.train.weights.alpha_step = parse_double(k, v); }},
           {"alpha_traj", [](auto& c, auto& k, auto& v) { c.train.weights.alpha_traj = parse_double(k, v); }},
           {"clip_epsilon", [](auto& c, auto& k, auto& v) { c.train.clip_epsilon = parse_double(k, v); }},
           {"kl_beta", [](auto& c, auto& k, auto& v) { c.train.kl_beta = parse_double(k, v); }},
           {"learning_rate", [](auto& c, auto& k, auto& v) { c.train.optimizer.learning_rate = parse_double(k, v); }},
           {"adam_beta1", [](auto& c, auto& k, auto& v) { c.train.optimizer.beta1 = parse_double(k, v); }},
           {"adam_beta2", [](auto& c, auto& k, auto& v) { c.train.optimizer.beta2 = parse_double(k, v); }},
           {"adam_epsilon", [](auto& c, auto& k, auto& v) { c.train.optimizer.epsilon = parse_double(k, v); }},
           {"weight_decay", [](auto& c, auto& k, auto& v) { c.train.optimizer.weight_decay = parse_double(k, v); }},
           {"updates", [](auto& c, auto& k, auto& v) { c.train.updates = parse_uint(k, v); }},
           {"epochs", [](auto& c, auto& k, auto& v) { c.train.epochs = parse_uint(k, v); }},
           {"eval_episodes", [](auto& c, auto& k, auto& v) { c.train.eval_episodes = parse_uint(k, v); }},
           {"eval_every", [](auto& c, auto& k, auto& v) { c.train.eval_every = parse_uint(k, v); }},
           {"seed", [](auto& c, auto& k, auto& v) { c.train.seed = parse_uint(k, v); }},
           {"hidden", [](auto& c, auto& k, auto& v) {
              c.train.hidden.clear();
              for (const std::string& part : split(v, ',')) c.train.hidden.push_back(parse_uint(k, part));
            }},
           {"audit_gradients", [](auto& c, auto& k, auto& v) { c.train.audit_gradients = parse_bool(k, v); }},
       }},
      {"task",
       {
           {"workspace_low", [](auto& c, auto& k, auto& v) { c.task.workspace_low = parse_vec3(k, v); }},
           {"workspace_high", [](auto& c, auto& k, auto& v) { c.task.workspace_high = parse_vec3(k, v); }},
           {"spawn_fraction", [](auto& c, auto& k, auto& v) { c.task.spawn_fraction = parse_double(k, v); }},
           {"grasp_radius", [](auto& c, auto& k, auto& v) { c.task.grasp_radius = parse_double(k, v); }},
           {"goal_radius", [](auto& c, auto& k, auto& v) { c.task.goal_radius = parse_double(k, v); }},
           {"step_size", [](auto& c, auto& k, auto& v) { c.task.step_size = parse_double(k, v); }},
           {"max_steps", [](auto& c, auto& k, auto& v) { c.task.max_steps = parse_uint(k, v); }},
           {"seed", [](auto& c, auto& k, auto& v) { c.task.seed = parse_uint(k, v); }},
       }},
      {"reward",
       {
           {"base_rewards", [](auto& c, auto& k, auto& v) {
              const std::vector<double> b = parse_doubles(k, v);
              if (b.size() != kStageCount) fail(k, "expected 4 stage base rewards");
              std::copy(b.begin(), b.end(), c.reward.base_rewards.begin());
            }},
           {"progress_fraction", [](auto& c, auto& k, auto& v) { c.reward.progress_fraction = parse_double(k, v); }},
           {"shaping_weight", [](auto& c, auto& k, auto& v) { c.reward.shaping_weight = parse_double(k, v); }},
           {"length_scale", [](auto& c, auto& k, auto& v) { c.reward.length_scale = parse_double(k, v); }},
           {"keyposes", [](auto& c, auto& k, auto& v) {
              c.reward.explicit_keyposes.clear();
              if (v == "expert") return;
              for (const std::string& pose : split(v, ';')) {
                c.reward.explicit_keyposes.push_back(parse_vec3(k, pose));
              }
            }},
       }},
      {"sweep",
       {
           {"axis", [](auto& c, auto& k, auto& v) {
              if (v == "none") c.sweep.axis = SweepAxis::kNone;
              else if (v == "alpha_step") c.sweep.axis = SweepAxis::kAlphaStep;
              else if (v == "group_size") c.sweep.axis = SweepAxis::kGroupSize;
              else fail(k, "expected none, alpha_step or group_size, got '" + v + "'");
            }},
           {"values", [](auto& c, auto& k, auto& v) { c.sweep.values = parse_doubles(k, v); }},
           {"repetitions", [](auto& c, auto& k, auto& v) { c.sweep.repetitions = parse_uint(k, v); }},
       }},
  };
  return *table;
}

}  // namespace

const char* sweep_axis_name(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::kNone: return "none";
    case SweepAxis::kAlphaStep: return "alpha_step";
    case SweepAxis::kGroupSize: return "group_size";
  }
  return "none";
}

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc()) throw FormatError("cannot format double");
  return std::string(buf, ptr);
}

void ExperimentConfig::validate() const {
  train.validate();
  task.validate();
  reward.validate();
  if (sweep.repetitions < 1) throw ConfigError("sweep.repetitions must be >= 1");
  if (sweep.axis != SweepAxis::kNone && sweep.values.empty()) {
    throw ConfigError("sweep.values must be nonempty when sweep.axis is set");
  }
  for (double v : sweep.values) {
    if (sweep.axis == SweepAxis::kAlphaStep && !(v >= 0.0 && v <= 1.0)) {
      throw ConfigError("sweep.values: alpha_step value " + format_double(v) +
                        " outside [0, 1]");
    }
    if (sweep.axis == SweepAxis::kGroupSize && (v < 2.0 || v != std::floor(v))) {
      throw ConfigError("sweep.values: group size " + format_double(v) +
                        " must be an integer >= 2");
    }
  }
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig config;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  std::set<std::string> seen;
  bool have_version = false;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(std::string_view(raw).substr(0, hash));
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(line_no) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + "unterminated section header");
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      if (setters().count(section) == 0) {
        throw ConfigError(where + "unknown section [" + section + "]");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected 'key = value'");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    const std::string qualified = section.empty() ? key : section + "." + key;
    if (!seen.insert(qualified).second) {
      throw ConfigError(where + "duplicate key '" + qualified + "'");
    }
    if (section.empty()) {
      if (key != "schema_version") {
        throw ConfigError(where + "unknown top-level key '" + key + "'");
      }
      const std::uint64_t version = parse_uint(key, value);
      if (version != kConfigSchemaVersion) {
        throw ConfigError(where + "unsupported schema_version " + value);
      }
      have_version = true;
      continue;
    }
    const auto& keys = setters().at(section);
    const auto it = keys.find(key);
    if (it == keys.end()) throw ConfigError(where + "unknown key '" + qualified + "'");
    try {
      it->second(config, qualified, value);
    } catch (const ConfigError& e) {
      throw ConfigError(where + e.what());
    }
  }
  if (!have_version) throw ConfigError("config is missing schema_version");
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  const std::string text((std::istreambuf_iterator<char>(in)),
                         std::istreambuf_iterator<char>());
  return parse_config(text);
}

std::string serialize_config(const ExperimentConfig& c) {
  std::ostringstream out;
  out << "schema_version = " << kConfigSchemaVersion << "\n\n[train]\n";
  out << "group_size = " << c.train.group_size << '\n';
  out << "alpha_step = " << format_double(c.train.weights.alpha_step) << '\n';
  out << "alpha_traj = " << format_double(c.train.weights.alpha_traj) << '\n';
  out << "clip_epsilon = " << format_double(c.train.clip_epsilon) << '\n';
  out << "kl_beta = " << format_double(c.train.kl_beta) << '\n';
  out << "learning_rate = " << format_double(c.train.optimizer.learning_rate) << '\n';
  out << "adam_beta1 = " << format_double(c.train.optimizer.beta1) << '\n';
  out << "adam_beta2 = " << format_double(c.train.optimizer.beta2) << '\n';
  out << "adam_epsilon = " << format_double(c.train.optimizer.epsilon) << '\n';
  out << "weight_decay = " << format_double(c.train.optimizer.weight_decay) << '\n';
  out << "updates = " << c.train.updates << '\n';
  out << "epochs = " << c.train.epochs << '\n';
  out << "eval_episodes = " << c.train.eval_episodes << '\n';
  out << "eval_every = " << c.train.eval_every << '\n';
  out << "seed = " << c.train.seed << '\n';
  out << "hidden = ";
  for (std::size_t k = 0; k < c.train.hidden.size(); ++k) {
    out << (k ? ", " : "") << c.train.hidden[k];
  }
  out << '\n';
  out << "audit_gradients = " << (c.train.audit_gradients ? "true" : "false") << '\n';

  out << "\n[task]\n";
  out << "workspace_low = " << join_vec3(c.task.workspace_low) << '\n';
  out << "workspace_high = " << join_vec3(c.task.workspace_high) << '\n';
  out << "spawn_fraction = " << format_double(c.task.spawn_fraction) << '\n';
  out << "grasp_radius = " << format_double(c.task.grasp_radius) << '\n';
  out << "goal_radius = " << format_double(c.task.goal_radius) << '\n';
  out << "step_size = " << format_double(c.task.step_size) << '\n';
  out << "max_steps = " << c.task.max_steps << '\n';
  out << "seed = " << c.task.seed << '\n';

  out << "\n[reward]\n";
  out << "base_rewards = "
      << join({c.reward.base_rewards.begin(), c.reward.base_rewards.end()}) << '\n';
  out << "progress_fraction = " << format_double(c.reward.progress_fraction) << '\n';
  out << "shaping_weight = " << format_double(c.reward.shaping_weight) << '\n';
  out << "length_scale = " << format_double(c.reward.length_scale) << '\n';
  out << "keyposes = ";
  if (c.reward.explicit_keyposes.empty()) {
    out << "expert";
  } else {
    for (std::size_t k = 0; k < c.reward.explicit_keyposes.size(); ++k) {
      out << (k ? "; " : "") << join_vec3(c.reward.explicit_keyposes[k]);
    }
  }
  out << '\n';

  out << "\n[sweep]\n";
  out << "axis = " << sweep_axis_name(c.sweep.axis) << '\n';
  out << "values = " << join(c.sweep.values) << '\n';
  out << "repetitions = " << c.sweep.repetitions << '\n';
  return out.str();
}

std::uint64_t config_digest(const ExperimentConfig& config) {
  const std::string text = serialize_config(config);
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    hash ^= ch;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

std::string digest_hex(std::uint64_t digest) {
  static const char* kHex = "0123456789abcdef";
  std::string out(16, '0');
  for (int k = 15; k >= 0; --k) {
    out[static_cast<std::size_t>(k)] = kHex[digest & 0xf];
    digest >>= 4;
  }
  return out;
}

}  // namespace tgrpo
