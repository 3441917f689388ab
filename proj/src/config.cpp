#include "cpsro/config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "cpsro/error.hpp"

namespace cpsro {

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt_hidden(const std::vector<int>& widths) {
  std::string out;
  for (size_t i = 0; i < widths.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(widths[i]);
  }
  return out;
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

int to_int(const std::string& key, const std::string& value) {
  try {
    size_t pos = 0;
    const int v = std::stoi(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config: bad integer for '" + key + "': " + value);
  }
}

int64_t to_int64(const std::string& key, const std::string& value) {
  try {
    size_t pos = 0;
    const int64_t v = std::stoll(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config: bad integer for '" + key + "': " + value);
  }
}

double to_double(const std::string& key, const std::string& value) {
  try {
    size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config: bad number for '" + key + "': " + value);
  }
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "1" || value == "true") return true;
  if (value == "0" || value == "false") return false;
  throw ConfigError("config: bad boolean for '" + key + "': " + value);
}

std::vector<int> to_hidden(const std::string& key, const std::string& value) {
  std::vector<int> widths;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) widths.push_back(to_int(key, trim(item)));
  if (widths.empty()) throw ConfigError("config: empty width list for '" + key + "'");
  return widths;
}

}  // namespace

std::string serialize_config(const RunConfig& c) {
  std::ostringstream out;
  out << "game = " << c.game_id << "\n";
  out << "variant = " << c.variant << "\n";
  out << "iterations = " << c.iterations << "\n";
  out << "oracle_episodes = " << c.oracle_episodes << "\n";
  out << "diversity_weight = " << fmt_double(c.diversity_weight) << "\n";
  out << "episodes_per_entry = " << c.episodes_per_entry << "\n";
  out << "state_buffer_capacity = " << c.state_buffer_capacity << "\n";
  out << "seed = " << c.seed << "\n";
  out << "exploit_metric = " << c.exploit_metric << "\n";
  out << "approx_exploit_episodes = " << c.approx_exploit_episodes << "\n";
  out << "h2h_episodes = " << c.h2h_episodes << "\n";
  out << "record_wallclock = " << (c.record_wallclock ? 1 : 0) << "\n";
  out << "dqn.hidden = " << fmt_hidden(c.dqn.hidden) << "\n";
  out << "dqn.lr = " << fmt_double(c.dqn.lr) << "\n";
  out << "dqn.lr_decay_steps = " << c.dqn.lr_decay_steps << "\n";
  out << "dqn.gamma = " << fmt_double(c.dqn.gamma) << "\n";
  out << "dqn.epsilon = " << fmt_double(c.dqn.epsilon) << "\n";
  out << "dqn.batch_size = " << c.dqn.batch_size << "\n";
  out << "dqn.buffer_capacity = " << c.dqn.buffer_capacity << "\n";
  out << "dqn.target_update_freq = " << c.dqn.target_update_freq << "\n";
  out << "dqn.soft_tau = " << fmt_double(c.dqn.soft_tau) << "\n";
  out << "dqn.grad_clip = " << fmt_double(c.dqn.grad_clip) << "\n";
  out << "dqn.prioritized = " << (c.dqn.prioritized ? 1 : 0) << "\n";
  out << "dqn.per_alpha = " << fmt_double(c.dqn.per_alpha) << "\n";
  out << "dqn.per_beta = " << fmt_double(c.dqn.per_beta) << "\n";
  out << "dqn.train_every = " << c.dqn.train_every << "\n";
  out << "dqn.min_buffer = " << c.dqn.min_buffer << "\n";
  out << "dqn.kl_temperature = " << fmt_double(c.dqn.kl_temperature) << "\n";
  out << "conflux.start_iteration = " << c.conflux.start_iteration << "\n";
  out << "conflux.interval = " << c.conflux.interval << "\n";
  out << "conflux.num_subs = " << c.conflux.num_subs << "\n";
  out << "conflux.pool_size = " << c.conflux.pool_size << "\n";
  out << "conflux.lambda1 = " << fmt_double(c.conflux.lambda1) << "\n";
  out << "conflux.lambda2 = " << fmt_double(c.conflux.lambda2) << "\n";
  out << "conflux.routing_episodes = " << c.conflux.routing_episodes << "\n";
  out << "conflux.distill_episodes = " << c.conflux.distill_episodes << "\n";
  out << "conflux.kl_temperature = " << fmt_double(c.conflux.kl_temperature) << "\n";
  out << "conflux.selection_states = " << c.conflux.selection_states << "\n";
  out << "conflux.cross_play_blocks = " << c.conflux.cross_play_blocks << "\n";
  out << "conflux.exploiter_vs_latest = " << (c.conflux.exploiter_vs_latest ? 1 : 0) << "\n";
  out << "conflux.train_subs = " << (c.conflux.train_subs ? 1 : 0) << "\n";
  out << "conflux.sub_lr = " << fmt_double(c.conflux.sub_lr) << "\n";
  out << "conflux.num_inferences = " << c.conflux.num_inferences << "\n";
  return out.str();
}

void apply_override(RunConfig& c, const std::string& key, const std::string& value) {
  if (key == "game") c.game_id = value;
  else if (key == "variant") c.variant = value;
  else if (key == "iterations") c.iterations = to_int(key, value);
  else if (key == "oracle_episodes") c.oracle_episodes = to_int(key, value);
  else if (key == "diversity_weight") c.diversity_weight = to_double(key, value);
  else if (key == "episodes_per_entry") c.episodes_per_entry = to_int(key, value);
  else if (key == "state_buffer_capacity") c.state_buffer_capacity = to_int(key, value);
  else if (key == "seed") c.seed = static_cast<uint64_t>(to_int64(key, value));
  else if (key == "exploit_metric") c.exploit_metric = value;
  else if (key == "approx_exploit_episodes") c.approx_exploit_episodes = to_int(key, value);
  else if (key == "h2h_episodes") c.h2h_episodes = to_int(key, value);
  else if (key == "record_wallclock") c.record_wallclock = to_bool(key, value);
  else if (key == "dqn.hidden") c.dqn.hidden = to_hidden(key, value);
  else if (key == "dqn.lr") c.dqn.lr = to_double(key, value);
  else if (key == "dqn.lr_decay_steps") c.dqn.lr_decay_steps = to_int64(key, value);
  else if (key == "dqn.gamma") c.dqn.gamma = to_double(key, value);
  else if (key == "dqn.epsilon") c.dqn.epsilon = to_double(key, value);
  else if (key == "dqn.batch_size") c.dqn.batch_size = to_int(key, value);
  else if (key == "dqn.buffer_capacity") c.dqn.buffer_capacity = to_int(key, value);
  else if (key == "dqn.target_update_freq") c.dqn.target_update_freq = to_int(key, value);
  else if (key == "dqn.soft_tau") c.dqn.soft_tau = to_double(key, value);
  else if (key == "dqn.grad_clip") c.dqn.grad_clip = to_double(key, value);
  else if (key == "dqn.prioritized") c.dqn.prioritized = to_bool(key, value);
  else if (key == "dqn.per_alpha") c.dqn.per_alpha = to_double(key, value);
  else if (key == "dqn.per_beta") c.dqn.per_beta = to_double(key, value);
  else if (key == "dqn.train_every") c.dqn.train_every = to_int(key, value);
  else if (key == "dqn.min_buffer") c.dqn.min_buffer = to_int(key, value);
  else if (key == "dqn.kl_temperature") c.dqn.kl_temperature = to_double(key, value);
  else if (key == "conflux.start_iteration") c.conflux.start_iteration = to_int(key, value);
  else if (key == "conflux.interval") c.conflux.interval = to_int(key, value);
  else if (key == "conflux.num_subs") c.conflux.num_subs = to_int(key, value);
  else if (key == "conflux.pool_size") c.conflux.pool_size = to_int(key, value);
  else if (key == "conflux.lambda1") c.conflux.lambda1 = to_double(key, value);
  else if (key == "conflux.lambda2") c.conflux.lambda2 = to_double(key, value);
  else if (key == "conflux.routing_episodes") c.conflux.routing_episodes = to_int(key, value);
  else if (key == "conflux.distill_episodes") c.conflux.distill_episodes = to_int(key, value);
  else if (key == "conflux.kl_temperature") c.conflux.kl_temperature = to_double(key, value);
  else if (key == "conflux.selection_states") c.conflux.selection_states = to_int(key, value);
  else if (key == "conflux.cross_play_blocks") c.conflux.cross_play_blocks = to_int(key, value);
  else if (key == "conflux.exploiter_vs_latest") c.conflux.exploiter_vs_latest = to_bool(key, value);
  else if (key == "conflux.train_subs") c.conflux.train_subs = to_bool(key, value);
  else if (key == "conflux.sub_lr") c.conflux.sub_lr = to_double(key, value);
  else if (key == "conflux.num_inferences") c.conflux.num_inferences = to_int(key, value);
  else throw ConfigError("config: unknown key '" + key + "'");
}

RunConfig parse_config(const std::string& text) {
  RunConfig config;
  std::stringstream ss(text);
  std::string line;
  int line_no = 0;
  while (std::getline(ss, line)) {
    line_no++;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config: line " + std::to_string(line_no) + " is not 'key = value'");
    }
    apply_override(config, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return config;
}

RunConfig load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_config(text);
}

namespace {

// Desk-scale profile driving the fast experiments and the acceptance suite.
RunConfig kuhn_accept() {
  RunConfig c;
  c.game_id = "kuhn";
  c.variant = "psro";
  c.iterations = 15;
  c.oracle_episodes = 5000;
  c.episodes_per_entry = 100000;
  c.dqn.hidden = {32, 32};
  c.dqn.lr = 5e-3;
  c.dqn.gamma = 1.0;
  c.dqn.epsilon = 0.05;
  c.dqn.batch_size = 32;
  c.dqn.buffer_capacity = 10000;
  c.dqn.target_update_freq = 100;
  c.conflux.start_iteration = 7;
  c.conflux.interval = 2;
  c.conflux.num_subs = 2;
  c.conflux.pool_size = 4;
  c.conflux.lambda2 = 0.5;
  c.conflux.routing_episodes = 5000;
  c.conflux.distill_episodes = 5000;
  c.conflux.selection_states = 512;
  return c;
}

// Reproduction profile for Leduc poker.
RunConfig leduc_default() {
  RunConfig c;
  c.game_id = "leduc";
  c.variant = "psro";
  c.iterations = 40;
  c.oracle_episodes = 20000;
  c.diversity_weight = 1.0;
  c.dqn.hidden = {256, 256, 256};
  c.dqn.lr = 5e-3;
  c.dqn.gamma = 1.0;
  c.dqn.epsilon = 0.05;
  c.dqn.batch_size = 512;
  c.dqn.buffer_capacity = 10000;
  c.dqn.target_update_freq = 5;
  c.conflux.start_iteration = 10;
  c.conflux.interval = 2;
  c.conflux.num_subs = 3;
  c.conflux.pool_size = 5;
  c.conflux.num_inferences = 3;
  c.conflux.routing_episodes = 20000;
  c.conflux.distill_episodes = 20000;
  return c;
}

// Reproduction profile for 5-card goofspiel.
RunConfig goofspiel_default() {
  RunConfig c;
  c.game_id = "goofspiel5";
  c.variant = "psro";
  c.iterations = 40;
  c.oracle_episodes = 30000;
  c.diversity_weight = 1.0;
  c.dqn.hidden = {512, 512, 512};
  c.dqn.lr = 5e-3;
  c.dqn.gamma = 1.0;
  c.dqn.epsilon = 0.05;
  c.dqn.batch_size = 512;
  c.dqn.buffer_capacity = 10000;
  c.dqn.target_update_freq = 5;
  c.conflux.start_iteration = 20;
  c.conflux.interval = 3;
  c.conflux.num_subs = 5;
  c.conflux.pool_size = 8;
  c.conflux.num_inferences = 3;
  c.conflux.routing_episodes = 30000;
  c.conflux.distill_episodes = 30000;
  return c;
}

// Reproduction profile for Liar's Dice (DQN plus prioritized replay, soft
// target updates, gradient clipping and linear lr decay).
RunConfig liars_dice_default(bool imperfect_recall) {
  RunConfig c;
  c.game_id = imperfect_recall ? "liars_dice_ir" : "liars_dice";
  c.variant = "psro";
  c.iterations = 30;
  c.oracle_episodes = 200000;
  c.diversity_weight = 1.0;
  c.dqn.hidden = {256, 256, 128};
  c.dqn.lr = 5e-4;
  c.dqn.lr_decay_steps = 1000000;
  c.dqn.gamma = 0.99;
  c.dqn.epsilon = 0.05;
  c.dqn.batch_size = 512;
  c.dqn.buffer_capacity = 100000;
  c.dqn.target_update_freq = 5;
  c.dqn.soft_tau = 0.005;
  c.dqn.grad_clip = 10.0;
  c.dqn.prioritized = true;
  c.dqn.per_alpha = 0.6;
  c.dqn.per_beta = 0.4;
  c.conflux.start_iteration = 10;
  c.conflux.interval = 2;
  c.conflux.num_subs = 3;
  c.conflux.pool_size = 5;
  c.conflux.num_inferences = 3;
  c.conflux.routing_episodes = 200000;
  c.conflux.distill_episodes = 200000;
  if (imperfect_recall) c.exploit_metric = "approx";
  return c;
}

// Small smoke profile on the pursuit grid.
RunConfig maze_fixture() {
  RunConfig c;
  c.game_id = "maze";
  c.variant = "psro";
  c.iterations = 4;
  c.oracle_episodes = 600;
  c.episodes_per_entry = 200;
  c.dqn.hidden = {32, 32};
  c.dqn.batch_size = 32;
  c.dqn.buffer_capacity = 5000;
  c.dqn.target_update_freq = 100;
  c.dqn.epsilon = 0.1;
  c.conflux.start_iteration = 2;
  c.conflux.interval = 2;
  c.conflux.num_subs = 2;
  c.conflux.pool_size = 2;
  c.conflux.routing_episodes = 600;
  c.conflux.distill_episodes = 600;
  c.conflux.selection_states = 256;
  c.exploit_metric = "approx";
  c.approx_exploit_episodes = 600;
  c.h2h_episodes = 200;
  return c;
}

}  // namespace

std::vector<std::string> preset_names() {
  return {"kuhn-accept",        "leduc-default",     "leduc-caption", "goofspiel5-default",
          "goofspiel5-caption", "liars-dice-default", "liars-dice-ir-default", "maze-fixture"};
}

RunConfig preset_config(const std::string& name) {
  if (name == "kuhn-accept") return kuhn_accept();
  if (name == "leduc-default") return leduc_default();
  if (name == "leduc-caption") {
    // Figure-caption episode budget; the table value is the default.
    RunConfig c = leduc_default();
    c.oracle_episodes = 200000;
    c.conflux.routing_episodes = 200000;
    c.conflux.distill_episodes = 200000;
    return c;
  }
  if (name == "goofspiel5-default") return goofspiel_default();
  if (name == "goofspiel5-caption") {
    RunConfig c = goofspiel_default();
    c.oracle_episodes = 300000;
    c.conflux.routing_episodes = 300000;
    c.conflux.distill_episodes = 300000;
    return c;
  }
  if (name == "liars-dice-default") return liars_dice_default(false);
  if (name == "liars-dice-ir-default") return liars_dice_default(true);
  if (name == "maze-fixture") return maze_fixture();
  throw ConfigError("unknown preset '" + name + "'");
}

}  // namespace cpsro
