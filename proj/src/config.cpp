#include "teamlab/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "teamlab/errors.hpp"

namespace teamlab {

std::string_view env_kind_name(EnvKind kind) {
  switch (kind) {
    case EnvKind::kTwoStates: return "twostates";
    case EnvKind::kFourStates: return "fourstates";
    case EnvKind::kIpd: return "ipd";
  }
  return "?";
}

std::size_t ExperimentConfig::population_for(int team_size) const {
  if (n_agents > 0) return static_cast<std::size_t>(n_agents);
  if (env == EnvKind::kIpd) return 30;
  return static_cast<std::size_t>(std::max(team_size, 1));
}

double ExperimentConfig::return_bin_width() const {
  if (bin_width > 0.0) return bin_width;
  const int n_max = team_sizes.empty() ? 1 : *std::max_element(team_sizes.begin(), team_sizes.end());
  return reward_r / (4.0 * std::max(n_max, 1));
}

std::vector<std::string> ExperimentConfig::violations() const {
  std::vector<std::string> v;
  if (n_agents < 0) v.push_back("n_agents must be non-negative");
  if (team_sizes.empty()) v.push_back("team_sizes must list at least one size");
  for (int n : team_sizes) {
    if (n <= 0) {
      v.push_back("team size " + std::to_string(n) + " is not positive");
      continue;
    }
    const std::size_t pop = population_for(n);
    if (pop % static_cast<std::size_t>(n) != 0) {
      v.push_back("team size " + std::to_string(n) + " does not divide the population of " +
                  std::to_string(pop));
    }
    if (env == EnvKind::kIpd && pop < 2) v.push_back("ipd needs at least two agents");
  }
  if (trials <= 0) v.push_back("trials must be positive");
  if (episodes <= 0) v.push_back("episodes must be positive");
  if (steps_per_episode <= 0) v.push_back("steps_per_episode must be positive");
  if (!(learner.gamma > 0.0 && learner.gamma < 1.0)) v.push_back("gamma must lie in (0, 1)");
  if (!(learner.alpha > 0.0 && learner.alpha <= 1.0)) v.push_back("alpha must lie in (0, 1]");
  if (!(learner.epsilon >= 0.0 && learner.epsilon <= 1.0)) {
    v.push_back("epsilon_explore must lie in [0, 1]");
  }
  if (!(reward_r > 0.0)) v.push_back("reward_r must be positive");
  if (!(slip_prob >= 0.0 && slip_prob <= 1.0)) v.push_back("slip_prob must lie in [0, 1]");
  if (!(ipd.cost > 0.0 && ipd.benefit > ipd.cost)) {
    v.push_back("ipd_benefit > ipd_cost > 0 is required");
  }
  if (!(ipd.nu >= 0.0 && ipd.nu <= 1.0)) v.push_back("ipd_nu must lie in [0, 1]");
  if (info_horizon <= 0) v.push_back("info_horizon must be positive");
  if (bin_width < 0.0) v.push_back("bin_width must be positive (or 0 for the default)");
  if (info_rollouts <= 0) v.push_back("info_rollouts must be positive");
  if (out_dir.empty()) v.push_back("out_dir must not be empty");
  return v;
}

void ExperimentConfig::validate() const {
  auto v = violations();
  if (v.empty()) return;
  std::string msg = "invalid configuration:";
  for (const auto& s : v) msg += "\n  - " + s;
  throw ConfigError(msg);
}

namespace {

std::string format_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(std::string_view text, const std::string& where) {
  T value{};
  auto t = trim(text);
  if (!t.empty() && t.front() == '+') t.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
    throw ConfigError(where + ": '" + std::string(text) + "' is not a valid number");
  }
  return value;
}

}  // namespace

std::string ExperimentConfig::canonical() const {
  std::ostringstream out;
  out << "env = " << env_kind_name(env) << '\n';
  out << "n_agents = " << n_agents << '\n';
  out << "team_sizes = ";
  for (std::size_t i = 0; i < team_sizes.size(); ++i) {
    out << (i ? "," : "") << team_sizes[i];
  }
  out << '\n';
  out << "trials = " << trials << '\n';
  out << "episodes = " << episodes << '\n';
  out << "steps_per_episode = " << steps_per_episode << '\n';
  out << "gamma = " << format_double(learner.gamma) << '\n';
  out << "alpha = " << format_double(learner.alpha) << '\n';
  out << "epsilon_explore = " << format_double(learner.epsilon) << '\n';
  out << "reward_r = " << format_double(reward_r) << '\n';
  out << "slip_prob = " << format_double(slip_prob) << '\n';
  out << "ipd_cost = " << format_double(ipd.cost) << '\n';
  out << "ipd_benefit = " << format_double(ipd.benefit) << '\n';
  out << "ipd_nu = " << format_double(ipd.nu) << '\n';
  out << "info_horizon = " << info_horizon << '\n';
  out << "bin_width = " << format_double(bin_width) << '\n';
  out << "info_rollouts = " << info_rollouts << '\n';
  out << "seed = " << seed << '\n';
  out << "out_dir = " << out_dir << '\n';
  return out.str();
}

std::uint64_t ExperimentConfig::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

ExperimentConfig load_config(std::string_view text) {
  ExperimentConfig cfg;
  std::set<std::string> seen;
  bool epsilon_given = false;

  using Setter = std::function<void(std::string_view, const std::string&)>;
  const std::map<std::string, Setter, std::less<>> setters = {
      {"env", [&](auto v, auto& where) {
         if (v == "twostates") cfg.env = EnvKind::kTwoStates;
         else if (v == "fourstates") cfg.env = EnvKind::kFourStates;
         else if (v == "ipd") cfg.env = EnvKind::kIpd;
         else throw ConfigError(where + ": env must be twostates, fourstates or ipd");
       }},
      {"n_agents", [&](auto v, auto& w) { cfg.n_agents = parse_number<int>(v, w); }},
      {"team_sizes", [&](auto v, auto& w) {
         if (!v.empty() && v.front() == '[' && v.back() == ']') v = v.substr(1, v.size() - 2);
         cfg.team_sizes.clear();
         while (!v.empty()) {
           auto comma = v.find(',');
           cfg.team_sizes.push_back(parse_number<int>(v.substr(0, comma), w));
           if (comma == std::string_view::npos) break;
           v.remove_prefix(comma + 1);
         }
       }},
      {"trials", [&](auto v, auto& w) { cfg.trials = parse_number<int>(v, w); }},
      {"episodes", [&](auto v, auto& w) { cfg.episodes = parse_number<int>(v, w); }},
      {"steps_per_episode",
       [&](auto v, auto& w) { cfg.steps_per_episode = parse_number<int>(v, w); }},
      {"gamma", [&](auto v, auto& w) { cfg.learner.gamma = parse_number<double>(v, w); }},
      {"alpha", [&](auto v, auto& w) { cfg.learner.alpha = parse_number<double>(v, w); }},
      {"epsilon_explore", [&](auto v, auto& w) {
         cfg.learner.epsilon = parse_number<double>(v, w);
         epsilon_given = true;
       }},
      {"reward_r", [&](auto v, auto& w) { cfg.reward_r = parse_number<double>(v, w); }},
      {"slip_prob", [&](auto v, auto& w) { cfg.slip_prob = parse_number<double>(v, w); }},
      {"ipd_cost", [&](auto v, auto& w) { cfg.ipd.cost = parse_number<double>(v, w); }},
      {"ipd_benefit", [&](auto v, auto& w) { cfg.ipd.benefit = parse_number<double>(v, w); }},
      {"ipd_nu", [&](auto v, auto& w) { cfg.ipd.nu = parse_number<double>(v, w); }},
      {"info_horizon", [&](auto v, auto& w) { cfg.info_horizon = parse_number<int>(v, w); }},
      {"bin_width", [&](auto v, auto& w) { cfg.bin_width = parse_number<double>(v, w); }},
      {"info_rollouts", [&](auto v, auto& w) { cfg.info_rollouts = parse_number<int>(v, w); }},
      {"seed", [&](auto v, auto& w) { cfg.seed = parse_number<std::uint64_t>(v, w); }},
      {"out_dir", [&](auto v, auto&) { cfg.out_dir = std::string(v); }},
  };

  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    const std::string where = "line " + std::to_string(line_no);
    auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(where + ": expected 'key = value', got '" + std::string(line) + "'");
    }
    const std::string key(trim(line.substr(0, eq)));
    const auto value = trim(line.substr(eq + 1));
    auto it = setters.find(key);
    if (it == setters.end()) throw ConfigError(where + ": unknown key '" + key + "'");
    if (!seen.insert(key).second) throw ConfigError(where + ": duplicate key '" + key + "'");
    if (value.empty()) throw ConfigError(where + ": key '" + key + "' has no value");
    it->second(value, where + " (" + key + ")");
  }
  if (cfg.env == EnvKind::kIpd && !epsilon_given) cfg.learner.epsilon = 0.1;
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_config(buf.str());
}

}  // namespace teamlab
