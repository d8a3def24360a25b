#include "asma/config_file.hpp"

#include <fstream>
#include <sstream>

namespace asma {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  size_t b = s.find_last_not_of(" \t\r\n");
  return a == std::string::npos ? "" : s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!trim(cur).empty() || !out.empty()) out.push_back(trim(cur));
  return out;
}

bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "1" || v == "true" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "no") return false;
  throw ConfigError("config: boolean expected for " + key + ", got '" + v + "'");
}

int64_t parse_int(const std::string& v, const std::string& key) {
  try {
    size_t pos = 0;
    int64_t r = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return r;
  } catch (const std::exception&) {
    throw ConfigError("config: integer expected for " + key + ", got '" + v + "'");
  }
}

double parse_real(const std::string& v, const std::string& key) {
  try {
    size_t pos = 0;
    double r = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return r;
  } catch (const std::exception&) {
    throw ConfigError("config: number expected for " + key + ", got '" + v + "'");
  }
}

std::vector<int> parse_int_list(const std::string& v, const std::string& key) {
  std::vector<int> out;
  for (const auto& tok : split(v, ','))
    if (!tok.empty()) out.push_back(static_cast<int>(parse_int(tok, key)));
  return out;
}

std::vector<double> parse_real_list(const std::string& v, const std::string& key) {
  std::vector<double> out;
  for (const auto& tok : split(v, ','))
    if (!tok.empty()) out.push_back(parse_real(tok, key));
  return out;
}

std::vector<ResolutionPhase> parse_schedule(const std::string& v) {
  std::vector<ResolutionPhase> out;
  for (const auto& tok : split(v, ',')) {
    if (tok.empty()) continue;
    auto parts = split(tok, ':');
    if (parts.size() != 2) throw ConfigError("config: resolution_schedule entries must be res:steps, got '" + tok + "'");
    out.push_back({static_cast<int>(parse_int(parts[0], "resolution_schedule")),
                   parse_int(parts[1], "resolution_schedule")});
  }
  if (out.empty()) throw ConfigError("config: empty resolution_schedule");
  return out;
}

}  // namespace

std::string asm_placement_name(AsmPlacement p) {
  switch (p) {
    case AsmPlacement::kAsm1: return "ASM1";
    case AsmPlacement::kAsm2: return "ASM2";
    case AsmPlacement::kAsm3: return "ASM3";
    default: return "none";
  }
}

AsmPlacement asm_placement_from_name(const std::string& s) {
  if (s == "none") return AsmPlacement::kNone;
  if (s == "ASM1" || s == "asm1") return AsmPlacement::kAsm1;
  if (s == "ASM2" || s == "asm2") return AsmPlacement::kAsm2;
  if (s == "ASM3" || s == "asm3") return AsmPlacement::kAsm3;
  throw ConfigError("config: unknown asm_placement '" + s + "' (none|ASM1|ASM2|ASM3)");
}

TrainConfig parse_train_config(const std::string& text) {
  TrainConfig cfg;
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = raw;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key=value, got '" + raw + "'");
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));

    if (key == "lr") cfg.lr = parse_real(val, key);
    else if (key == "adam_beta1") cfg.adam_beta1 = parse_real(val, key);
    else if (key == "adam_beta2") cfg.adam_beta2 = parse_real(val, key);
    else if (key == "batch_size") cfg.batch_size = static_cast<int>(parse_int(val, key));
    else if (key == "d_steps_per_g") cfg.d_steps_per_g = static_cast<int>(parse_int(val, key));
    else if (key == "resolution_schedule") cfg.resolution_schedule = parse_schedule(val);
    else if (key == "seed") cfg.seed = static_cast<uint64_t>(parse_int(val, key));
    else if (key == "lambda_C") cfg.lambda_C = parse_real(val, key);
    else if (key == "lambda_T") cfg.lambda_T = parse_real(val, key);
    else if (key == "adv_weight") cfg.adv_weight = parse_real(val, key);
    else if (key == "pool_kernel") cfg.pool_kernel = static_cast<int>(parse_int(val, key));
    else if (key == "pool_stride") cfg.pool_stride = static_cast<int>(parse_int(val, key));
    else if (key == "checkpoint_interval") cfg.checkpoint_interval = parse_int(val, key);
    else if (key == "reset_moments_on_resolution_jump") cfg.reset_moments_on_resolution_jump = parse_bool(val, key);
    else if (key == "base_channels") cfg.gen.base_channels = static_cast<int>(parse_int(val, key));
    else if (key == "n_resblocks") cfg.gen.n_resblocks = static_cast<int>(parse_int(val, key));
    else if (key == "downsample_stages") cfg.gen.downsample_stages = static_cast<int>(parse_int(val, key));
    else if (key == "channel_cap") cfg.gen.channel_cap = static_cast<int>(parse_int(val, key));
    else if (key == "num_styles") { cfg.gen.num_styles = static_cast<int>(parse_int(val, key)); cfg.disc.num_styles = cfg.gen.num_styles; }
    else if (key == "asm_placement") cfg.gen.asm_placement = asm_placement_from_name(val);
    else if (key == "disable_reset_gate") cfg.gen.asm_disable_reset_gate = parse_bool(val, key);
    else if (key == "disable_update_gate") cfg.gen.asm_disable_update_gate = parse_bool(val, key);
    else if (key == "leaky_slope") { cfg.gen.leaky_slope = parse_real(val, key); cfg.disc.leaky_slope = cfg.gen.leaky_slope; }
    else if (key == "n_blocks") cfg.disc.n_blocks = static_cast<int>(parse_int(val, key));
    else if (key == "widths") cfg.disc.widths = parse_int_list(val, key);
    else if (key == "scale_taps") cfg.disc.scale_taps = parse_int_list(val, key);
    else if (key == "scale_weights") cfg.disc.scale_weights = parse_real_list(val, key);
    else throw ConfigError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
  }
  return cfg;
}

TrainConfig load_train_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_train_config(ss.str());
}

std::string train_config_to_text(const TrainConfig& cfg) {
  std::ostringstream os;
  os.precision(17);
  os << "lr = " << cfg.lr << "\n";
  os << "adam_beta1 = " << cfg.adam_beta1 << "\n";
  os << "adam_beta2 = " << cfg.adam_beta2 << "\n";
  os << "batch_size = " << cfg.batch_size << "\n";
  os << "d_steps_per_g = " << cfg.d_steps_per_g << "\n";
  os << "resolution_schedule = ";
  for (size_t i = 0; i < cfg.resolution_schedule.size(); ++i) {
    if (i) os << ",";
    os << cfg.resolution_schedule[i].resolution << ":" << cfg.resolution_schedule[i].steps;
  }
  os << "\n";
  os << "seed = " << cfg.seed << "\n";
  os << "lambda_C = " << cfg.lambda_C << "\n";
  os << "lambda_T = " << cfg.lambda_T << "\n";
  os << "adv_weight = " << cfg.adv_weight << "\n";
  os << "pool_kernel = " << cfg.pool_kernel << "\n";
  os << "pool_stride = " << cfg.pool_stride << "\n";
  os << "checkpoint_interval = " << cfg.checkpoint_interval << "\n";
  os << "reset_moments_on_resolution_jump = " << (cfg.reset_moments_on_resolution_jump ? 1 : 0) << "\n";
  os << "base_channels = " << cfg.gen.base_channels << "\n";
  os << "n_resblocks = " << cfg.gen.n_resblocks << "\n";
  os << "downsample_stages = " << cfg.gen.downsample_stages << "\n";
  os << "channel_cap = " << cfg.gen.channel_cap << "\n";
  os << "num_styles = " << cfg.gen.num_styles << "\n";
  os << "asm_placement = " << asm_placement_name(cfg.gen.asm_placement) << "\n";
  os << "disable_reset_gate = " << (cfg.gen.asm_disable_reset_gate ? 1 : 0) << "\n";
  os << "disable_update_gate = " << (cfg.gen.asm_disable_update_gate ? 1 : 0) << "\n";
  os << "leaky_slope = " << cfg.gen.leaky_slope << "\n";
  os << "n_blocks = " << cfg.disc.n_blocks << "\n";
  os << "widths = ";
  for (size_t i = 0; i < cfg.disc.widths.size(); ++i) os << (i ? "," : "") << cfg.disc.widths[i];
  os << "\n";
  os << "scale_taps = ";
  for (size_t i = 0; i < cfg.disc.scale_taps.size(); ++i) os << (i ? "," : "") << cfg.disc.scale_taps[i];
  os << "\n";
  os << "scale_weights = ";
  for (size_t i = 0; i < cfg.disc.scale_weights.size(); ++i) os << (i ? "," : "") << cfg.disc.scale_weights[i];
  os << "\n";
  return os.str();
}

uint64_t train_config_hash(const TrainConfig& cfg) {
  // FNV-1a over the canonical text
  const std::string text = train_config_to_text(cfg);
  uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace asma
