#include "bregsnn/config.hpp"

#include <fstream>
#include <sstream>

#include "bregsnn/errors.hpp"

namespace bregsnn {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("config: bad numeric value for " + key + ": " + v);
  }
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  try {
    // stoull would silently wrap negatives
    if (v.find('-') != std::string::npos) throw std::invalid_argument(v);
    std::size_t pos = 0;
    const auto n = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return n;
  } catch (const std::exception&) {
    throw ConfigError("config: bad integer value for " + key + ": " + v);
  }
}

}  // namespace

NetworkSpec RunConfig::network_spec() const {
  LIFParams lif;
  lif.beta = lif_beta;
  lif.u_th = u_th;
  lif.surrogate_slope = surrogate_k;
  return NetworkSpec::parse(net, lif);
}

RunConfig parse_run_config(const std::string& text) {
  RunConfig cfg;
  std::istringstream is(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: expected key = value at line " +
                        std::to_string(lineno));
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));

    if (key == "dataset") cfg.dataset = val;
    else if (key == "output_dir") cfg.output_dir = val;
    else if (key == "net") cfg.net = val;
    else if (key == "lif_beta") cfg.lif_beta = to_double(key, val);
    else if (key == "u_th") cfg.u_th = to_double(key, val);
    else if (key == "surrogate_k") cfg.surrogate_k = to_double(key, val);
    else if (key == "train_frac") cfg.train_frac = to_double(key, val);
    else if (key == "val_frac") cfg.val_frac = to_double(key, val);
    else if (key == "test_frac") cfg.test_frac = to_double(key, val);
    else if (key == "split_seed") cfg.split_seed = to_u64(key, val);
    else if (key == "epochs") cfg.train.epochs = to_u64(key, val);
    else if (key == "batch_size") cfg.train.batch_size = to_u64(key, val);
    else if (key == "optimizer")
      cfg.train.optim.algorithm = algorithm_from_string(val);
    else if (key == "lr") cfg.train.optim.mu = to_double(key, val);
    else if (key == "beta1") cfg.train.optim.beta1 = to_double(key, val);
    else if (key == "beta2") cfg.train.optim.beta2 = to_double(key, val);
    else if (key == "epsilon") cfg.train.optim.epsilon = to_double(key, val);
    else if (key == "lambda") cfg.train.lambda = to_double(key, val);
    else if (key == "dropout") cfg.train.dropout = to_double(key, val);
    else if (key == "spike_dropout")
      cfg.train.spike_dropout = to_double(key, val);
    else if (key == "shadow_offset_cap")
      cfg.train.shadow_offset_cap = to_double(key, val);
    else if (key == "scheduler") {
      if (val == "onecycle") cfg.train.schedule = ScheduleKind::OneCycle;
      else if (val == "constant") cfg.train.schedule = ScheduleKind::Constant;
      else throw ConfigError("config: unknown scheduler: " + val);
    }
    else if (key == "pct_start") cfg.train.pct_start = to_double(key, val);
    else if (key == "div_factor") cfg.train.div_factor = to_double(key, val);
    else if (key == "final_div_factor")
      cfg.train.final_div_factor = to_double(key, val);
    else if (key == "seed") cfg.train.seed = to_u64(key, val);
    else
      throw ConfigError("config: unknown key at line " +
                        std::to_string(lineno) + ": " + key);
  }
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("config: cannot open: " + path);
  std::ostringstream os;
  os << is.rdbuf();
  return parse_run_config(os.str());
}

std::string to_text(const RunConfig& cfg) {
  std::ostringstream os;
  os.precision(17);
  os << "dataset = " << cfg.dataset << '\n'
     << "output_dir = " << cfg.output_dir << '\n'
     << "net = " << cfg.net << '\n'
     << "lif_beta = " << cfg.lif_beta << '\n'
     << "u_th = " << cfg.u_th << '\n'
     << "surrogate_k = " << cfg.surrogate_k << '\n'
     << "train_frac = " << cfg.train_frac << '\n'
     << "val_frac = " << cfg.val_frac << '\n'
     << "test_frac = " << cfg.test_frac << '\n'
     << "split_seed = " << cfg.split_seed << '\n'
     << "epochs = " << cfg.train.epochs << '\n'
     << "batch_size = " << cfg.train.batch_size << '\n'
     << "optimizer = " << to_string(cfg.train.optim.algorithm) << '\n'
     << "lr = " << cfg.train.optim.mu << '\n'
     << "beta1 = " << cfg.train.optim.beta1 << '\n'
     << "beta2 = " << cfg.train.optim.beta2 << '\n'
     << "epsilon = " << cfg.train.optim.epsilon << '\n'
     << "lambda = " << cfg.train.lambda << '\n'
     << "dropout = " << cfg.train.dropout << '\n'
     << "spike_dropout = " << cfg.train.spike_dropout << '\n'
     << "shadow_offset_cap = " << cfg.train.shadow_offset_cap << '\n'
     << "scheduler = "
     << (cfg.train.schedule == ScheduleKind::OneCycle ? "onecycle"
                                                      : "constant")
     << '\n'
     << "pct_start = " << cfg.train.pct_start << '\n'
     << "div_factor = " << cfg.train.div_factor << '\n'
     << "final_div_factor = " << cfg.train.final_div_factor << '\n'
     << "seed = " << cfg.train.seed << '\n';
  return os.str();
}

}  // namespace bregsnn
