#include "coperc/config.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <utility>
#include <vector>

namespace coperc {

void SimConfig::validate() const {
  scenario.validate();
  channel.validate();
  coalition.validate();
  scheduler.validate();
  if (!(curve.lambda > 0.0) || !(curve.f_max > 0.0)) throw std::invalid_argument("curve: lambda and f_max must be positive");
}

namespace {

struct Field {
  std::string key;
  std::function<void(SimConfig&, const std::string&)> set;
  std::function<std::string(const SimConfig&)> get;
};

double to_double(const std::string& v) {
  std::size_t pos = 0;
  double x = std::stod(v, &pos);
  if (pos != v.size()) throw std::invalid_argument("not a number: " + v);
  return x;
}

long long to_int(const std::string& v) {
  std::size_t pos = 0;
  long long x = std::stoll(v, &pos);
  if (pos != v.size()) throw std::invalid_argument("not an integer: " + v);
  return x;
}

bool to_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "off" || v == "no") return false;
  throw std::invalid_argument("not a boolean: " + v);
}

std::string fmt(double x) {
  std::ostringstream os;
  os << std::setprecision(12) << x;
  return os.str();
}

template <typename T>
Field real(std::string key, T SimConfig::*group, double T::*member) {
  return {key, [=](SimConfig& c, const std::string& v) { (c.*group).*member = to_double(v); },
          [=](const SimConfig& c) { return fmt((c.*group).*member); }};
}

template <typename T>
Field integer(std::string key, T SimConfig::*group, int T::*member) {
  return {key, [=](SimConfig& c, const std::string& v) { (c.*group).*member = static_cast<int>(to_int(v)); },
          [=](const SimConfig& c) { return std::to_string((c.*group).*member); }};
}

template <typename T>
Field flag(std::string key, T SimConfig::*group, bool T::*member) {
  return {key, [=](SimConfig& c, const std::string& v) { (c.*group).*member = to_bool(v); },
          [=](const SimConfig& c) { return std::string((c.*group).*member ? "true" : "false"); }};
}

const std::vector<Field>& fields() {
  using S = ScenarioConfig;
  using Ch = ChannelConfig;
  using Co = CoalitionConfig;
  using O = OverheadConfig;
  static const std::vector<Field> table = {
      real("scene_width", &SimConfig::scenario, &S::scene_width),
      real("scene_height", &SimConfig::scenario, &S::scene_height),
      real("grid_size", &SimConfig::scenario, &S::grid_size),
      integer("n_vehicles", &SimConfig::scenario, &S::n_vehicles),
      integer("n_cavs", &SimConfig::scenario, &S::n_cavs),
      real("r_sens", &SimConfig::scenario, &S::r_sens),
      real("r_req", &SimConfig::scenario, &S::r_req),
      real("r_comm", &SimConfig::scenario, &S::r_comm),
      real("cycle_duration", &SimConfig::scenario, &S::cycle_duration),
      real("points_per_frame", &SimConfig::scenario, &S::points_per_frame),
      real("speed_min", &SimConfig::scenario, &S::speed_min),
      real("speed_max", &SimConfig::scenario, &S::speed_max),
      real("tx_power_dbm", &SimConfig::scenario, &S::tx_power_dbm),
      real("compute_flops", &SimConfig::scenario, &S::compute_flops),
      real("lane_width", &SimConfig::scenario, &S::lane_width),
      flag("occlusion", &SimConfig::scenario, &S::occlusion),
      {"seed", [](SimConfig& c, const std::string& v) { c.scenario.seed = static_cast<std::uint64_t>(to_int(v)); },
       [](const SimConfig& c) { return std::to_string(c.scenario.seed); }},
      real("f_max", &SimConfig::curve, &Curve::f_max),
      real("rho_th", &SimConfig::curve, &Curve::rho_th),
      real("epsilon", &SimConfig::curve, &Curve::epsilon),
      real("carrier_ghz", &SimConfig::channel, &Ch::carrier_ghz),
      real("bandwidth_hz", &SimConfig::channel, &Ch::bandwidth_hz),
      integer("n_subchannels", &SimConfig::channel, &Ch::n_subchannels),
      real("noise_psd_dbm_hz", &SimConfig::channel, &Ch::noise_psd_dbm_hz),
      real("shadowing_sigma_db", &SimConfig::channel, &Ch::shadowing_sigma_db),
      flag("shadowing", &SimConfig::channel, &Ch::shadowing),
      flag("rayleigh", &SimConfig::channel, &Ch::rayleigh),
      real("c0", &SimConfig::channel, &Ch::c0),
      real("flops_per_bit", &SimConfig::channel, &Ch::flops_per_bit),
      real("sinr_min_db", &SimConfig::channel, &Ch::sinr_min_db),
      integer("n_max", &SimConfig::coalition, &Co::n_max),
      real("t_stab", &SimConfig::coalition, &Co::t_stab),
      real("alpha", &SimConfig::coalition, &Co::alpha),
      real("neighbor_radius", &SimConfig::coalition, &Co::neighbor_radius),
      integer("max_rounds", &SimConfig::coalition, &Co::max_rounds),
      real("speed_deviation_threshold", &SimConfig::coalition, &Co::speed_deviation_threshold),
      integer("max_game_iterations", &SimConfig::scheduler, &SchedulerConfig::max_game_iterations),
      {"update_mode",
       [](SimConfig& c, const std::string& v) {
         if (v == "sequential") c.scheduler.update_mode = UpdateMode::kSequential;
         else if (v == "synchronous") c.scheduler.update_mode = UpdateMode::kSynchronous;
         else throw std::invalid_argument("update_mode must be sequential or synchronous");
       },
       [](const SimConfig& c) {
         return std::string(c.scheduler.update_mode == UpdateMode::kSequential ? "sequential" : "synchronous");
       }},
      {"budget_rule",
       [](SimConfig& c, const std::string& v) {
         if (v == "equal_split") c.scheduler.budget_rule = BudgetRule::kEqualSplit;
         else if (v == "spatial_reuse") c.scheduler.budget_rule = BudgetRule::kSpatialReuse;
         else throw std::invalid_argument("budget_rule must be equal_split or spatial_reuse");
       },
       [](const SimConfig& c) {
         return std::string(c.scheduler.budget_rule == BudgetRule::kEqualSplit ? "equal_split" : "spatial_reuse");
       }},
      real("rho_det", &SimConfig::overhead, &O::rho_det),
      real("bytes_per_detection", &SimConfig::overhead, &O::bytes_per_detection),
  };
  return table;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

SimConfig parse_config(std::istream& in) {
  SimConfig cfg;
  bool c0_set = false;
  bool neighbor_set = false;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto& table = fields();
    auto it = std::find_if(table.begin(), table.end(), [&](const Field& f) { return f.key == key; });
    if (it == table.end())
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    try {
      it->set(cfg, value);
    } catch (const std::exception& e) {
      throw std::invalid_argument("config line " + std::to_string(lineno) + " (" + key + "): " + e.what());
    }
    c0_set |= key == "c0";
    neighbor_set |= key == "neighbor_radius";
  }
  if (!c0_set) cfg.channel.c0 = cfg.scenario.grid_size * cfg.scenario.grid_size * 128.0;
  if (!neighbor_set) cfg.coalition.neighbor_radius = 2.0 * cfg.scenario.r_sens;
  cfg.curve = Curve::calibrated(cfg.curve.f_max, cfg.curve.rho_th, cfg.curve.epsilon);
  cfg.validate();
  return cfg;
}

SimConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  return parse_config(in);
}

std::string dump_config(const SimConfig& cfg) {
  std::ostringstream os;
  for (const auto& f : fields()) os << f.key << " = " << f.get(cfg) << '\n';
  return os.str();
}

}  // namespace coperc
