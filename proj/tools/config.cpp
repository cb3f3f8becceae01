#include "config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "raman/error.hpp"

namespace raman::cli {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

struct Default {
  const char* key;
  const char* value;
};

constexpr Default kSchema[] = {
    {"atom.preset", "calcium40"},
    {"atom.zeeman_mhz", "2.63"},
    {"beams.detuning_thz", "-44"},
    {"beams.parallel_power_mw", "195"},
    {"beams.perp_power_mw", "152"},
    {"beams.parallel_waist_um", "30.60"},
    {"beams.perp_waist_um", "32.16"},
    {"beams.parallel_fractions", "0.872, 0.0, 0.128"},
    {"beams.perp_pi_fraction", "0.329"},
    {"transition.initial_mj", "+5/2"},
    {"transition.final_mj", "-1/2"},
    {"transition.photons", "4"},
    {"transition.include_f", "false"},
    {"pulse.shape", "square"},
    {"pulse.duration_us", "0"},
    {"pulse.ramp_fraction", "0.125"},
    {"pulse.samples", "2001"},
    {"pulse.steps_per_period", "96"},
    {"pulse.max_phase", "0.04"},
    {"sweep.start_mw", "20"},
    {"sweep.stop_mw", "180"},
    {"sweep.points", "9"},
    {"spectrum.span_khz", "0"},
    {"spectrum.points", "41"},
    {"psd.carrier_mhz", "10"},
    {"psd.sample_rate_mhz", "100"},
    {"noise.sigma_t_ms", "0.61"},
    {"noise.gamma", "0"},
    {"noise.g_ratio", "1"},
    {"noise.improvement", "1"},
    {"scatter.leave_fraction", "0.94"},
    {"ramsey.max_delay_ms", "2"},
    {"ramsey.points", "41"},
    {"ramsey.noise", "0.01"},
    {"calibrate.parallel_powers_mw", "25, 50, 75, 100, 125, 150, 175, 200"},
    {"calibrate.perp_powers_mw", "20, 40, 60, 80, 100, 120, 140, 160, 180"},
    {"calibrate.noise", "0"},
    {"calibrate.splitting_sigma_hz", "30"},
    {"calibrate.rabi_sigma", "0.005"},
    {"calibrate.differential_shift_hz", "100"},
    {"calibrate.differential_shift_sigma_hz", "400"},
    {"calibrate.shift_power_mw", "180"},
    {"calibrate.shift_waist_um", "30"},
};

}  // namespace

Config Config::defaults() {
  Config c;
  for (const auto& d : kSchema) {
    c.entries_[d.key] = {d.value, "default"};
    c.order_.push_back(d.key);
  }
  return c;
}

void Config::load(std::istream& in, const std::string& source) {
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    const std::string body = trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    const std::string where = source + ":" + std::to_string(number);
    if (eq == std::string::npos) throw Error(ErrorKind::Config, where + ": expected key = value");
    const std::string key = trim(body.substr(0, eq));
    if (!entries_.count(key)) throw Error(ErrorKind::Config, where + ": unknown key '" + key + "'");
    set(key, trim(body.substr(eq + 1)), where);
  }
}

void Config::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Config, "cannot open config file '" + path + "'");
  load(in, path);
}

std::string Config::environment_name(std::string_view prefix, const std::string& key) {
  std::string name(prefix);
  for (char ch : key) name += (ch == '.' || ch == '-') ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  return name;
}

void Config::apply_environment(std::string_view prefix) {
  for (const auto& key : order_) {
    const std::string name = environment_name(prefix, key);
    if (const char* v = std::getenv(name.c_str())) set(key, trim(v), "env " + name);
  }
}

void Config::set(const std::string& key, const std::string& value, const std::string& origin) {
  auto it = entries_.find(key);
  if (it == entries_.end()) throw Error(ErrorKind::Config, origin + ": unknown key '" + key + "'");
  it->second = {value, origin};
}

void Config::fail(const std::string& key, const std::string& what) const {
  const auto& e = entries_.at(key);
  throw Error(ErrorKind::Config, e.origin + ": " + key + " = '" + e.value + "': " + what);
}

const std::string& Config::str(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) throw Error(ErrorKind::Config, "unknown key '" + key + "'");
  return it->second.value;
}

double Config::number(const std::string& key) const {
  const std::string& v = str(key);
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used == v.size() && std::isfinite(d)) return d;
  } catch (const std::exception&) {
  }
  fail(key, "expected a finite number");
}

long Config::integer(const std::string& key) const {
  const std::string& v = str(key);
  try {
    std::size_t used = 0;
    const long n = std::stol(v, &used);
    if (used == v.size()) return n;
  } catch (const std::exception&) {
  }
  fail(key, "expected an integer");
}

bool Config::flag(const std::string& key) const {
  const std::string& v = str(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  fail(key, "expected true or false");
}

std::vector<double> Config::numbers(const std::string& key) const {
  std::vector<double> out;
  std::stringstream ss(str(key));
  std::string field;
  while (std::getline(ss, field, ',')) {
    field = trim(field);
    try {
      std::size_t used = 0;
      const double d = std::stod(field, &used);
      if (used != field.size() || !std::isfinite(d)) throw std::invalid_argument("trailing");
      out.push_back(d);
    } catch (const std::exception&) {
      fail(key, "expected a comma-separated list of numbers");
    }
  }
  if (out.empty()) fail(key, "empty list");
  return out;
}

int Config::two_m(const std::string& key) const {
  const std::string v = str(key);
  const auto slash = v.find('/');
  try {
    if (slash == std::string::npos) {
      std::size_t used = 0;
      const int m = std::stoi(v, &used);
      if (used == v.size()) return 2 * m;
    } else if (trim(v.substr(slash + 1)) == "2") {
      std::size_t used = 0;
      const std::string num = trim(v.substr(0, slash));
      const int n = std::stoi(num, &used);
      if (used == num.size() && n % 2 != 0) return n;
    }
  } catch (const std::exception&) {
  }
  fail(key, "expected mJ such as +5/2 or -1/2");
}

}  // namespace raman::cli
