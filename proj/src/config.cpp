#include "ringlab/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "ringlab/error.hpp"

namespace ringlab {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

struct Entry {
  std::string value;
  int line = 0;
};

class Section {
 public:
  Section(std::string name, std::string origin) : name_(std::move(name)), origin_(std::move(origin)) {}

  void add(const std::string& key, Entry e) {
    if (entries_.count(key)) fail(e.line, key, "is given twice");
    entries_[key] = std::move(e);
    order_.push_back(key);
  }
  bool has(const std::string& key) const { return entries_.count(key) != 0; }
  const std::vector<std::string>& keys() const { return order_; }
  const std::string& name() const { return name_; }
  const Entry& entry(const std::string& key) const { return entries_.at(key); }

  void check_known(std::initializer_list<const char*> known) const {
    std::set<std::string> ok(known.begin(), known.end());
    for (const auto& k : order_)
      if (!ok.count(k)) fail(entries_.at(k).line, k, "is not a recognised key");
  }

  double number(const std::string& key, double fallback) const {
    if (!has(key)) return fallback;
    return parse_number(key, entries_.at(key).value);
  }
  int integer(const std::string& key, int fallback) const {
    if (!has(key)) return fallback;
    const double v = number(key, 0.0);
    if (v != std::floor(v) || std::abs(v) > 1e9) fail(entries_.at(key).line, key, "must be an integer");
    return static_cast<int>(v);
  }
  bool boolean(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const auto v = lower(entries_.at(key).value);
    if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
    if (v == "false" || v == "no" || v == "off" || v == "0") return false;
    fail(entries_.at(key).line, key, "must be true or false");
  }
  std::string word(const std::string& key, const std::string& fallback) const {
    return has(key) ? entries_.at(key).value : fallback;
  }
  std::vector<std::string> list(const std::string& key) const {
    std::vector<std::string> out;
    if (!has(key)) return out;
    std::stringstream in(entries_.at(key).value);
    std::string item;
    while (std::getline(in, item, ',')) {
      item = trim(item);
      if (item.empty()) fail(entries_.at(key).line, key, "has an empty list item");
      out.push_back(item);
    }
    return out;
  }
  std::vector<double> numbers(const std::string& key) const {
    std::vector<double> out;
    for (const auto& item : list(key)) out.push_back(parse_number(key, item));
    return out;
  }
  std::pair<double, double> pair(const std::string& key, std::pair<double, double> fallback) const {
    if (!has(key)) return fallback;
    const auto v = numbers(key);
    if (v.size() != 2) fail(entries_.at(key).line, key, "needs exactly two numbers");
    return {v[0], v[1]};
  }

  [[noreturn]] void fail(int line, const std::string& key, const std::string& what) const {
    std::ostringstream msg;
    msg << origin_ << ':' << line << ": [" << name_ << "] " << key << ' ' << what;
    throw ConfigError(msg.str());
  }

 private:
  double parse_number(const std::string& key, const std::string& text) const {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(text, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != text.size() || !std::isfinite(v))
      fail(entries_.at(key).line, key, "is not a finite number: '" + text + "'");
    return v;
  }

  std::string name_;
  std::string origin_;
  std::map<std::string, Entry> entries_;
  std::vector<std::string> order_;
};

}  // namespace

std::string render_config(const ConfigEcho& echo) {
  std::ostringstream out;
  for (const auto& [name, entries] : echo) {
    out << '[' << name << "]\n";
    for (const auto& [k, v] : entries) out << k << " = " << v << '\n';
  }
  return out.str();
}

std::uint64_t RunConfig::hash() const {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::vector<double> merge_snapshot_times(const std::vector<double>& times, double every,
                                         double log_a, double log_b, int log_count, double t_end) {
  std::vector<double> out;
  for (double t : times)
    if (t > 0.0 && t <= t_end) out.push_back(t);
  if (every > 0.0)
    for (long long k = 1;; ++k) {
      const double t = static_cast<double>(k) * every;
      if (t > t_end * (1.0 + 1e-12)) break;
      out.push_back(std::min(t, t_end));
    }
  if (log_count > 0) {
    for (int k = 0; k < log_count; ++k) {
      const double t = log_count == 1
                           ? log_a
                           : log_a * std::pow(log_b / log_a, static_cast<double>(k) / (log_count - 1));
      if (t > 0.0 && t <= t_end) out.push_back(t);
    }
  }
  std::sort(out.begin(), out.end());
  std::vector<double> merged;
  for (double t : out)
    if (merged.empty() || t > merged.back() * (1.0 + 1e-12)) merged.push_back(t);
  return merged;
}

RunConfig parse_config(const std::string& text, const std::string& origin) {
  std::vector<Section> sections;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') {
        std::ostringstream msg;
        msg << origin << ':' << line << ": malformed section header '" << s << "'";
        throw ConfigError(msg.str());
      }
      const std::string name = lower(trim(s.substr(1, s.size() - 2)));
      static const std::set<std::string> known = {"grid", "ring", "run", "snapshots", "verify", "sweep"};
      if (!known.count(name)) {
        std::ostringstream msg;
        msg << origin << ':' << line << ": unknown section [" << name << "]";
        throw ConfigError(msg.str());
      }
      if (name != "ring")
        for (const auto& sec : sections)
          if (sec.name() == name) {
            std::ostringstream msg;
            msg << origin << ':' << line << ": section [" << name << "] appears twice";
            throw ConfigError(msg.str());
          }
      sections.emplace_back(name, origin);
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos || sections.empty()) {
      std::ostringstream msg;
      msg << origin << ':' << line << ": expected 'key = value' inside a section";
      throw ConfigError(msg.str());
    }
    const std::string key = lower(trim(s.substr(0, eq)));
    const std::string value = trim(s.substr(eq + 1));
    if (key.empty() || value.empty()) {
      std::ostringstream msg;
      msg << origin << ':' << line << ": empty key or value";
      throw ConfigError(msg.str());
    }
    sections.back().add(key, {value, line});
  }

  RunConfig cfg;
  auto& sim = cfg.sim;
  const Section* grid = nullptr;
  const Section* run = nullptr;
  const Section* snaps = nullptr;
  for (const auto& sec : sections) {
    std::vector<std::pair<std::string, std::string>> echo;
    for (const auto& k : sec.keys()) echo.emplace_back(k, sec.entry(k).value);
    cfg.echo.emplace_back(sec.name(), std::move(echo));
    if (sec.name() == "grid") grid = &sec;
    else if (sec.name() == "run") run = &sec;
    else if (sec.name() == "snapshots") snaps = &sec;
    else if (sec.name() == "ring") {
      sec.check_known({"kappa", "r0", "z0", "eps"});
      RingSpec ring;
      ring.kappa = sec.number("kappa", ring.kappa);
      ring.r0 = sec.number("r0", ring.r0);
      ring.z0 = sec.number("z0", ring.z0);
      ring.eps = sec.number("eps", ring.eps);
      sim.rings.push_back(ring);
    } else if (sec.name() == "verify") {
      sec.check_known({"calibration", "momentum_tolerance", "far_field_radii", "decay_early",
                       "decay_late", "test_center", "test_radius"});
      auto& v = cfg.verify;
      v.calibration = sec.word("calibration", v.calibration);
      v.momentum_tolerance = sec.number("momentum_tolerance", v.momentum_tolerance);
      if (sec.has("far_field_radii")) v.far_field_radii = sec.numbers("far_field_radii");
      v.decay_early = sec.pair("decay_early", v.decay_early);
      v.decay_late = sec.pair("decay_late", v.decay_late);
      v.test_center = sec.pair("test_center", v.test_center);
      v.test_radius = sec.number("test_radius", v.test_radius);
      if (!(v.momentum_tolerance > 0.0))
        sec.fail(sec.entry("momentum_tolerance").line, "momentum_tolerance", "must be positive");
      if (!(v.test_radius > 0.0)) sec.fail(sec.entry("test_radius").line, "test_radius", "must be positive");
    } else if (sec.name() == "sweep") {
      sec.check_known({"kappa", "eps", "grid", "grid_policy"});
      auto& w = cfg.sweep;
      w.kappa = sec.numbers("kappa");
      w.eps = sec.numbers("eps");
      for (const auto& item : sec.list("grid")) {
        const auto x = lower(item).find('x');
        int nr = 0, nz = 0;
        try {
          if (x == std::string::npos) throw std::invalid_argument("no x");
          std::size_t a = 0, b = 0;
          nr = std::stoi(item.substr(0, x), &a);
          nz = std::stoi(item.substr(x + 1), &b);
          if (a != x || b != item.size() - x - 1) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
          sec.fail(sec.entry("grid").line, "grid", "items must look like 256x384, got '" + item + "'");
        }
        w.grids.emplace_back(nr, nz);
      }
      const auto policy = lower(sec.word("grid_policy", "all"));
      if (policy == "all") w.grid_policy = GridPolicy::kAll;
      else if (policy == "coarsest-valid") w.grid_policy = GridPolicy::kCoarsestValid;
      else sec.fail(sec.entry("grid_policy").line, "grid_policy", "must be all or coarsest-valid");
    }
  }

  if (!grid) throw ConfigError(origin + ": missing [grid] section");
  grid->check_known({"nr", "nz", "r_max", "z_min", "z_max"});
  for (const char* k : {"nr", "nz", "r_max", "z_min", "z_max"})
    if (!grid->has(k)) throw ConfigError(origin + ": [grid] " + k + " is required");
  sim.grid.nr = grid->integer("nr", 0);
  sim.grid.nz = grid->integer("nz", 0);
  sim.grid.r_max = grid->number("r_max", 0.0);
  sim.grid.z_min = grid->number("z_min", 0.0);
  sim.grid.z_max = grid->number("z_max", 0.0);

  if (run) {
    run->check_known({"t_end", "cfl_advect", "cfl_diffuse", "velocity_refresh", "boundary_refresh",
                      "boundary", "integrator", "drift_free", "elliptic_correction"});
    sim.t_end = run->number("t_end", sim.t_end);
    sim.cfl_advect = run->number("cfl_advect", sim.cfl_advect);
    sim.cfl_diffuse = run->number("cfl_diffuse", sim.cfl_diffuse);
    sim.velocity_refresh = run->integer("velocity_refresh", sim.velocity_refresh);
    sim.boundary_refresh = run->integer("boundary_refresh", sim.boundary_refresh);
    const auto boundary = lower(run->word("boundary", "fast"));
    if (boundary == "fast") sim.boundary = BoundaryMode::kFast;
    else if (boundary == "exact") sim.boundary = BoundaryMode::kExact;
    else run->fail(run->entry("boundary").line, "boundary", "must be fast or exact");
    const auto integrator = lower(run->word("integrator", "euler"));
    if (integrator == "euler") sim.integrator = Integrator::kEuler;
    else if (integrator == "ssp-rk2") sim.integrator = Integrator::kSspRk2;
    else run->fail(run->entry("integrator").line, "integrator", "must be euler or ssp-rk2");
    sim.drift_free = run->boolean("drift_free", sim.drift_free);
    sim.elliptic_correction = run->boolean("elliptic_correction", sim.elliptic_correction);
  }

  double every = 0.0, log_a = 0.0, log_b = 0.0;
  int log_count = 0;
  std::vector<double> times;
  if (snaps) {
    snaps->check_known({"times", "every", "log"});
    times = snaps->numbers("times");
    every = snaps->number("every", 0.0);
    if (every < 0.0) snaps->fail(snaps->entry("every").line, "every", "must be positive");
    if (snaps->has("log")) {
      const auto v = snaps->numbers("log");
      if (v.size() != 3 || !(v[0] > 0.0) || !(v[1] >= v[0]) || v[2] < 1 || v[2] != std::floor(v[2]))
        snaps->fail(snaps->entry("log").line, "log", "needs t_a, t_b, count with 0 < t_a <= t_b, count >= 1");
      log_a = v[0];
      log_b = v[1];
      log_count = static_cast<int>(v[2]);
    }
    for (double t : times)
      if (!(t > 0.0 && t <= sim.t_end))
        snaps->fail(snaps->entry("times").line, "times", "entries must lie in (0, t_end]");
  }
  sim.snapshot_times = merge_snapshot_times(times, every, log_a, log_b, log_count, sim.t_end);

  if (sim.rings.size() > 1) {
    const bool pos = sim.rings.front().kappa > 0.0;
    for (const auto& r : sim.rings)
      if ((r.kappa > 0.0) != pos || r.kappa == 0.0)
        throw ConfigError(origin + ": [ring] all circulations must share one sign (mixed-sign rings are not supported)");
  }
  cfg.text = render_config(cfg.echo);
  sim.validate();
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), path);
}

}  // namespace ringlab
