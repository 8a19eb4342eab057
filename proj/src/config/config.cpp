#include "config/config.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "core/error.hpp"

namespace swnav::config {

namespace {

using json = nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw Error(ErrorKind::config, "config key '" + path + "' " + what);
}

std::string join(const std::string& base, const std::string& key) {
  return base.empty() ? key : base + "." + key;
}

// Tracks which keys of one JSON object were consumed so typos surface as
// errors instead of silently keeping defaults.
class ObjReader {
 public:
  ObjReader(const json& j, std::string path) : obj_(j), path_(std::move(path)) {
    if (!obj_.is_object()) fail(path_, "expects an object");
  }
  ~ObjReader() = default;

  void finish() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it)
      if (!seen_.count(it.key()))
        throw Error(ErrorKind::config,
                    "unknown config key '" + join(path_, it.key()) + "'");
  }

  bool has(const std::string& key) const { return obj_.contains(key); }

  const json* look(const std::string& key) {
    if (!obj_.contains(key)) return nullptr;
    seen_.insert(key);
    return &obj_.at(key);
  }

  void number(const std::string& key, double& out) {
    if (const json* v = look(key)) {
      if (!v->is_number()) fail(join(path_, key), "expects a number");
      out = v->get<double>();
    }
  }

  // null means "no noise": JSON cannot carry +inf directly.
  void number_or_inf(const std::string& key, double& out) {
    if (const json* v = look(key)) {
      if (v->is_null()) {
        out = std::numeric_limits<double>::infinity();
        return;
      }
      if (!v->is_number()) fail(join(path_, key), "expects a number or null");
      out = v->get<double>();
    }
  }

  void count(const std::string& key, std::size_t& out) {
    if (const json* v = look(key)) {
      if (!v->is_number_integer() || v->get<long long>() < 0)
        fail(join(path_, key), "expects a nonnegative integer");
      out = static_cast<std::size_t>(v->get<long long>());
    }
  }

  void seed64(const std::string& key, std::uint64_t& out) {
    if (const json* v = look(key)) {
      if (!v->is_number_integer() || v->get<long long>() < 0)
        fail(join(path_, key), "expects a nonnegative integer");
      out = v->get<std::uint64_t>();
    }
  }

  void flag(const std::string& key, bool& out) {
    if (const json* v = look(key)) {
      if (!v->is_boolean()) fail(join(path_, key), "expects true or false");
      out = v->get<bool>();
    }
  }

  void text(const std::string& key, std::string& out) {
    if (const json* v = look(key)) {
      if (!v->is_string()) fail(join(path_, key), "expects a string");
      out = v->get<std::string>();
    }
  }

  void vec2(const std::string& key, std::array<double, 2>& out) {
    if (const json* v = look(key)) {
      if (!v->is_array() || v->size() != 2 || !(*v)[0].is_number() ||
          !(*v)[1].is_number())
        fail(join(path_, key), "expects an array of two numbers");
      out = {(*v)[0].get<double>(), (*v)[1].get<double>()};
    }
  }

  void numbers(const std::string& key, std::vector<double>& out) {
    if (const json* v = look(key)) {
      if (!v->is_array()) fail(join(path_, key), "expects an array of numbers");
      std::vector<double> vals;
      for (const auto& e : *v) {
        if (!e.is_number()) fail(join(path_, key), "expects an array of numbers");
        vals.push_back(e.get<double>());
      }
      out = std::move(vals);
    }
  }

  void maybe(const std::string& key, std::optional<double>& out) {
    if (const json* v = look(key)) {
      if (v->is_null()) {
        out.reset();
        return;
      }
      if (!v->is_number()) fail(join(path_, key), "expects a number or null");
      out = v->get<double>();
    }
  }

  const json& raw() const { return obj_; }
  const std::string& path() const { return path_; }

 private:
  const json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

json num_or_null(double v) {
  if (std::isinf(v)) return nullptr;
  return v;
}

json to_json(const ScenarioConfig& c) {
  json j;
  j["environment"] = {
      {"water_depth_m", c.environment.water_depth_m},
      {"sound_speed_mps", c.environment.sound_speed_mps},
      {"bottom", c.environment.bottom == waveguide::BottomType::perfectly_rigid
                     ? "perfectly_rigid"
                     : "pekeris_halfspace"},
      {"halfspace",
       {{"sound_speed_mps", c.environment.halfspace.sound_speed_mps},
        {"density_ratio", c.environment.halfspace.density_ratio}}},
  };
  j["source_depth_m"] = c.source_depth_m;
  j["receiver_depth_m"] = c.receiver_depth_m;
  j["auv"] = {{"position_m", c.auv_initial.position_m},
              {"velocity_mps", c.auv_initial.velocity_mps},
              {"heading_deg", c.auv_initial.heading_deg}};
  j["soo"] = {{"position_m", c.soo.position_m},
              {"velocity_mps", c.soo.velocity_mps}};
  j["duration_s"] = c.duration_s;
  j["snapshot_interval_s"] = c.snapshot_interval_s;
  j["tones_hz"] = c.tones_hz;
  j["snr_db"] = num_or_null(c.snr_db);
  j["dft"] = {{"sample_rate_hz", c.dft.sample_rate_hz},
              {"n_dft", c.dft.n_dft},
              {"overlap", c.dft.overlap},
              {"window",
               c.dft.window == sigproc::WindowKind::rect ? "rect" : "hann"}};
  j["rangerate"] = {{"segment_half_len", c.rangerate.segment_half_len},
                    {"tone_hz", c.rangerate.tone_hz},
                    {"sound_speed_mps", c.rangerate.sound_speed_mps},
                    {"zero_pad_factor", c.rangerate.zero_pad_factor},
                    {"band_min_mps", c.rangerate.band_min_mps},
                    {"band_max_mps", c.rangerate.band_max_mps}};
  j["wiranging"] = {{"tones_hz", c.wiranging.tones_hz},
                    {"window_len", c.wiranging.window_len},
                    {"stretch_cap", c.wiranging.stretch_cap},
                    {"beta_min", c.wiranging.beta_min},
                    {"beta_max", c.wiranging.beta_max},
                    {"beta_step", c.wiranging.beta_step},
                    {"range_min_m", c.wiranging.range_min_m},
                    {"range_max_m", c.wiranging.range_max_m},
                    {"range_step_m", c.wiranging.range_step_m},
                    {"min_overlap", c.wiranging.min_overlap},
                    {"min_total_weight", c.wiranging.min_total_weight},
                    {"log_intensity", c.wiranging.log_intensity}};
  j["beta"] = c.beta ? json(*c.beta) : json(nullptr);
  j["motion"] = {{"accel_std_mps2", c.accel_std_mps2},
                 {"turn_rate_std_dps", c.turn_rate_std_dps}};
  j["noise"] = {{"range_std_m", c.noise.range_std_m},
                {"velocity_std_mps", c.noise.velocity_std_mps},
                {"compass_std_deg", c.noise.compass_std_deg}};
  j["prior"] = {{"position_std_m", c.prior.position_std_m},
                {"velocity_std_mps", c.prior.velocity_std_mps},
                {"heading_std_deg", c.prior.heading_std_deg}};
  j["roughening_std_m"] = c.roughening_std_m;
  j["particles"] = c.particle_count;
  j["trials"] = c.trials;
  j["seed"] = c.seed;
  return j;
}

ScenarioConfig from_json(const json& j) {
  ScenarioConfig c;
  ObjReader root(j, "");

  if (const json* env = root.look("environment")) {
    ObjReader r(*env, "environment");
    r.number("water_depth_m", c.environment.water_depth_m);
    r.number("sound_speed_mps", c.environment.sound_speed_mps);
    std::string bottom = "pekeris_halfspace";
    r.text("bottom", bottom);
    if (bottom == "perfectly_rigid")
      c.environment.bottom = waveguide::BottomType::perfectly_rigid;
    else if (bottom == "pekeris_halfspace")
      c.environment.bottom = waveguide::BottomType::pekeris_halfspace;
    else
      fail("environment.bottom",
           "expects \"pekeris_halfspace\" or \"perfectly_rigid\"");
    if (const json* hs = r.look("halfspace")) {
      ObjReader h(*hs, "environment.halfspace");
      h.number("sound_speed_mps", c.environment.halfspace.sound_speed_mps);
      h.number("density_ratio", c.environment.halfspace.density_ratio);
      h.finish();
    }
    r.finish();
  }
  root.number("source_depth_m", c.source_depth_m);
  root.number("receiver_depth_m", c.receiver_depth_m);

  if (const json* auv = root.look("auv")) {
    ObjReader r(*auv, "auv");
    r.vec2("position_m", c.auv_initial.position_m);
    r.vec2("velocity_mps", c.auv_initial.velocity_mps);
    r.number("heading_deg", c.auv_initial.heading_deg);
    r.finish();
  }
  if (const json* soo = root.look("soo")) {
    ObjReader r(*soo, "soo");
    r.vec2("position_m", c.soo.position_m);
    r.vec2("velocity_mps", c.soo.velocity_mps);
    r.finish();
  }

  root.number("duration_s", c.duration_s);
  root.number("snapshot_interval_s", c.snapshot_interval_s);
  root.numbers("tones_hz", c.tones_hz);
  root.number_or_inf("snr_db", c.snr_db);

  if (const json* dft = root.look("dft")) {
    ObjReader r(*dft, "dft");
    r.number("sample_rate_hz", c.dft.sample_rate_hz);
    r.count("n_dft", c.dft.n_dft);
    r.number("overlap", c.dft.overlap);
    std::string window = "hann";
    r.text("window", window);
    if (window == "rect")
      c.dft.window = sigproc::WindowKind::rect;
    else if (window == "hann")
      c.dft.window = sigproc::WindowKind::hann;
    else
      fail("dft.window", "expects \"hann\" or \"rect\"");
    r.finish();
  }
  if (const json* rr = root.look("rangerate")) {
    ObjReader r(*rr, "rangerate");
    r.count("segment_half_len", c.rangerate.segment_half_len);
    r.number("tone_hz", c.rangerate.tone_hz);
    r.number("sound_speed_mps", c.rangerate.sound_speed_mps);
    r.count("zero_pad_factor", c.rangerate.zero_pad_factor);
    r.number("band_min_mps", c.rangerate.band_min_mps);
    r.number("band_max_mps", c.rangerate.band_max_mps);
    r.finish();
  }
  if (const json* wi = root.look("wiranging")) {
    ObjReader r(*wi, "wiranging");
    r.numbers("tones_hz", c.wiranging.tones_hz);
    r.count("window_len", c.wiranging.window_len);
    r.count("stretch_cap", c.wiranging.stretch_cap);
    r.number("beta_min", c.wiranging.beta_min);
    r.number("beta_max", c.wiranging.beta_max);
    r.number("beta_step", c.wiranging.beta_step);
    r.number("range_min_m", c.wiranging.range_min_m);
    r.number("range_max_m", c.wiranging.range_max_m);
    r.number("range_step_m", c.wiranging.range_step_m);
    r.number("min_overlap", c.wiranging.min_overlap);
    r.number("min_total_weight", c.wiranging.min_total_weight);
    r.flag("log_intensity", c.wiranging.log_intensity);
    r.finish();
  }
  root.maybe("beta", c.beta);

  if (const json* mo = root.look("motion")) {
    ObjReader r(*mo, "motion");
    r.number("accel_std_mps2", c.accel_std_mps2);
    r.number("turn_rate_std_dps", c.turn_rate_std_dps);
    r.finish();
  }
  if (const json* no = root.look("noise")) {
    ObjReader r(*no, "noise");
    r.number("range_std_m", c.noise.range_std_m);
    r.number("velocity_std_mps", c.noise.velocity_std_mps);
    r.number("compass_std_deg", c.noise.compass_std_deg);
    r.finish();
  }
  if (const json* pr = root.look("prior")) {
    ObjReader r(*pr, "prior");
    r.number("position_std_m", c.prior.position_std_m);
    r.number("velocity_std_mps", c.prior.velocity_std_mps);
    r.number("heading_std_deg", c.prior.heading_std_deg);
    r.finish();
  }

  root.number("roughening_std_m", c.roughening_std_m);
  root.count("particles", c.particle_count);
  root.count("trials", c.trials);
  root.seed64("seed", c.seed);
  root.finish();

  c.validate();
  return c;
}

json parse_text(const std::string& text, const std::string& origin) {
  json j = json::parse(text, nullptr, false, true);
  if (j.is_discarded())
    throw Error(ErrorKind::config, origin + ": not valid JSON");
  return j;
}

}  // namespace

std::size_t ScenarioConfig::snapshot_count() const {
  return static_cast<std::size_t>(
             std::floor(duration_s / snapshot_interval_s + 1e-9)) +
         1;
}

void ScenarioConfig::validate() const {
  environment.validate();
  if (!(source_depth_m > 0.0) ||
      !(source_depth_m < environment.water_depth_m))
    throw Error(ErrorKind::config,
                "source_depth_m must lie inside the water column");
  if (!(receiver_depth_m > 0.0) ||
      !(receiver_depth_m < environment.water_depth_m))
    throw Error(ErrorKind::config,
                "receiver_depth_m must lie inside the water column");
  if (!(duration_s > 0.0))
    throw Error(ErrorKind::config, "duration_s must be positive");
  if (!(snapshot_interval_s > 0.0))
    throw Error(ErrorKind::config, "snapshot_interval_s must be positive");
  if (snapshot_count() < 2)
    throw Error(ErrorKind::config,
                "duration_s must span at least one snapshot interval");
  if (tones_hz.empty())
    throw Error(ErrorKind::config, "tones_hz must not be empty");
  for (double f : tones_hz)
    if (!(f > 0.0))
      throw Error(ErrorKind::config, "tones_hz entries must be positive");
  if (std::isnan(snr_db))
    throw Error(ErrorKind::config, "snr_db must be a number or null");
  if (beta && !(*beta > 0.0))
    throw Error(ErrorKind::config, "beta must be positive when set");
  if (!(roughening_std_m >= 0.0))
    throw Error(ErrorKind::config, "roughening_std_m must be nonnegative");
  if (particle_count == 0)
    throw Error(ErrorKind::config, "particles must be at least 1");
  if (trials == 0)
    throw Error(ErrorKind::config, "trials must be at least 1");
  dft.validate();
  rangerate.validate();
  wiranging_resolved().validate();
  motion_model().validate();
  noise.validate();
  prior.validate();
}

ScenarioConfig default_scenario() { return ScenarioConfig{}; }

std::string scenario_to_json_text(const ScenarioConfig& cfg) {
  return to_json(cfg).dump(2) + "\n";
}

ScenarioConfig scenario_from_json_text(const std::string& text) {
  return from_json(parse_text(text, "config text"));
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error(ErrorKind::io, "cannot open config: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json(parse_text(buf.str(), path.string()));
}

void save_scenario(const std::filesystem::path& path,
                   const ScenarioConfig& cfg) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw Error(ErrorKind::io, "cannot write config: " + path.string());
  out << scenario_to_json_text(cfg);
}

ScenarioConfig apply_overrides(const ScenarioConfig& cfg,
                               const std::vector<std::string>& overrides) {
  json j = to_json(cfg);
  for (const std::string& spec : overrides) {
    const std::size_t eq = spec.find('=');
    if (eq == std::string::npos || eq == 0)
      throw Error(ErrorKind::config,
                  "override '" + spec + "' must look like key.path=value");
    const std::string dotted = spec.substr(0, eq);
    const std::string value = spec.substr(eq + 1);

    json* node = &j;
    std::string walked;
    std::size_t pos = 0;
    while (true) {
      const std::size_t dot = dotted.find('.', pos);
      const std::string key = dotted.substr(
          pos, dot == std::string::npos ? std::string::npos : dot - pos);
      walked = join(walked, key);
      if (!node->is_object() || !node->contains(key))
        throw Error(ErrorKind::config,
                    "unknown config key '" + walked + "'");
      node = &node->at(key);
      if (dot == std::string::npos) break;
      pos = dot + 1;
    }

    json parsed = json::parse(value, nullptr, false);
    if (parsed.is_discarded()) parsed = value;  // bare strings: bottom=rect

    const bool types_match =
        (node->is_number() && (parsed.is_number() || parsed.is_null())) ||
        (node->is_null() && (parsed.is_number() || parsed.is_null())) ||
        (node->is_boolean() && parsed.is_boolean()) ||
        (node->is_string() && parsed.is_string()) ||
        (node->is_array() && parsed.is_array());
    if (!types_match)
      throw Error(ErrorKind::config, "override '" + walked +
                                         "' does not match the key's type");
    if (node->is_number_integer() && parsed.is_number() &&
        !parsed.is_number_integer())
      throw Error(ErrorKind::config,
                  "override '" + walked + "' expects an integer");
    *node = parsed;
  }
  return from_json(j);
}

}  // namespace swnav::config
