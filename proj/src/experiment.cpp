// SPDX-License-Identifier: Apache-2.0

#include "thzirs/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace thz {

using Json = nlohmann::ordered_json;

std::string algorithm_name(Algorithm algo) {
  switch (algo) {
    case Algorithm::Bcs: return "bcs";
    case Algorithm::MiniDis: return "minidis";
    case Algorithm::RanLoc: return "ranloc";
    case Algorithm::RanPhi: return "ranphi";
  }
  return "?";
}

Algorithm parse_algorithm(const std::string& name) {
  std::string key = name;
  std::transform(key.begin(), key.end(), key.begin(), [](unsigned char c) { return std::tolower(c); });
  if (key == "bcs") return Algorithm::Bcs;
  if (key == "minidis") return Algorithm::MiniDis;
  if (key == "ranloc") return Algorithm::RanLoc;
  if (key == "ranphi") return Algorithm::RanPhi;
  throw ConfigError("unknown algorithm '" + name + "' (expected bcs, minidis, ranloc or ranphi)");
}

InnerOptions ExperimentConfig::inner_options() const {
  InnerOptions o;
  o.sigma = sigma;
  o.max_rounds = max_rounds;
  return o;
}

void ExperimentConfig::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
  };
  require(scene.length_m > 0 && scene.width_m > 0 && scene.ceiling_height_m > 0, "room dimensions must be positive");
  require(scene.ap.x >= 0 && scene.ap.x <= scene.width_m && scene.ap.y >= 0 && scene.ap.y <= scene.length_m &&
              scene.ap.z >= 0 && scene.ap.z <= scene.ceiling_height_m,
          "AP must lie inside the room");
  require(ue_height_m >= 0 && ue_height_m < scene.ceiling_height_m, "UE height must be in [0, ceiling height)");
  require(!ue_counts.empty(), "at least one UE count is required");
  for (auto u : ue_counts) require(u >= 1, "UE counts must be >= 1");
  try {
    atmosphere.validate();
    scene.validate();
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  require(std::isfinite(thermal_noise_dbm_per_hz) && std::isfinite(noise_figure_db), "noise levels must be finite");
  require(element_count >= 1, "irs.elements must be >= 1");
  require(spacing_m > 0 && std::isfinite(spacing_m), "irs.spacing_m must be positive");
  require(static_cast<double>(element_count - 1) * spacing_m < scene.length_m, "IRS array longer than the room");
  require(p_max_w > 0 && std::isfinite(p_max_w), "p_max_w must be positive");
  require(!rate_requirements_bps.empty(), "rate_requirement_bps must not be empty");
  for (double r : rate_requirements_bps) require(r >= 0 && std::isfinite(r), "rate requirements must be >= 0");
  const std::size_t max_u = explicit_ues() ? scene.ues.size() : *std::max_element(ue_counts.begin(), ue_counts.end());
  require(rate_requirements_bps.size() == 1 || rate_requirements_bps.size() >= max_u,
          "rate_requirement_bps needs one value or one per UE");
  require(grid.step_x > 0 && grid.step_y > 0 && std::isfinite(grid.step_x) && std::isfinite(grid.step_y),
          "grid steps must be positive");
  require(sigma >= 0 && std::isfinite(sigma), "inner.sigma must be >= 0");
  require(max_rounds >= 1, "inner.max_rounds must be >= 1");
  require(seed_count >= 1, "seeds.count must be >= 1");
  require(!algorithms.empty(), "at least one algorithm is required");
  require(std::set<Algorithm>(algorithms.begin(), algorithms.end()).size() == algorithms.size(),
          "algorithms must not repeat");
  require(!sweep_distances_m.empty(), "sweep.distances_m must not be empty");
  for (double d : sweep_distances_m) require(d > 0 && std::isfinite(d), "sweep distances must be positive");
  require(sweep_step_hz > 0 && std::isfinite(sweep_step_hz), "sweep.step_hz must be positive");

  const auto& bp = band_plan;
  if (bp.mode == BandPlanMode::Explicit) {
    require(!bp.explicit_bands.empty(), "explicit band list is empty");
    for (const auto& b : bp.explicit_bands)
      require(b.center_hz > 0 && b.bandwidth_hz > 0 && std::isfinite(b.center_hz) && std::isfinite(b.bandwidth_hz),
              "explicit bands need positive center_hz and bandwidth_hz");
  } else {
    require(bp.start_hz < bp.stop_hz, "bands.start_hz must be below bands.stop_hz");
    require(bp.start_hz >= kAbsorptionModelMinHz - 1.0 && bp.stop_hz <= kAbsorptionModelMaxHz + 1.0,
            "band range must lie within 200-400 GHz");
    require(bp.width_hz > 0, "bands.width_hz must be positive");
    require(bp.width_hz <= bp.stop_hz - bp.start_hz + 1.0, "band range too narrow for one band");
  }
}

// ---------------------------------------------------------------------------
// JSON configuration

namespace {

void check_keys(const Json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
      throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

double number(const Json& v, const std::string& where) {
  if (!v.is_number()) throw ConfigError(where + " must be a number");
  return v.get<double>();
}

std::uint64_t whole(const Json& v, const std::string& where) {
  if (!v.is_number_integer() || v.get<long long>() < 0) throw ConfigError(where + " must be a non-negative integer");
  return v.get<std::uint64_t>();
}

void read_number(const Json& obj, const char* key, double& out, const std::string& where) {
  if (obj.contains(key)) out = number(obj.at(key), where + "." + key);
}

Vec3 point(const Json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 3) throw ConfigError(where + " must be [x, y, z]");
  return {number(v[0], where), number(v[1], where), number(v[2], where)};
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  if (std::all_of(text.begin(), text.end(), [](unsigned char c) { return std::isspace(c); })) {
    cfg.validate();
    return cfg;
  }
  Json root;
  try {
    root = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
  check_keys(root,
             {"room", "ap", "ues", "atmosphere", "noise", "bands", "irs", "p_max_w", "rate_requirement_bps", "grid",
              "inner", "seeds", "algorithms", "sweep", "record_wallclock"},
             "config");

  if (root.contains("room")) {
    const auto& r = root["room"];
    check_keys(r, {"length_m", "width_m", "ceiling_height_m"}, "room");
    read_number(r, "length_m", cfg.scene.length_m, "room");
    read_number(r, "width_m", cfg.scene.width_m, "room");
    read_number(r, "ceiling_height_m", cfg.scene.ceiling_height_m, "room");
  }
  if (root.contains("ap")) cfg.scene.ap = point(root["ap"], "ap");
  if (root.contains("ues")) {
    const auto& u = root["ues"];
    check_keys(u, {"counts", "height_m", "positions"}, "ues");
    if (u.contains("counts")) {
      const auto& c = u["counts"];
      cfg.ue_counts.clear();
      if (c.is_array()) {
        for (const auto& v : c) cfg.ue_counts.push_back(whole(v, "ues.counts"));
      } else {
        cfg.ue_counts.push_back(whole(c, "ues.counts"));
      }
    }
    read_number(u, "height_m", cfg.ue_height_m, "ues");
    if (u.contains("positions")) {
      if (!u["positions"].is_array() || u["positions"].empty())
        throw ConfigError("ues.positions must be a non-empty list");
      for (const auto& p : u["positions"]) cfg.scene.ues.push_back(point(p, "ues.positions"));
      cfg.ue_counts = {cfg.scene.ues.size()};
    }
  }
  if (root.contains("atmosphere")) {
    const auto& a = root["atmosphere"];
    check_keys(a, {"temperature_c", "pressure_hpa", "relative_humidity_pct", "detuning"}, "atmosphere");
    read_number(a, "temperature_c", cfg.atmosphere.temperature_c, "atmosphere");
    read_number(a, "pressure_hpa", cfg.atmosphere.pressure_hpa, "atmosphere");
    read_number(a, "relative_humidity_pct", cfg.atmosphere.relative_humidity_pct, "atmosphere");
    if (a.contains("detuning")) {
      const auto& d = a["detuning"];
      if (d == "squared") {
        cfg.detuning = DetuningModel::Squared;
      } else if (d == "as_printed") {
        cfg.detuning = DetuningModel::AsPrinted;
      } else {
        throw ConfigError("atmosphere.detuning must be \"squared\" or \"as_printed\"");
      }
    }
  }
  if (root.contains("noise")) {
    const auto& n = root["noise"];
    check_keys(n, {"thermal_dbm_per_hz", "noise_figure_db"}, "noise");
    read_number(n, "thermal_dbm_per_hz", cfg.thermal_noise_dbm_per_hz, "noise");
    read_number(n, "noise_figure_db", cfg.noise_figure_db, "noise");
  }
  if (root.contains("bands")) {
    const auto& b = root["bands"];
    check_keys(b, {"mode", "start_hz", "stop_hz", "width_hz", "list"}, "bands");
    read_number(b, "start_hz", cfg.band_plan.start_hz, "bands");
    read_number(b, "stop_hz", cfg.band_plan.stop_hz, "bands");
    read_number(b, "width_hz", cfg.band_plan.width_hz, "bands");
    if (b.contains("mode")) {
      const auto& m = b["mode"];
      if (m == "tile") {
        cfg.band_plan.mode = BandPlanMode::Tile;
      } else if (m == "auto") {
        cfg.band_plan.mode = BandPlanMode::Auto;
      } else if (m == "explicit") {
        cfg.band_plan.mode = BandPlanMode::Explicit;
      } else {
        throw ConfigError("bands.mode must be \"tile\", \"auto\" or \"explicit\"");
      }
    }
    if (b.contains("list")) {
      if (b.contains("mode") && cfg.band_plan.mode != BandPlanMode::Explicit)
        throw ConfigError("bands.list requires mode \"explicit\"");
      cfg.band_plan.mode = BandPlanMode::Explicit;
      if (!b["list"].is_array()) throw ConfigError("bands.list must be a list");
      for (const auto& e : b["list"]) {
        check_keys(e, {"center_hz", "bandwidth_hz"}, "bands.list entry");
        if (!e.contains("center_hz") || !e.contains("bandwidth_hz"))
          throw ConfigError("bands.list entries need center_hz and bandwidth_hz");
        cfg.band_plan.explicit_bands.push_back(
            {number(e["center_hz"], "bands.list.center_hz"), number(e["bandwidth_hz"], "bands.list.bandwidth_hz")});
      }
    }
  }
  if (root.contains("irs")) {
    const auto& i = root["irs"];
    check_keys(i, {"elements", "spacing_m"}, "irs");
    if (i.contains("elements")) cfg.element_count = whole(i["elements"], "irs.elements");
    read_number(i, "spacing_m", cfg.spacing_m, "irs");
  }
  if (root.contains("p_max_w")) cfg.p_max_w = number(root["p_max_w"], "p_max_w");
  if (root.contains("rate_requirement_bps")) {
    const auto& r = root["rate_requirement_bps"];
    cfg.rate_requirements_bps.clear();
    if (r.is_array()) {
      for (const auto& v : r) cfg.rate_requirements_bps.push_back(number(v, "rate_requirement_bps"));
    } else {
      cfg.rate_requirements_bps.push_back(number(r, "rate_requirement_bps"));
    }
  }
  if (root.contains("grid")) {
    const auto& g = root["grid"];
    check_keys(g, {"step_x_m", "step_y_m", "include_distance_anchor"}, "grid");
    read_number(g, "step_x_m", cfg.grid.step_x, "grid");
    read_number(g, "step_y_m", cfg.grid.step_y, "grid");
    if (g.contains("include_distance_anchor")) {
      if (!g["include_distance_anchor"].is_boolean()) throw ConfigError("grid.include_distance_anchor must be a boolean");
      cfg.grid.include_distance_anchor = g["include_distance_anchor"].get<bool>();
    }
  }
  if (root.contains("inner")) {
    const auto& n = root["inner"];
    check_keys(n, {"sigma", "max_rounds"}, "inner");
    read_number(n, "sigma", cfg.sigma, "inner");
    if (n.contains("max_rounds")) cfg.max_rounds = static_cast<int>(whole(n["max_rounds"], "inner.max_rounds"));
  }
  if (root.contains("seeds")) {
    const auto& s = root["seeds"];
    check_keys(s, {"first", "count"}, "seeds");
    if (s.contains("first")) cfg.first_seed = whole(s["first"], "seeds.first");
    if (s.contains("count")) cfg.seed_count = whole(s["count"], "seeds.count");
  }
  if (root.contains("algorithms")) {
    const auto& a = root["algorithms"];
    if (!a.is_array()) throw ConfigError("algorithms must be a list");
    cfg.algorithms.clear();
    for (const auto& v : a) {
      if (!v.is_string()) throw ConfigError("algorithms entries must be strings");
      cfg.algorithms.push_back(parse_algorithm(v.get<std::string>()));
    }
  }
  if (root.contains("sweep")) {
    const auto& s = root["sweep"];
    check_keys(s, {"distances_m", "step_hz"}, "sweep");
    if (s.contains("distances_m")) {
      if (!s["distances_m"].is_array()) throw ConfigError("sweep.distances_m must be a list");
      cfg.sweep_distances_m.clear();
      for (const auto& v : s["distances_m"]) cfg.sweep_distances_m.push_back(number(v, "sweep.distances_m"));
    }
    read_number(s, "step_hz", cfg.sweep_step_hz, "sweep");
  }
  if (root.contains("record_wallclock")) {
    if (!root["record_wallclock"].is_boolean()) throw ConfigError("record_wallclock must be a boolean");
    cfg.record_wallclock = root["record_wallclock"].get<bool>();
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_config(buf.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Band plans

std::vector<double> absorption_peaks(const Medium& medium, double start_hz, double stop_hz) {
  constexpr double kRaster = 0.1e9;
  const auto steps = static_cast<std::size_t>(std::floor((stop_hz - start_hz) / kRaster + 1e-9));
  std::vector<double> k(steps + 1);
  for (std::size_t s = 0; s <= steps; ++s) k[s] = medium.absorption(start_hz + static_cast<double>(s) * kRaster);
  std::vector<double> peaks;
  for (std::size_t s = 1; s + 1 <= steps; ++s)
    if (k[s] > k[s - 1] && k[s] > k[s + 1]) peaks.push_back(start_hz + static_cast<double>(s) * kRaster);
  return peaks;
}

std::vector<SubBand> tiled_band_plan(double start_hz, double stop_hz, double width_hz, double noise_psd_w_per_hz) {
  if (!(width_hz > 0.0) || !(stop_hz > start_hz)) throw std::invalid_argument("bad band range");
  const auto count = static_cast<std::size_t>(std::floor((stop_hz - start_hz) / width_hz + 1e-9));
  if (count == 0) throw std::invalid_argument("band range too narrow for one band");
  std::vector<SubBand> bands;
  for (std::size_t i = 0; i < count; ++i)
    bands.push_back({start_hz + (static_cast<double>(i) + 0.5) * width_hz, width_hz, noise_psd_w_per_hz});
  return bands;
}

std::vector<SubBand> auto_band_plan(double start_hz, double stop_hz, double width_hz, const Medium& medium,
                                    double noise_psd_w_per_hz) {
  if (!(width_hz > 0.0) || !(stop_hz > start_hz)) throw std::invalid_argument("bad band range");
  if (width_hz > stop_hz - start_hz + 1.0) throw std::invalid_argument("band range too narrow for one band");

  std::vector<double> edges{start_hz};
  for (double p : absorption_peaks(medium, start_hz, stop_hz)) edges.push_back(p);
  edges.push_back(stop_hz);

  constexpr double kShift = 0.1e9;
  std::vector<SubBand> bands;
  for (std::size_t g = 0; g + 1 < edges.size(); ++g) {
    // one raster step of clearance on the sides bounded by a peak
    const double lo = edges[g] + (g > 0 ? kShift : 0.0);
    const double hi = edges[g + 1] - (g + 2 < edges.size() ? kShift : 0.0);
    const double span = hi - lo;
    if (!(span > 0.0)) continue;
    const auto count = static_cast<std::size_t>(std::floor(span / width_hz + 1e-9));
    if (count == 0) continue;
    const double room = span - static_cast<double>(count) * width_hz;
    const auto shifts = static_cast<std::size_t>(std::floor(room / kShift + 1e-9));
    double best_offset = 0.0;
    double best_cost = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s <= shifts; ++s) {
      const double offset = static_cast<double>(s) * kShift;
      double cost = 0.0;
      for (std::size_t i = 0; i < count; ++i)
        cost += medium.absorption(lo + offset + (static_cast<double>(i) + 0.5) * width_hz);
      if (cost < best_cost) {
        best_cost = cost;
        best_offset = offset;
      }
    }
    for (std::size_t i = 0; i < count; ++i)
      bands.push_back({lo + best_offset + (static_cast<double>(i) + 0.5) * width_hz, width_hz, noise_psd_w_per_hz});
  }
  if (bands.empty()) return tiled_band_plan(start_hz, stop_hz, width_hz, noise_psd_w_per_hz);
  std::sort(bands.begin(), bands.end(), [](const SubBand& a, const SubBand& b) { return a.center_hz < b.center_hz; });
  return bands;
}

std::vector<SubBand> build_band_plan(const ExperimentConfig& config) {
  const auto& bp = config.band_plan;
  const double noise = config.noise_psd_w_per_hz();
  switch (bp.mode) {
    case BandPlanMode::Explicit: {
      std::vector<SubBand> bands;
      for (const auto& e : bp.explicit_bands) bands.push_back({e.center_hz, e.bandwidth_hz, noise});
      return bands;
    }
    case BandPlanMode::Auto: return auto_band_plan(bp.start_hz, bp.stop_hz, bp.width_hz, config.medium(), noise);
    case BandPlanMode::Tile: break;
  }
  return tiled_band_plan(bp.start_hz, bp.stop_hz, bp.width_hz, noise);
}

// ---------------------------------------------------------------------------
// Absorption sweep

namespace {

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

}  // namespace

void write_absorption_sweep(const ExperimentConfig& config, std::ostream& out) {
  const Medium medium = config.medium();
  const double lo = kAbsorptionModelMinHz;
  const double hi = kAbsorptionModelMaxHz;
  const auto steps = static_cast<std::size_t>(std::floor((hi - lo) / config.sweep_step_hz + 1e-9));

  out << "f_hz,K_per_m";
  for (std::size_t d = 0; d < config.sweep_distances_m.size(); ++d) out << ",gain_db_d" << (d + 1);
  out << '\n';
  for (std::size_t s = 0; s <= steps; ++s) {
    const double f = lo + static_cast<double>(s) * config.sweep_step_hz;
    const double k = medium.absorption(f);
    out << fmt("%.1f", f) << ',' << fmt("%.9e", k);
    for (double d : config.sweep_distances_m)
      out << ',' << fmt("%.6f", 10.0 * std::log10(std::norm(cascaded_gain(f, d, k))));
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// Monte-Carlo

std::vector<Vec3> draw_ue_positions(const ExperimentConfig& config, std::uint64_t seed, std::size_t count) {
  if (config.explicit_ues()) return config.scene.ues;
  SplitMix64 root(seed);
  SplitMix64 stream = root.split();
  std::vector<Vec3> ues(count);
  for (auto& w : ues) {
    w.x = stream.uniform(0.0, config.scene.width_m);
    w.y = stream.uniform(0.0, config.scene.length_m);
    w.z = config.ue_height_m;
  }
  return ues;
}

ProblemInstance make_instance(const ExperimentConfig& config, const std::vector<SubBand>& bands,
                              std::uint64_t seed, std::size_t ue_count) {
  ProblemInstance in;
  in.scene = config.scene;
  in.scene.ues = draw_ue_positions(config, seed, ue_count);
  in.bands = bands;
  in.medium = config.medium();
  in.element_count = config.element_count;
  in.spacing_m = config.spacing_m;
  in.p_max = config.p_max_w;
  const std::size_t n_ue = in.scene.ues.size();
  in.rate_requirements.resize(n_ue);
  for (std::size_t u = 0; u < n_ue; ++u)
    in.rate_requirements[u] =
        config.rate_requirements_bps.size() == 1 ? config.rate_requirements_bps[0] : config.rate_requirements_bps[u];
  return in;
}

namespace {

// Separate stream per (seed, U, scheme) so adding a scheme or a UE count
// leaves the other draws untouched.
SplitMix64 baseline_stream(std::uint64_t seed, std::size_t ue_count, Algorithm algo) {
  SplitMix64 root(seed);
  (void)root.split();  // UE positions
  SplitMix64 mix(root.next() ^ (0x9E3779B97F4A7C15ULL * (ue_count + 1)) ^ static_cast<std::uint64_t>(algo));
  return mix.split();
}

}  // namespace

Solution run_algorithm(const ExperimentConfig& config, const ProblemInstance& instance, Algorithm algo,
                       std::uint64_t seed, ExecPolicy policy) {
  const InnerOptions inner = config.inner_options();
  const std::size_t n_ue = instance.scene.ues.size();
  switch (algo) {
    case Algorithm::Bcs: return bcs_solve(instance, config.grid, inner, policy);
    case Algorithm::MiniDis: return baseline_mini_dis(instance, inner);
    case Algorithm::RanLoc: {
      auto rng = baseline_stream(seed, n_ue, algo);
      return baseline_ran_loc(instance, rng, inner);
    }
    case Algorithm::RanPhi: {
      auto rng = baseline_stream(seed, n_ue, algo);
      return baseline_ran_phi(instance, rng, config.grid, inner, policy);
    }
  }
  throw std::logic_error("unhandled algorithm");
}

std::string check_solution(const ProblemInstance& instance, const Solution& solution) {
  const std::size_t n_ue = instance.scene.ues.size();
  const std::size_t n_band = instance.bands.size();
  const auto& a = solution.assignment;
  if (a.owner.size() != n_band || a.power.size() != n_band) return "assignment does not cover every sub-band";
  for (auto u : a.owner)
    if (u >= n_ue) return "sub-band assigned to a non-existent UE";
  double total = 0.0;
  for (double p : a.power) {
    if (!(p >= 0.0) || !std::isfinite(p)) return "negative or non-finite power";
    total += p;
  }
  if (total > instance.p_max + 1e-9) return "total power exceeds p_max";
  if (solution.phases.size() != instance.element_count) return "phase vector has the wrong length";
  if (!solution.feasible) return solution.sum_rate == 0.0 ? "" : "infeasible solution with non-zero rate";
  if (solution.ue_rates.size() != n_ue) return "missing per-UE rates";
  const double sum = std::accumulate(solution.ue_rates.begin(), solution.ue_rates.end(), 0.0);
  if (std::abs(sum - solution.sum_rate) > 1e-9 * std::max(1.0, sum)) return "sum rate does not match per-UE rates";
  for (std::size_t u = 0; u < n_ue; ++u)
    if (solution.ue_rates[u] < instance.rate_requirements[u] * (1.0 - 1e-6)) return "a UE misses its rate floor";
  return "";
}

std::vector<AggregateRow> aggregate_records(const std::vector<RunRecord>& records,
                                            const std::vector<Algorithm>& algorithms,
                                            const std::vector<std::size_t>& ue_counts) {
  std::vector<AggregateRow> rows;
  for (auto u : ue_counts) {
    for (auto algo : algorithms) {
      AggregateRow row;
      row.algo = algo;
      row.ue_count = u;
      std::vector<double> values;
      for (const auto& r : records) {
        if (r.algo != algo || r.ue_count != u) continue;
        values.push_back(r.error.empty() && r.solution.feasible ? r.solution.sum_rate : 0.0);
        if (r.error.empty() && r.solution.feasible) ++row.feasible_runs;
      }
      row.runs = values.size();
      if (!values.empty()) {
        row.mean_sum_rate = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
        if (values.size() > 1) {
          double ss = 0.0;
          for (double v : values) ss += (v - row.mean_sum_rate) * (v - row.mean_sum_rate);
          row.stddev_sum_rate = std::sqrt(ss / static_cast<double>(values.size() - 1));
        }
      }
      rows.push_back(row);
    }
  }
  return rows;
}

RunReport run_experiment(const ExperimentConfig& config, ExecPolicy policy, std::ostream* log) {
  config.validate();
  RunReport report;
  report.bands = build_band_plan(config);
  const std::vector<std::size_t> counts =
      config.explicit_ues() ? std::vector<std::size_t>{config.scene.ues.size()} : config.ue_counts;

  for (std::size_t s = 0; s < config.seed_count; ++s) {
    const std::uint64_t seed = config.first_seed + s;
    for (auto u : counts) {
      for (auto algo : config.algorithms) {
        RunRecord rec;
        rec.seed = seed;
        rec.algo = algo;
        rec.ue_count = u;
        const auto t0 = std::chrono::steady_clock::now();
        try {
          const ProblemInstance instance = make_instance(config, report.bands, seed, u);
          rec.solution = run_algorithm(config, instance, algo, seed, policy);
          rec.error = check_solution(instance, rec.solution);
        } catch (const std::exception& e) {
          rec.error = e.what();
        }
        rec.wallclock_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (!rec.error.empty()) {
          rec.solution.feasible = false;
          rec.solution.sum_rate = 0.0;
        }
        if (log) {
          *log << "seed " << seed << " U=" << u << ' ' << algorithm_name(algo) << ' '
               << (rec.error.empty() ? (rec.solution.feasible ? fmt("%.6e bit/s", rec.solution.sum_rate)
                                                              : std::string("infeasible"))
                                     : "failed: " + rec.error)
               << '\n';
        }
        report.records.push_back(std::move(rec));
      }
    }
  }
  report.aggregate = aggregate_records(report.records, config.algorithms, counts);
  return report;
}

void write_summary_csv(const RunReport& report, bool with_wallclock, std::ostream& out) {
  out << "seed,algo,U,sum_rate_bps,feasible,wallclock_s\n";
  for (const auto& r : report.records) {
    out << r.seed << ',' << algorithm_name(r.algo) << ',' << r.ue_count << ','
        << fmt("%.17g", r.solution.sum_rate) << ',' << (r.solution.feasible ? "true" : "false") << ',';
    if (with_wallclock) out << fmt("%.6f", r.wallclock_s);
    out << '\n';
  }
}

void write_aggregate_csv(const RunReport& report, std::ostream& out) {
  out << "algo,U,runs,feasible_runs,mean_sum_rate_bps,std_sum_rate_bps\n";
  for (const auto& row : report.aggregate)
    out << algorithm_name(row.algo) << ',' << row.ue_count << ',' << row.runs << ',' << row.feasible_runs << ','
        << fmt("%.17g", row.mean_sum_rate) << ',' << fmt("%.17g", row.stddev_sum_rate) << '\n';
}

namespace {

Json bands_json(const std::vector<SubBand>& bands) {
  Json list = Json::array();
  for (const auto& b : bands)
    list.push_back({{"center_hz", b.center_hz}, {"bandwidth_hz", b.bandwidth_hz},
                    {"noise_psd_w_per_hz", b.noise_psd_w_per_hz}});
  return list;
}

Json solution_body(const Solution& s) {
  Json phases = Json::array();
  for (double a : s.phases.angles()) phases.push_back(a);
  return {{"feasible", s.feasible},
          {"sum_rate_bps", s.sum_rate},
          {"irs_anchor", {s.placement.x, s.placement.y}},
          {"ue_rates_bps", s.ue_rates},
          {"band_owner", s.assignment.owner},
          {"band_power_w", s.assignment.power},
          {"phases_rad", phases},
          {"converged", s.converged},
          {"rounds", s.rounds},
          {"trace_bps", s.trace},
          {"grid_points", s.grid_points},
          {"infeasible_points", s.infeasible_points}};
}

}  // namespace

void write_report_json(const ExperimentConfig& config, const RunReport& report, std::ostream& out) {
  Json header;
  header["room"] = {{"length_m", config.scene.length_m},
                    {"width_m", config.scene.width_m},
                    {"ceiling_height_m", config.scene.ceiling_height_m}};
  header["ap"] = {config.scene.ap.x, config.scene.ap.y, config.scene.ap.z};
  header["ue_height_m"] = config.ue_height_m;
  header["atmosphere"] = {{"temperature_c", config.atmosphere.temperature_c},
                          {"pressure_hpa", config.atmosphere.pressure_hpa},
                          {"relative_humidity_pct", config.atmosphere.relative_humidity_pct},
                          {"mixing_ratio", config.medium().mixing_ratio}};
  header["noise_psd_w_per_hz"] = config.noise_psd_w_per_hz();
  header["bands"] = bands_json(report.bands);
  header["irs"] = {{"elements", config.element_count}, {"spacing_m", config.spacing_m}};
  header["p_max_w"] = config.p_max_w;
  header["rate_requirement_bps"] = config.rate_requirements_bps;
  header["grid"] = {{"step_x_m", config.grid.step_x},
                    {"step_y_m", config.grid.step_y},
                    {"include_distance_anchor", config.grid.include_distance_anchor}};
  header["inner"] = {{"sigma", config.sigma}, {"max_rounds", config.max_rounds}};

  Json runs = Json::array();
  for (const auto& r : report.records) {
    Json entry = {{"seed", r.seed}, {"algo", algorithm_name(r.algo)}, {"U", r.ue_count}};
    entry["solution"] = solution_body(r.solution);
    if (config.record_wallclock) entry["wallclock_s"] = r.wallclock_s;
    if (!r.error.empty()) entry["error"] = r.error;
    runs.push_back(std::move(entry));
  }
  Json agg = Json::array();
  for (const auto& row : report.aggregate)
    agg.push_back({{"algo", algorithm_name(row.algo)},
                   {"U", row.ue_count},
                   {"runs", row.runs},
                   {"feasible_runs", row.feasible_runs},
                   {"mean_sum_rate_bps", row.mean_sum_rate},
                   {"std_sum_rate_bps", row.stddev_sum_rate}});
  const Json doc = {{"config", header}, {"runs", runs}, {"aggregate", agg}};
  out << doc.dump(2) << '\n';
}

std::string solution_json(const ProblemInstance& instance, const Solution& solution, Algorithm algo,
                          std::uint64_t seed) {
  Json ues = Json::array();
  for (const auto& w : instance.scene.ues) ues.push_back({w.x, w.y, w.z});
  const Json doc = {{"algo", algorithm_name(algo)},
                    {"seed", seed},
                    {"ues", ues},
                    {"bands", bands_json(instance.bands)},
                    {"solution", solution_body(solution)}};
  return doc.dump(2);
}

}  // namespace thz
