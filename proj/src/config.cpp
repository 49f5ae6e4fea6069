// Copyright 2026 The mvlse Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "mvlse/error.hpp"
#include "mvlse/experiments.hpp"

namespace mvlse {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void fail(std::string_view key, int line, const std::string& why) {
  std::ostringstream os;
  os << "line " << line << ", key '" << key << "': " << why;
  throw Error(ErrorKind::kConfig, os.str());
}

double to_double(std::string_view key, int line, std::string_view text) {
  text = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v)) {
    fail(key, line, "expected a number, got '" + std::string(text) + "'");
  }
  return v;
}

template <typename Int>
Int to_integer(std::string_view key, int line, std::string_view text) {
  text = trim(text);
  Int v{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    fail(key, line, "expected an integer, got '" + std::string(text) + "'");
  }
  return v;
}

std::vector<std::string_view> split_list(std::string_view text) {
  std::vector<std::string_view> out;
  while (true) {
    const auto comma = text.find(',');
    out.push_back(trim(text.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return out;
}

std::vector<double> to_doubles(std::string_view key, int line, std::string_view text) {
  std::vector<double> out;
  for (auto item : split_list(text)) out.push_back(to_double(key, line, item));
  return out;
}

bool to_bool(std::string_view key, int line, std::string_view text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  fail(key, line, "expected true or false");
}

InitialPath to_initial_path(std::string_view key, int line, std::string_view text) {
  auto parse_arg = [&](std::string_view prefix) -> std::optional<double> {
    if (text.substr(0, prefix.size()) != prefix) return std::nullopt;
    auto rest = text.substr(prefix.size());
    if (rest.empty()) return std::nullopt;
    if (rest.front() != '(' || rest.back() != ')') fail(key, line, "expected " + std::string(prefix) + "(value)");
    return to_double(key, line, rest.substr(1, rest.size() - 2));
  };
  if (text == "linear-ramp") return {InitialPath::Kind::kLinearRamp, 1.0};
  if (auto v = parse_arg("linear-ramp")) return {InitialPath::Kind::kLinearRamp, *v};
  if (auto v = parse_arg("constant")) return {InitialPath::Kind::kConstant, *v};
  fail(key, line, "expected linear-ramp(slope) or constant(level)");
}

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

template <typename Range>
std::string join(const Range& values) {
  std::string out;
  for (const auto& v : values) {
    if (!out.empty()) out += ", ";
    if constexpr (std::is_floating_point_v<std::decay_t<decltype(v)>>) {
      out += format_double(v);
    } else {
      out += std::to_string(v);
    }
  }
  return out;
}

}  // namespace

Segment InitialPath::sample(const GridSpec& grid) const {
  std::vector<double> values(static_cast<std::size_t>(grid.M + 1));
  for (int i = 0; i <= grid.M; ++i) {
    values[i] = kind == Kind::kConstant ? value : value * grid.time_at(i - grid.M);
  }
  return Segment(1, grid.delta, std::move(values));
}

std::string InitialPath::to_string() const {
  return (kind == Kind::kConstant ? "constant(" : "linear-ramp(") + format_double(value) + ")";
}

EstimatorOptions ExperimentConfig::estimator_options() const {
  EstimatorOptions o;
  o.grid.points_per_axis = grid_points;
  o.nelder_mead.diameter_tol = nm_tolerance;
  o.nelder_mead.max_evaluations = nm_max_evaluations;
  return o;
}

void ExperimentConfig::validate() const {
  auto bad = [](const std::string& why) { throw Error(ErrorKind::kConfig, why); };
  if (model != "example" && model != "custom-hook") bad("model must be example or custom-hook");
  if (n_list.empty()) bad("n_list must be nonempty");
  if (epsilons.empty()) bad("epsilons must be nonempty");
  for (double e : epsilons) {
    if (!(e >= 0.0 && e < 1.0)) bad("epsilon " + format_double(e) + " outside [0, 1)");
  }
  for (int nn : n_list) make_grid(T, nn, r0);
  make_grid(T, n, r0);
  if (theta0.size() == 0 || theta_box.dim() != theta0.size()) bad("theta0 and theta_box dimensions differ");
  if (!theta_box.contains(theta0)) bad("theta0 lies outside theta_box");
  if (model == "example" && theta0.size() != 2) bad("the example model has two parameters");
  if (replications < 1) bad("replications must be at least 1");
  if (n_particles < 1) bad("n_particles must be at least 1");
  if (!(alpha > 0.0 && alpha <= 0.5)) bad("alpha=" + format_double(alpha) + " must lie in (0, 1/2]");
  if (grid_points < 2) bad("grid_points must be at least 2");
  if (!(nm_tolerance > 0.0) || nm_max_evaluations < 1) bad("Nelder-Mead settings must be positive");
  if (rate_refine < 1) bad("rate_refine must be at least 1");
  if (!(reference_delta > 0.0)) bad("reference_delta must be positive");
  if (workers < 0) bad("workers must be nonnegative");
}

ExperimentConfig parse_config(std::string_view text) {
  ExperimentConfig cfg;
  std::map<std::string, int, std::less<>> seen;
  std::vector<double> box_values;
  bool have_n = false, have_n_list = false;

  using Setter = std::function<void(std::string_view, int, std::string_view)>;
  const std::map<std::string_view, Setter> setters = {
      {"model", [&](auto k, int l, auto v) {
         if (v != "example" && v != "custom-hook") fail(k, l, "expected example or custom-hook");
         cfg.model = std::string(v);
       }},
      {"r0", [&](auto k, int l, auto v) { cfg.r0 = to_double(k, l, v); }},
      {"T", [&](auto k, int l, auto v) { cfg.T = to_double(k, l, v); }},
      {"n", [&](auto k, int l, auto v) {
         cfg.n = to_integer<int>(k, l, v);
         have_n = true;
       }},
      {"n_list", [&](auto k, int l, auto v) {
         cfg.n_list.clear();
         for (auto item : split_list(v)) cfg.n_list.push_back(to_integer<int>(k, l, item));
         have_n_list = true;
       }},
      {"theta0", [&](auto k, int l, auto v) {
         const auto xs = to_doubles(k, l, v);
         cfg.theta0 = Eigen::Map<const Vector>(xs.data(), static_cast<Eigen::Index>(xs.size()));
       }},
      {"theta_box", [&](auto k, int l, auto v) {
         box_values = to_doubles(k, l, v);
         if (box_values.size() % 2 != 0) fail(k, l, "expected lower, upper pairs per axis");
       }},
      {"epsilons", [&](auto k, int l, auto v) {
         cfg.epsilons = to_doubles(k, l, v);
         for (double e : cfg.epsilons) {
           if (!(e > 0.0 && e < 1.0)) fail(k, l, "epsilon " + format_double(e) + " outside (0, 1)");
         }
       }},
      {"replications", [&](auto k, int l, auto v) { cfg.replications = to_integer<int>(k, l, v); }},
      {"n_particles", [&](auto k, int l, auto v) { cfg.n_particles = to_integer<int>(k, l, v); }},
      {"alpha", [&](auto k, int l, auto v) {
         cfg.alpha = to_double(k, l, v);
         if (!(cfg.alpha > 0.0 && cfg.alpha <= 0.5)) {
           fail(k, l, "alpha=" + format_double(cfg.alpha) + " outside (0, 1/2]");
         }
       }},
      {"tamed", [&](auto k, int l, auto v) { cfg.tamed = to_bool(k, l, v); }},
      {"law_mode", [&](auto k, int l, auto v) {
         if (v != "particle-ensemble" && v != "dirac-at-limit-ode") {
           fail(k, l, "expected particle-ensemble or dirac-at-limit-ode");
         }
         cfg.law_mode = law_mode_from_string(v);
       }},
      {"seed", [&](auto k, int l, auto v) { cfg.seed = to_integer<std::uint64_t>(k, l, v); }},
      {"initial_path", [&](auto k, int l, auto v) { cfg.initial_path = to_initial_path(k, l, v); }},
      {"method", [&](auto k, int l, auto v) {
         if (v != "grid" && v != "nelder-mead") fail(k, l, "expected grid or nelder-mead");
         cfg.method = estimation_method_from_string(v);
       }},
      {"grid_points", [&](auto k, int l, auto v) { cfg.grid_points = to_integer<int>(k, l, v); }},
      {"nm_tolerance", [&](auto k, int l, auto v) { cfg.nm_tolerance = to_double(k, l, v); }},
      {"nm_max_evaluations", [&](auto k, int l, auto v) { cfg.nm_max_evaluations = to_integer<long>(k, l, v); }},
      {"rate_refine", [&](auto k, int l, auto v) { cfg.rate_refine = to_integer<int>(k, l, v); }},
      {"reference_delta", [&](auto k, int l, auto v) { cfg.reference_delta = to_double(k, l, v); }},
      {"workers", [&](auto k, int l, auto v) { cfg.workers = to_integer<int>(k, l, v); }},
  };

  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto eol = text.find('\n', pos);
    std::string_view line = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) fail(line, line_no, "expected 'key = value'");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    const auto it = setters.find(key);
    if (it == setters.end()) fail(key, line_no, "unknown key");
    if (seen.count(key)) fail(key, line_no, "duplicate key");
    if (value.empty()) fail(key, line_no, "missing value");
    seen.emplace(std::string(key), line_no);
    it->second(key, line_no, value);
  }

  auto line_of = [&](std::string_view key) {
    const auto it = seen.find(key);
    return it == seen.end() ? 0 : it->second;
  };
  for (std::string_view key : {"r0", "T", "theta0", "theta_box"}) {
    if (!seen.count(key)) fail(key, 0, "required key is missing");
  }
  if (!have_n && !have_n_list) fail("n", 0, "required key is missing");
  if (have_n && !have_n_list) cfg.n_list = {cfg.n};
  if (!have_n && have_n_list) {
    if (cfg.n_list.empty()) fail("n_list", line_of("n_list"), "must be nonempty");
    cfg.n = cfg.n_list.front();
  }

  const auto p = static_cast<Eigen::Index>(box_values.size() / 2);
  if (p != cfg.theta0.size()) fail("theta_box", line_of("theta_box"), "dimension differs from theta0");
  Vector lo(p), hi(p);
  for (Eigen::Index i = 0; i < p; ++i) {
    lo(i) = box_values[2 * i];
    hi(i) = box_values[2 * i + 1];
  }
  try {
    cfg.theta_box = ThetaBox(lo, hi);
  } catch (const Error& e) {
    fail("theta_box", line_of("theta_box"), e.what());
  }
  if (!cfg.theta_box.contains(cfg.theta0)) fail("theta0", line_of("theta0"), "theta0 lies outside theta_box");

  auto check_grid = [&](std::string_view key, int nn) {
    try {
      make_grid(cfg.T, nn, cfg.r0);
    } catch (const Error& e) {
      fail(key, line_of(key), e.what());
    }
  };
  if (have_n) check_grid("n", cfg.n);
  for (int nn : cfg.n_list) check_grid(have_n_list ? "n_list" : "n", nn);

  auto range = [&](std::string_view key, bool ok, const std::string& why) {
    if (!ok) fail(key, line_of(key), why);
  };
  range("replications", cfg.replications >= 1, "must be at least 1");
  range("n_particles", cfg.n_particles >= 1, "must be at least 1");
  range("grid_points", cfg.grid_points >= 2, "must be at least 2");
  range("nm_tolerance", cfg.nm_tolerance > 0.0, "must be positive");
  range("nm_max_evaluations", cfg.nm_max_evaluations >= 1, "must be at least 1");
  range("rate_refine", cfg.rate_refine >= 1, "must be at least 1");
  range("reference_delta", cfg.reference_delta > 0.0, "must be positive");
  range("workers", cfg.workers >= 0, "must be nonnegative");
  range("theta0", cfg.model != "example" || cfg.theta0.size() == 2, "the example model has two parameters");

  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string render_config(const ExperimentConfig& cfg) {
  std::vector<double> theta0(cfg.theta0.data(), cfg.theta0.data() + cfg.theta0.size());
  std::vector<double> box;
  for (Eigen::Index i = 0; i < cfg.theta_box.dim(); ++i) {
    box.push_back(cfg.theta_box.lower(i));
    box.push_back(cfg.theta_box.upper(i));
  }
  std::ostringstream os;
  os << "model = " << cfg.model << '\n'
     << "r0 = " << format_double(cfg.r0) << '\n'
     << "T = " << format_double(cfg.T) << '\n'
     << "n = " << cfg.n << '\n'
     << "n_list = " << join(cfg.n_list) << '\n'
     << "theta0 = " << join(theta0) << '\n'
     << "theta_box = " << join(box) << '\n'
     << "epsilons = " << join(cfg.epsilons) << '\n'
     << "replications = " << cfg.replications << '\n'
     << "n_particles = " << cfg.n_particles << '\n'
     << "alpha = " << format_double(cfg.alpha) << '\n'
     << "tamed = " << (cfg.tamed ? "true" : "false") << '\n'
     << "law_mode = " << to_string(cfg.law_mode) << '\n'
     << "seed = " << cfg.seed << '\n'
     << "initial_path = " << cfg.initial_path.to_string() << '\n'
     << "method = " << to_string(cfg.method) << '\n'
     << "grid_points = " << cfg.grid_points << '\n'
     << "nm_tolerance = " << format_double(cfg.nm_tolerance) << '\n'
     << "nm_max_evaluations = " << cfg.nm_max_evaluations << '\n'
     << "rate_refine = " << cfg.rate_refine << '\n'
     << "reference_delta = " << format_double(cfg.reference_delta) << '\n'
     << "workers = " << cfg.workers << '\n';
  return os.str();
}

}  // namespace mvlse
