#include "config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iomanip>
#include <numbers>
#include <set>
#include <sstream>

#include "errors.hpp"

namespace ionjc {

namespace {

struct ModeName {
  Mode mode;
  std::string_view name;
};

constexpr ModeName kModes[] = {
    {Mode::Sigma22ClassicalOrdered, "sigma22-classical-ordered"},
    {Mode::Sigma22ClassicalNoOrdering, "sigma22-classical-noordering"},
    {Mode::Sigma22Quantized, "sigma22-quantized"},
    {Mode::CompareOrdering, "compare-ordering"},
    {Mode::ComparePump, "compare-pump"},
    {Mode::PFunction, "pfunction"},
};

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double to_double(std::string_view text) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || text.empty()) throw std::invalid_argument("expected a number");
  return v;
}

int to_int(std::string_view text) {
  int v = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || text.empty()) throw std::invalid_argument("expected an integer");
  return v;
}

std::vector<double> to_list(std::string_view text) {
  std::vector<double> out;
  if (trim(text).empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto comma = text.find(',', start);
    out.push_back(to_double(trim(text.substr(start, comma - start))));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string format_list(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    s += format_double(v[i]);
  }
  return s;
}

struct Key {
  std::string_view name;
  std::function<void(RunConfig&, std::string_view)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <typename Member>
Key real_key(std::string_view name, Member member) {
  return {name, [member](RunConfig& c, std::string_view v) { std::invoke(member, c) = to_double(v); },
          [member](const RunConfig& c) { return format_double(std::invoke(member, c)); }};
}

template <typename Member>
Key int_key(std::string_view name, Member member) {
  return {name, [member](RunConfig& c, std::string_view v) { std::invoke(member, c) = to_int(v); },
          [member](const RunConfig& c) { return std::to_string(std::invoke(member, c)); }};
}

template <typename Member>
Key text_key(std::string_view name, Member member) {
  return {name, [member](RunConfig& c, std::string_view v) { std::invoke(member, c) = std::string(v); },
          [member](const RunConfig& c) { return std::invoke(member, c); }};
}

template <typename Member>
Key list_key(std::string_view name, Member member) {
  return {name, [member](RunConfig& c, std::string_view v) { std::invoke(member, c) = to_list(v); },
          [member](const RunConfig& c) { return format_list(std::invoke(member, c)); }};
}

const std::vector<Key>& keys() {
  static const std::vector<Key> table = [] {
    std::vector<Key> k;
    k.push_back({"mode", [](RunConfig& c, std::string_view v) { c.mode = parse_mode(v); },
                 [](const RunConfig& c) { return std::string(to_string(c.mode)); }});
    k.push_back(text_key("name", &RunConfig::name));
    k.push_back({"k", [](RunConfig& c, std::string_view v) { c.params.k = to_int(v); },
                 [](const RunConfig& c) { return std::to_string(c.params.k); }});
    k.push_back({"eta", [](RunConfig& c, std::string_view v) { c.params.eta = to_double(v); },
                 [](const RunConfig& c) { return format_double(c.params.eta); }});
    k.push_back({"delta_phi", [](RunConfig& c, std::string_view v) { c.params.delta_phi = to_double(v); },
                 [](const RunConfig& c) { return format_double(c.params.delta_phi); }});
    k.push_back({"delta_omega_tilde",
                 [](RunConfig& c, std::string_view v) { c.params.delta_omega_tilde = to_double(v); },
                 [](const RunConfig& c) { return format_double(c.params.delta_omega_tilde); }});
    k.push_back({"nu_tilde", [](RunConfig& c, std::string_view v) { c.params.nu_tilde = to_double(v); },
                 [](const RunConfig& c) { return format_double(c.params.nu_tilde); }});
    k.push_back({"omega21_tilde", [](RunConfig& c, std::string_view v) { c.params.omega21_tilde = to_double(v); },
                 [](const RunConfig& c) { return format_double(c.params.omega21_tilde); }});
    k.push_back(real_key("r", &RunConfig::r));
    k.push_back(int_key("initial_level", &RunConfig::initial_level));
    k.push_back(real_key("alpha0_abs", &RunConfig::alpha0_abs));
    k.push_back(real_key("alpha0_arg", &RunConfig::alpha0_arg));
    k.push_back(real_key("beta0_abs", &RunConfig::beta0_abs));
    k.push_back(real_key("beta0_arg", &RunConfig::beta0_arg));
    k.push_back(real_key("t_start", &RunConfig::t_start));
    k.push_back(real_key("t_end", &RunConfig::t_end));
    k.push_back(int_key("n_points", &RunConfig::n_points));
    k.push_back(list_key("t_snapshots", &RunConfig::t_snapshots));
    k.push_back(list_key("beta0_list", &RunConfig::beta0_list));
    k.push_back(text_key("filter_kind", &RunConfig::filter_kind));
    k.push_back({"filter_w", [](RunConfig& c, std::string_view v) { c.filter.w = to_double(v); },
                 [](const RunConfig& c) { return format_double(c.filter.w); }});
    k.push_back({"quadrature_order", [](RunConfig& c, std::string_view v) { c.filter.quadrature_order = to_int(v); },
                 [](const RunConfig& c) { return std::to_string(c.filter.quadrature_order); }});
    k.push_back({"grid_re_min", [](RunConfig& c, std::string_view v) { c.grid.re_min = to_double(v); },
                 [](const RunConfig& c) { return format_double(c.grid.re_min); }});
    k.push_back({"grid_re_max", [](RunConfig& c, std::string_view v) { c.grid.re_max = to_double(v); },
                 [](const RunConfig& c) { return format_double(c.grid.re_max); }});
    k.push_back({"grid_n_re", [](RunConfig& c, std::string_view v) { c.grid.n_re = to_int(v); },
                 [](const RunConfig& c) { return std::to_string(c.grid.n_re); }});
    k.push_back({"grid_im_min", [](RunConfig& c, std::string_view v) { c.grid.im_min = to_double(v); },
                 [](const RunConfig& c) { return format_double(c.grid.im_min); }});
    k.push_back({"grid_im_max", [](RunConfig& c, std::string_view v) { c.grid.im_max = to_double(v); },
                 [](const RunConfig& c) { return format_double(c.grid.im_max); }});
    k.push_back({"grid_n_im", [](RunConfig& c, std::string_view v) { c.grid.n_im = to_int(v); },
                 [](const RunConfig& c) { return std::to_string(c.grid.n_im); }});
    k.push_back(real_key("tail_epsilon", &RunConfig::tail_epsilon));
    k.push_back(int_key("n_max_motion", &RunConfig::n_max_motion));
    k.push_back(int_key("m_max_pump", &RunConfig::m_max_pump));
    k.push_back(real_key("ode_tol", &RunConfig::ode_tol));
    k.push_back(real_key("threshold", &RunConfig::threshold));
    k.push_back(text_key("output", &RunConfig::output));
    k.push_back(text_key("cache_dir", &RunConfig::cache_dir));
    return k;
  }();
  return table;
}

bool is_time_series(Mode m) { return m != Mode::PFunction; }

bool is_classical(Mode m) {
  return m == Mode::Sigma22ClassicalOrdered || m == Mode::Sigma22ClassicalNoOrdering ||
         m == Mode::CompareOrdering || m == Mode::ComparePump;
}

void require(bool ok, const char* field, const std::string& message) {
  if (!ok) throw ValidationError(field, message);
}

}  // namespace

std::string_view to_string(Mode mode) {
  for (const auto& m : kModes) {
    if (m.mode == mode) return m.name;
  }
  return "unknown";
}

Mode parse_mode(std::string_view text) {
  for (const auto& m : kModes) {
    if (m.name == text) return m.mode;
  }
  throw ValidationError("mode", "unknown mode '" + std::string(text) + "'");
}

std::vector<double> RunConfig::time_grid() const {
  std::vector<double> t(static_cast<std::size_t>(n_points));
  for (int i = 0; i < n_points; ++i) t[i] = t_start + (t_end - t_start) * i / (n_points - 1);
  t.back() = t_end;
  return t;
}

void RunConfig::validate() const {
  params.validate();
  require(!name.empty(), "name", "must not be empty");
  require(std::isfinite(r) && r >= 0.0, "r", "must be finite and non-negative");
  require(initial_level == 1 || initial_level == 2, "initial_level", "must be 1 or 2");
  if (mode != Mode::PFunction) {
    require(initial_level == 1, "initial_level", "time-series modes start in the ground level");
  }
  require(std::isfinite(alpha0_abs) && alpha0_abs >= 0.0, "alpha0_abs", "must be finite and non-negative");
  require(std::isfinite(alpha0_arg), "alpha0_arg", "must be finite");
  require(std::isfinite(beta0_abs) && beta0_abs >= 0.0, "beta0_abs", "must be finite and non-negative");
  require(std::isfinite(beta0_arg), "beta0_arg", "must be finite");
  if (mode == Mode::Sigma22Quantized || mode == Mode::PFunction) {
    require(beta0_abs > 0.0, "beta0_abs", "the quantized pump needs a non-zero amplitude");
  }

  if (is_time_series(mode)) {
    require(n_points >= 2, "n_points", "the time grid needs at least two points");
    require(std::isfinite(t_start) && t_start >= 0.0, "t_start", "must be finite and non-negative");
    require(std::isfinite(t_end) && t_end > t_start, "t_end", "must exceed t_start");
  } else {
    require(!t_snapshots.empty(), "t_snapshots", "at least one snapshot time is required");
    for (double t : t_snapshots) require(std::isfinite(t) && t >= 0.0, "t_snapshots", "times must be non-negative");
    std::set<double> unique(t_snapshots.begin(), t_snapshots.end());
    require(unique.size() == t_snapshots.size(), "t_snapshots", "times must be distinct");
  }
  if (mode == Mode::ComparePump) {
    require(!beta0_list.empty(), "beta0_list", "at least one pump amplitude is required");
    for (double b : beta0_list) require(std::isfinite(b) && b > 0.0, "beta0_list", "amplitudes must be positive");
    require(t_start == 0.0, "t_start", "compare-pump starts both solutions at tau = 0");
  }

  require(filter_kind == "radial", "filter_kind", "only the radial filter is supported");
  require(std::isfinite(filter.w) && filter.w > 0.0, "filter_w", "must be positive");
  require(filter.quadrature_order >= 64, "quadrature_order", "must be at least 64");
  require(std::isfinite(grid.re_min) && std::isfinite(grid.re_max) && grid.re_max >= grid.re_min, "grid_re_max",
          "must be finite and not below grid_re_min");
  require(std::isfinite(grid.im_min) && std::isfinite(grid.im_max) && grid.im_max >= grid.im_min, "grid_im_max",
          "must be finite and not below grid_im_min");
  require(grid.n_re >= 1, "grid_n_re", "must be positive");
  require(grid.n_im >= 1, "grid_n_im", "must be positive");

  require(tail_epsilon > 0.0 && tail_epsilon <= 1e-3, "tail_epsilon", "must lie in (0, 1e-3]");
  require(n_max_motion >= 0, "n_max_motion", "must be non-negative");
  require(m_max_pump >= 0, "m_max_pump", "must be non-negative");
  if (is_classical(mode)) require(ode_tol > 0.0 && ode_tol < 1e-3, "ode_tol", "must lie in (0, 1e-3)");
  require(std::isfinite(threshold) && threshold > 0.0, "threshold", "must be positive");
  require(output.find('/') == std::string::npos, "output", "is a file stem, not a path");
  const std::pair<const char*, const std::string*> text_fields[] = {
      {"name", &name}, {"output", &output}, {"cache_dir", &cache_dir}};
  for (const auto& [field, value] : text_fields) {
    require(value->find_first_of("#\n") == std::string::npos, field, "must not contain '#' or newlines");
  }
}

RunConfig parse_config(std::string_view text) {
  RunConfig c;
  std::set<std::string, std::less<>> seen;
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
    if (eq == std::string_view::npos) throw ParseError(line_no, "expected key=value");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    const auto& table = keys();
    const auto it = std::find_if(table.begin(), table.end(), [&](const Key& k) { return k.name == key; });
    if (it == table.end()) throw ParseError(line_no, "unknown key '" + std::string(key) + "'");
    if (!seen.insert(std::string(key)).second) throw ParseError(line_no, "duplicate key '" + std::string(key) + "'");
    try {
      it->set(c, value);
    } catch (const std::invalid_argument& e) {
      throw ParseError(line_no, std::string(key) + ": " + e.what());
    }
  }
  c.validate();
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open config file " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return parse_config(os.str());
}

std::string serialize(const RunConfig& config) {
  std::string out;
  for (const auto& k : keys()) {
    out += k.name;
    out += '=';
    out += k.get(config);
    out += '\n';
  }
  return out;
}

RunConfig preset(std::string_view name) {
  RunConfig c;
  c.name = std::string(name);
  c.params.eta = 0.2;
  c.ode_tol = 1e-10;
  if (name == "fig2") {
    c.mode = Mode::CompareOrdering;
    c.params.k = 2;
    c.params.delta_phi = 0.0;
    c.r = 0.005;
    c.alpha0_abs = std::sqrt(12.0);
    c.t_start = 0.0;
    c.t_end = 150.0;
    c.n_points = 1501;
    c.threshold = 0.1;
  } else if (name == "fig3-weak" || name == "fig3-strong") {
    const bool strong = name == "fig3-strong";
    const double beta = strong ? 100.0 : 20.0;
    c.mode = Mode::ComparePump;
    c.params.k = 2;
    c.params.delta_phi = 0.0;
    c.r = 0.2;
    c.params.delta_omega_tilde = beta * c.r;
    c.alpha0_abs = std::sqrt(12.0);
    c.beta0_abs = beta;
    c.beta0_list = {beta};
    // t~ in [0, 1.5] expressed on the classical axis tau = |beta0| t~
    c.t_start = 0.0;
    c.t_end = 1.5 * beta;
    c.n_points = 1501;
  } else if (name == "fig4") {
    c.mode = Mode::PFunction;
    c.params.k = 3;
    c.params.delta_phi = 0.5 * std::numbers::pi;
    c.params.nu_tilde = 5000.0;
    c.params.delta_omega_tilde = 8.0;
    c.alpha0_abs = std::sqrt(5.0);
    c.beta0_abs = 40.0;
    c.initial_level = 2;
    c.t_snapshots = {4.0, 13.0, 50.0};
    c.filter.w = 1.7;
    c.filter.quadrature_order = 200;
    c.grid = quasiprob::GridSpec{};
  } else {
    throw Error(ErrorKind::UnknownPreset, "unknown preset '" + std::string(name) + "'");
  }
  c.validate();
  return c;
}

std::vector<std::string> preset_names() { return {"fig2", "fig3-weak", "fig3-strong", "fig4"}; }

std::string config_hash(const RunConfig& config) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : serialize(config)) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

}  // namespace ionjc
