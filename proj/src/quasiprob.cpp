#include "quasiprob.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>

#include "errors.hpp"
#include "parallel.hpp"
#include "quadrature.hpp"

namespace ionjc::quasiprob {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kConvergenceTol = 1e-10;
constexpr char kMagic[8] = {'I', 'O', 'N', 'J', 'C', 'P', 'T', '\0'};

double prefactor(double w) { return 16.0 / (kPi * kPi) * w * w; }

// Nodes in theta = acos(z) on [0, pi/2]; the filter's (1-z)^{3/2} edge
// becomes analytic in theta. kernel = weight * dz/dtheta * z * filter shape.
struct ThetaRule {
  std::vector<double> z;
  std::vector<double> kernel;
};

ThetaRule theta_rule(int order) {
  const auto gl = gauss_legendre(order, 0.0, 0.5 * kPi);
  ThetaRule rule;
  rule.z.resize(order);
  rule.kernel.resize(order);
  for (int q = 0; q < order; ++q) {
    const double theta = gl.nodes[q];
    const double z = std::cos(theta);
    const double s = std::sin(theta);
    rule.z[q] = z;
    rule.kernel[q] = gl.weights[q] * s * z * (theta - z * s);
  }
  return rule;
}

double signed_bessel(int order, double x, std::vector<double>& scratch) {
  const int p = std::abs(order);
  scratch.resize(static_cast<std::size_t>(p) + 1);
  bessel_j_sequence(x, scratch);
  return (order < 0 && (p % 2 == 1)) ? -scratch[p] : scratch[p];
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

template <typename T>
void put(std::string& buf, const T& v) {
  buf.append(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw Error(ErrorKind::Io, "element table file is truncated");
  return v;
}

std::string header_bytes(int n_max, const GridSpec& g, const FilterSpec& f) {
  std::string buf(kMagic, sizeof(kMagic));
  put(buf, PElementTable::kFormatVersion);
  put(buf, static_cast<std::int32_t>(n_max));
  put(buf, f.w);
  put(buf, static_cast<std::int32_t>(f.quadrature_order));
  put(buf, g.re_min);
  put(buf, g.re_max);
  put(buf, static_cast<std::int32_t>(g.n_re));
  put(buf, g.im_min);
  put(buf, g.im_max);
  put(buf, static_cast<std::int32_t>(g.n_im));
  return buf;
}

}  // namespace

void FilterSpec::validate() const {
  if (!(w > 0.0) || !std::isfinite(w)) throw ValidationError("filter_w", "filter width must be positive");
  if (quadrature_order < 64) throw ValidationError("quadrature_order", "must be at least 64");
}

void GridSpec::validate() const {
  if (n_re < 1 || n_im < 1) throw ValidationError("grid", "point counts must be positive");
  if (!std::isfinite(re_min) || !std::isfinite(re_max) || !std::isfinite(im_min) || !std::isfinite(im_max)) {
    throw ValidationError("grid", "bounds must be finite");
  }
  if (re_max < re_min || im_max < im_min) throw ValidationError("grid", "max must not be below min");
}

double GridSpec::re(int i) const {
  return n_re == 1 ? re_min : re_min + (re_max - re_min) * i / (n_re - 1);
}

double GridSpec::im(int j) const {
  return n_im == 1 ? im_min : im_min + (im_max - im_min) * j / (n_im - 1);
}

cd GridSpec::point(std::size_t flat) const {
  const int i = static_cast<int>(flat % static_cast<std::size_t>(n_re));
  const int j = static_cast<int>(flat / static_cast<std::size_t>(n_re));
  return {re(i), im(j)};
}

double PhaseSpaceGrid::min() const { return *std::min_element(values.begin(), values.end()); }
double PhaseSpaceGrid::max() const { return *std::max_element(values.begin(), values.end()); }

double filter_omega(double beta_abs, double w) {
  if (beta_abs < 0.0 || !(w > 0.0)) throw Error(ErrorKind::InvalidArgument, "filter_omega: invalid arguments");
  const double z = beta_abs / (2.0 * w);
  if (z > 1.0) return 0.0;
  return 2.0 / kPi * (std::acos(z) - z * std::sqrt(1.0 - z * z));
}

double lambda_nm(int n, int m, double beta_abs) {
  if (n < 0 || m < 0 || beta_abs < 0.0) throw Error(ErrorKind::InvalidArgument, "lambda_nm: invalid arguments");
  const int lo = std::min(n, m);
  const int p = std::abs(m - n);
  const double lag = laguerre(lo, p, beta_abs * beta_abs);
  if (p == 0) return lag;
  if (beta_abs == 0.0) return 0.0;
  // |beta|^p sqrt(lo!/(lo+p)!)
  const double mag = std::exp(p * std::log(beta_abs) + 0.5 * (log_factorial(lo) - log_factorial(lo + p)));
  const double sign = (m > n && (p % 2 == 1)) ? -1.0 : 1.0;
  return sign * mag * lag;
}

Eigen::MatrixXd lambda_table(int n_max, double beta_abs) {
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(n_max + 1, n_max + 1);
  const double x = beta_abs * beta_abs;
  const double log_b = beta_abs > 0.0 ? std::log(beta_abs) : 0.0;
  for (int p = 0; p <= n_max; ++p) {
    const auto lag = laguerre_sequence(n_max - p, p, x);
    for (int n = 0; n + p <= n_max; ++n) {
      double mag = 1.0;
      if (p > 0) {
        mag = beta_abs == 0.0 ? 0.0
                              : std::exp(p * log_b + 0.5 * (log_factorial(n) - log_factorial(n + p)));
      }
      const double v = mag * lag[n];
      t(n, n + p) = (p % 2 == 1) ? -v : v;  // m >= n branch carries (-|beta|)^p
      t(n + p, n) = v;
    }
  }
  return t;
}

double radial_integral(int n, int m, double alpha_abs, double w, int order, const LambdaFn& lambda) {
  const auto rule = theta_rule(order);
  std::vector<double> scratch;
  CompensatedSum acc;
  for (int q = 0; q < order; ++q) {
    const double z = rule.z[q];
    const double j = signed_bessel(n - m, 4.0 * w * alpha_abs * z, scratch);
    acc.add(rule.kernel[q] * lambda(n, m, 2.0 * w * z) * j);
  }
  return prefactor(w) * acc.value();
}

cd p_element_with(int n, int m, cd alpha, const FilterSpec& spec, const LambdaFn& lambda) {
  spec.validate();
  const double a = std::abs(alpha);
  const double phi = a > 0.0 ? std::arg(alpha) : 0.0;
  const double coarse = radial_integral(n, m, a, spec.w, spec.quadrature_order, lambda);
  const double fine = radial_integral(n, m, a, spec.w, 2 * spec.quadrature_order, lambda);
  if (std::abs(coarse - fine) > kConvergenceTol) {
    throw Error(ErrorKind::QuadratureNotConverged,
                "p_element(" + std::to_string(n) + "," + std::to_string(m) + "): order doubling changed the value by " +
                    std::to_string(std::abs(coarse - fine)));
  }
  return std::polar(1.0, (n - m) * phi) * coarse;
}

cd p_element(int n, int m, cd alpha, const FilterSpec& spec) {
  return p_element_with(n, m, alpha, spec, [](int a, int b, double x) { return lambda_nm(a, b, x); });
}

cd characteristic_function(const Eigen::MatrixXcd& rho, cd beta) {
  if (rho.rows() != rho.cols()) throw Error(ErrorKind::InvalidArgument, "density matrix must be square");
  const int dim = static_cast<int>(rho.rows());
  if (dim == 0) return {};
  const double b = std::abs(beta);
  const double phi = b > 0.0 ? std::arg(beta) : 0.0;
  const auto lam = lambda_table(dim - 1, b);
  cd acc{};
  for (int m = 0; m < dim; ++m) {
    for (int n = 0; n < dim; ++n) {
      acc += rho(m, n) * std::polar(lam(n, m), phi * (n - m));
    }
  }
  return acc;
}

std::size_t PElementTable::pair_index(int n, int m) const {
  if (n > m) std::swap(n, m);
  // rows n' < n hold n_max + 1 - n' pairs each
  const std::size_t sn = static_cast<std::size_t>(n);
  return sn * (static_cast<std::size_t>(n_max_) + 1) - sn * (sn - 1 + (sn == 0)) / 2 +
         static_cast<std::size_t>(m - n);
}

void PElementTable::index_grid() {
  const std::size_t count = grid_.size();
  std::vector<std::pair<double, std::size_t>> by_radius(count);
  point_phase_.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    const cd a = grid_.point(i);
    by_radius[i] = {std::abs(a), i};
    point_phase_[i] = std::abs(a) > 0.0 ? std::arg(a) : 0.0;
  }
  std::sort(by_radius.begin(), by_radius.end());
  radii_.clear();
  point_radius_.assign(count, 0);
  for (const auto& [r, idx] : by_radius) {
    // Mirror-image grid points differ only by rounding in their coordinates.
    if (radii_.empty() || r - radii_.back() > 1e-12 * std::max(1.0, r)) radii_.push_back(r);
    point_radius_[idx] = static_cast<std::uint32_t>(radii_.size() - 1);
  }
}

PElementTable PElementTable::build(int n_max, const GridSpec& grid, const FilterSpec& filter) {
  if (n_max < 0) throw Error(ErrorKind::InvalidArgument, "element table: n_max must be non-negative");
  grid.validate();
  filter.validate();
  PElementTable t;
  t.n_max_ = n_max;
  t.grid_ = grid;
  t.filter_ = filter;
  t.index_grid();

  const std::size_t n_pairs = static_cast<std::size_t>(n_max + 1) * static_cast<std::size_t>(n_max + 2) / 2;
  const double w = filter.w;

  // Lambda at the quadrature nodes, packed in pair order and pre-multiplied by
  // the kernel and by the sign relating J_{n-m} to J_{m-n}.
  struct PackedRule {
    ThetaRule rule;
    std::vector<std::vector<double>> weighted_lambda;
  };
  auto pack = [&](int order) {
    PackedRule pr{theta_rule(order), {}};
    pr.weighted_lambda.resize(static_cast<std::size_t>(order));
    for (int q = 0; q < order; ++q) {
      const auto lam = lambda_table(n_max, 2.0 * w * pr.rule.z[q]);
      auto& row = pr.weighted_lambda[q];
      row.resize(n_pairs);
      std::size_t idx = 0;
      for (int n = 0; n <= n_max; ++n) {
        for (int m = n; m <= n_max; ++m) {
          const double sign = ((m - n) % 2 == 1) ? -1.0 : 1.0;
          row[idx++] = pr.rule.kernel[q] * lam(n, m) * sign;
        }
      }
    }
    return pr;
  };
  const PackedRule coarse = pack(filter.quadrature_order);
  const PackedRule fine = pack(2 * filter.quadrature_order);

  t.radial_.assign(t.radii_.size() * n_pairs, 0.0);
  std::vector<double> fine_values(t.radii_.size() * n_pairs, 0.0);
  const double pref = prefactor(w);

  auto integrate = [&](const PackedRule& pr, double radius, double* out) {
    std::vector<double> bessel(static_cast<std::size_t>(n_max) + 1);
    std::vector<double> acc(n_pairs, 0.0);
    for (std::size_t q = 0; q < pr.rule.z.size(); ++q) {
      bessel_j_sequence(4.0 * w * radius * pr.rule.z[q], bessel);
      const auto& row = pr.weighted_lambda[q];
      std::size_t idx = 0;
      for (int n = 0; n <= n_max; ++n) {
        for (int m = n; m <= n_max; ++m, ++idx) acc[idx] += row[idx] * bessel[m - n];
      }
    }
    for (std::size_t i = 0; i < n_pairs; ++i) out[i] = pref * acc[i];
  };

  parallel_for(t.radii_.size(), [&](std::size_t r) {
    integrate(coarse, t.radii_[r], &t.radial_[r * n_pairs]);
    integrate(fine, t.radii_[r], &fine_values[r * n_pairs]);
  });

  t.pair_error_.assign(n_pairs, 0.0);
  for (std::size_t r = 0; r < t.radii_.size(); ++r) {
    for (std::size_t i = 0; i < n_pairs; ++i) {
      const double d = std::abs(t.radial_[r * n_pairs + i] - fine_values[r * n_pairs + i]);
      t.pair_error_[i] = std::max(t.pair_error_[i], d);
    }
  }
  const double worst = *std::max_element(t.pair_error_.begin(), t.pair_error_.end());
  if (worst > kConvergenceTol) {
    throw Error(ErrorKind::QuadratureNotConverged,
                "element table: order doubling changed an element by " + std::to_string(worst) +
                    "; raise quadrature_order");
  }
  return t;
}

cd PElementTable::element(int n, int m, std::size_t grid_index) const {
  if (n < 0 || m < 0 || n > n_max_ || m > n_max_ || grid_index >= grid_.size()) {
    throw Error(ErrorKind::InvalidArgument, "element table: index out of range");
  }
  const std::size_t n_pairs = pair_error_.size();
  const double radial = radial_[point_radius_[grid_index] * n_pairs + pair_index(n, m)];
  return std::polar(1.0, (n - m) * point_phase_[grid_index]) * radial;
}

double PElementTable::certified_error(int n, int m) const { return pair_error_[pair_index(n, m)]; }

PhaseSpaceGrid PElementTable::apply(const Eigen::MatrixXcd& rho) const {
  if (rho.rows() != rho.cols()) throw Error(ErrorKind::InvalidArgument, "density matrix must be square");
  const int dim = static_cast<int>(rho.rows());
  if (dim > n_max_ + 1) {
    throw Error(ErrorKind::InvalidArgument, "density matrix dimension " + std::to_string(dim) +
                                                " exceeds element table n_max + 1 = " + std::to_string(n_max_ + 1));
  }
  PhaseSpaceGrid out;
  out.spec = grid_;
  out.values.assign(grid_.size(), 0.0);
  const std::size_t n_pairs = pair_error_.size();

  for (int m = 0; m < dim; ++m) {
    for (int n = 0; n < dim; ++n) out.quadrature_error += std::abs(rho(m, n)) * certified_error(n, m);
  }

  std::vector<double> imag(grid_.size(), 0.0);
  parallel_for(grid_.size(), [&](std::size_t idx) {
    const double* radial = &radial_[point_radius_[idx] * n_pairs];
    const cd step = std::polar(1.0, point_phase_[idx]);
    // powers[d + dim - 1] = e^{i d phi}, d = n - m
    std::vector<cd> powers(2 * static_cast<std::size_t>(dim) - 1);
    powers[dim - 1] = 1.0;
    for (int d = 1; d < dim; ++d) {
      powers[dim - 1 + d] = powers[dim - 2 + d] * step;
      powers[dim - 1 - d] = std::conj(powers[dim - 1 + d]);
    }
    cd acc{};
    for (int m = 0; m < dim; ++m) {
      for (int n = 0; n < dim; ++n) {
        acc += rho(m, n) * powers[dim - 1 + n - m] * radial[pair_index(n, m)];
      }
    }
    out.values[idx] = acc.real();
    imag[idx] = std::abs(acc.imag());
  });
  out.max_imag_residue = *std::max_element(imag.begin(), imag.end());
  return out;
}

std::string PElementTable::content_key(int n_max, const GridSpec& grid, const FilterSpec& filter) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << fnv1a(header_bytes(n_max, grid, filter));
  return os.str();
}

void PElementTable::save(const std::filesystem::path& file) const {
  std::string buf = header_bytes(n_max_, grid_, filter_);
  put(buf, static_cast<std::uint64_t>(radii_.size()));
  put(buf, static_cast<std::uint64_t>(pair_error_.size()));
  const auto append = [&buf](const std::vector<double>& v) {
    buf.append(reinterpret_cast<const char*>(v.data()), v.size() * sizeof(double));
  };
  append(radii_);
  append(radial_);
  append(pair_error_);
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
  const auto tmp = file.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot write element table " + tmp);
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw Error(ErrorKind::Io, "failed writing element table " + tmp);
  }
  std::filesystem::rename(tmp, file);
}

PElementTable PElementTable::load(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open element table " + file.string());
  char magic[sizeof(kMagic)];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw Error(ErrorKind::Io, file.string() + " is not an element table");
  }
  const auto version = get<std::uint32_t>(in);
  if (version != kFormatVersion) {
    throw Error(ErrorKind::Io, "element table format version " + std::to_string(version) + " is not supported");
  }
  PElementTable t;
  t.n_max_ = get<std::int32_t>(in);
  t.filter_.w = get<double>(in);
  t.filter_.quadrature_order = get<std::int32_t>(in);
  t.grid_.re_min = get<double>(in);
  t.grid_.re_max = get<double>(in);
  t.grid_.n_re = get<std::int32_t>(in);
  t.grid_.im_min = get<double>(in);
  t.grid_.im_max = get<double>(in);
  t.grid_.n_im = get<std::int32_t>(in);
  t.grid_.validate();
  t.filter_.validate();
  const auto n_radii = get<std::uint64_t>(in);
  const auto n_pairs = get<std::uint64_t>(in);
  if (n_pairs != static_cast<std::uint64_t>(t.n_max_ + 1) * static_cast<std::uint64_t>(t.n_max_ + 2) / 2) {
    throw Error(ErrorKind::Io, "element table pair count does not match n_max");
  }
  t.index_grid();
  if (n_radii != t.radii_.size()) throw Error(ErrorKind::Io, "element table radius count does not match grid");
  std::vector<double> radii(n_radii);
  const auto read = [&in](std::vector<double>& v) {
    in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
    if (!in) throw Error(ErrorKind::Io, "element table file is truncated");
  };
  read(radii);
  if (radii != t.radii_) throw Error(ErrorKind::Io, "element table radii do not match grid");
  t.radial_.resize(n_radii * n_pairs);
  t.pair_error_.resize(n_pairs);
  read(t.radial_);
  read(t.pair_error_);
  return t;
}

PElementTable PElementTable::load_or_build(int n_max, const GridSpec& grid, const FilterSpec& filter,
                                           const std::filesystem::path& cache_dir, bool* loaded) {
  const auto file = cache_dir / ("ptable-" + content_key(n_max, grid, filter) + ".bin");
  if (std::filesystem::exists(file)) {
    try {
      auto t = load(file);
      if (t.n_max_ == n_max && t.grid_ == grid && t.filter_ == filter) {
        if (loaded) *loaded = true;
        return t;
      }
    } catch (const Error&) {
      // stale or corrupt cache entry; rebuild below
    }
  }
  auto t = build(n_max, grid, filter);
  t.save(file);
  if (loaded) *loaded = false;
  return t;
}

PhaseSpaceGrid p_function(const Eigen::MatrixXcd& rho, const GridSpec& grid, const FilterSpec& filter) {
  const int n_max = std::max(0, static_cast<int>(rho.rows()) - 1);
  return PElementTable::build(n_max, grid, filter).apply(rho);
}

}  // namespace ionjc::quasiprob
