#pragma once

// Regularized Glauber-Sudarshan P function of a truncated density matrix,
// assembled from Fock-basis elements P_{Omega,nm}(alpha). For a radial filter
// each element is e^{i(n-m) phi_alpha} times a real radial integral, so the
// table only stores one value per (distinct |alpha|, n <= m).

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "fock_core.hpp"

namespace ionjc::quasiprob {

struct FilterSpec {
  double w = 1.7;
  int quadrature_order = 200;

  void validate() const;
  friend bool operator==(const FilterSpec&, const FilterSpec&) = default;
};

/// Rectangular alpha-grid; points are re_min + i (re_max - re_min)/(n_re - 1).
struct GridSpec {
  double re_min = -4.0;
  double re_max = 4.0;
  int n_re = 161;
  double im_min = -4.0;
  double im_max = 4.0;
  int n_im = 161;

  void validate() const;
  std::size_t size() const { return static_cast<std::size_t>(n_re) * static_cast<std::size_t>(n_im); }
  double re(int i) const;
  double im(int j) const;
  /// Point with flat index j * n_re + i.
  cd point(std::size_t flat) const;
  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

struct PhaseSpaceGrid {
  GridSpec spec;
  std::vector<double> values;      // flat index j * n_re + i
  double max_imag_residue = 0.0;   // largest |Im| discarded during assembly
  double quadrature_error = 0.0;   // certified bound from order doubling

  double at(int i_re, int j_im) const { return values[static_cast<std::size_t>(j_im) * spec.n_re + i_re]; }
  double min() const;
  double max() const;
};

/// Compact radial filter (2/pi)[acos(z) - z sqrt(1-z^2)], z = |beta|/(2w), zero for z > 1.
double filter_omega(double beta_abs, double w);

/// Lambda_nm(|beta|) such that <n|D(beta)|m> = e^{-|beta|^2/2} e^{i(n-m)phi} Lambda_nm.
double lambda_nm(int n, int m, double beta_abs);

/// All Lambda_nm for n, m <= n_max at one |beta|.
Eigen::MatrixXd lambda_table(int n_max, double beta_abs);

using LambdaFn = std::function<double(int, int, double)>;

/// (16/pi^2) w^2 int_0^1 dz Lambda(2wz) z J_{n-m}(4w|alpha|z)[acos z - z sqrt(1-z^2)]
/// with Gauss-Legendre nodes in theta = acos z.
double radial_integral(int n, int m, double alpha_abs, double w, int order, const LambdaFn& lambda);

/// P_{Omega,nm}(alpha), certified by comparing against twice the order.
/// Throws QuadratureNotConverged when the two disagree beyond 1e-10.
cd p_element(int n, int m, cd alpha, const FilterSpec& spec);

/// p_element with a caller-supplied Lambda.
cd p_element_with(int n, int m, cd alpha, const FilterSpec& spec, const LambdaFn& lambda);

/// Phi(beta) = Tr{rho D(beta)} e^{|beta|^2/2}.
cd characteristic_function(const Eigen::MatrixXcd& rho, cd beta);

class PElementTable {
 public:
  static constexpr std::uint32_t kFormatVersion = 1;

  /// Radial elements for n, m <= n_max on every distinct |alpha| of the grid.
  static PElementTable build(int n_max, const GridSpec& grid, const FilterSpec& filter);
  static PElementTable load(const std::filesystem::path& file);
  /// Reuses cache_dir/ptable-<content_key>.bin when present, otherwise builds
  /// and writes it.
  static PElementTable load_or_build(int n_max, const GridSpec& grid, const FilterSpec& filter,
                                     const std::filesystem::path& cache_dir, bool* loaded = nullptr);

  void save(const std::filesystem::path& file) const;

  /// Hex digest of the header fields {format, N, w, grid, quadrature order}.
  static std::string content_key(int n_max, const GridSpec& grid, const FilterSpec& filter);
  std::string content_key() const { return content_key(n_max_, grid_, filter_); }

  int n_max() const { return n_max_; }
  const GridSpec& grid() const { return grid_; }
  const FilterSpec& filter() const { return filter_; }
  std::size_t radius_count() const { return radii_.size(); }

  cd element(int n, int m, std::size_t grid_index) const;
  double certified_error(int n, int m) const;

  /// P_Omega on the grid for a density matrix of dimension <= n_max + 1.
  PhaseSpaceGrid apply(const Eigen::MatrixXcd& rho) const;

 private:
  std::size_t pair_index(int n, int m) const;
  void index_grid();

  int n_max_ = 0;
  GridSpec grid_;
  FilterSpec filter_;
  std::vector<double> radii_;
  std::vector<std::uint32_t> point_radius_;
  std::vector<double> point_phase_;
  std::vector<double> radial_;      // [radius][pair], includes the 16 w^2 / pi^2 prefactor
  std::vector<double> pair_error_;  // max over radii of |order - 2*order|
};

/// One-shot P_Omega without caching.
PhaseSpaceGrid p_function(const Eigen::MatrixXcd& rho, const GridSpec& grid, const FilterSpec& filter);

}  // namespace ionjc::quasiprob
