#include "ionjc/ionjc.h"

#include <cstdlib>
#include <cstring>
#include <string>

#include "config.hpp"
#include "errors.hpp"
#include "quantized_pump.hpp"
#include "quasiprob.hpp"
#include "runner.hpp"
#include "semiclassical.hpp"

struct ionjc_config {
  ionjc::RunConfig config;
};

struct ionjc_density {
  ionjc::quantized::DensityMatrixVib rho;
};

struct ionjc_ptable {
  ionjc::quasiprob::PElementTable table;
};

namespace {

thread_local std::string last_error;
thread_local std::string last_error_json;

ionjc_status status_of(ionjc::ErrorKind kind) {
  using ionjc::ErrorKind;
  switch (kind) {
    case ErrorKind::InvalidArgument: return IONJC_ERR_INVALID_ARGUMENT;
    case ErrorKind::TruncationTooSmall: return IONJC_ERR_TRUNCATION;
    case ErrorKind::DegenerateBlock: return IONJC_ERR_DEGENERATE_BLOCK;
    case ErrorKind::StepFailure: return IONJC_ERR_STEP_FAILURE;
    case ErrorKind::QuadratureNotConverged: return IONJC_ERR_QUADRATURE;
    case ErrorKind::ParseError: return IONJC_ERR_PARSE;
    case ErrorKind::ValidationError: return IONJC_ERR_VALIDATION;
    case ErrorKind::UnknownPreset: return IONJC_ERR_UNKNOWN_PRESET;
    case ErrorKind::Io: return IONJC_ERR_IO;
  }
  return IONJC_ERR_INTERNAL;
}

ionjc_status fail(ionjc_status status, const std::string& message) {
  last_error = message;
  last_error_json = nlohmann::json{{"status", "error"}, {"kind", ionjc_status_name(status)}, {"message", message}}
                        .dump();
  return status;
}

// Runs body and converts any exception into a status code.
template <typename F>
ionjc_status guarded(F&& body) {
  try {
    body();
    last_error.clear();
    last_error_json.clear();
    return IONJC_OK;
  } catch (const ionjc::Error& e) {
    last_error = e.what();
    last_error_json = ionjc::error_json(e).dump();
    return status_of(e.kind());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(IONJC_ERR_IO, e.what());
  } catch (const std::bad_alloc&) {
    return fail(IONJC_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(IONJC_ERR_INTERNAL, e.what());
  }
}

char* duplicate(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

ionjc::ModelParams to_params(const ionjc_params* p) {
  if (!p) throw ionjc::Error(ionjc::ErrorKind::InvalidArgument, "params is NULL");
  ionjc::ModelParams m;
  m.k = p->k;
  m.eta = p->eta;
  m.delta_phi = p->delta_phi;
  m.delta_omega_tilde = p->delta_omega_tilde;
  m.nu_tilde = p->nu_tilde;
  m.omega21_tilde = p->omega21_tilde;
  m.validate();
  return m;
}

void require_ptr(const void* p, const char* what) {
  if (!p) throw ionjc::Error(ionjc::ErrorKind::InvalidArgument, std::string(what) + " is NULL");
}

}  // namespace

extern "C" {

const char* ionjc_version(void) { return ionjc::kVersion; }

const char* ionjc_status_name(ionjc_status status) {
  switch (status) {
    case IONJC_OK: return "Ok";
    case IONJC_ERR_INVALID_ARGUMENT: return "InvalidArgument";
    case IONJC_ERR_PARSE: return "ParseError";
    case IONJC_ERR_VALIDATION: return "ValidationError";
    case IONJC_ERR_UNKNOWN_PRESET: return "UnknownPreset";
    case IONJC_ERR_IO: return "Io";
    case IONJC_ERR_TRUNCATION: return "TruncationTooSmall";
    case IONJC_ERR_DEGENERATE_BLOCK: return "DegenerateBlock";
    case IONJC_ERR_STEP_FAILURE: return "StepFailure";
    case IONJC_ERR_QUADRATURE: return "QuadratureNotConverged";
    case IONJC_ERR_INTERNAL: return "Internal";
  }
  return "Unknown";
}

int ionjc_exit_code(ionjc_status status) {
  switch (status) {
    case IONJC_OK: return 0;
    case IONJC_ERR_INVALID_ARGUMENT:
    case IONJC_ERR_PARSE:
    case IONJC_ERR_VALIDATION:
    case IONJC_ERR_UNKNOWN_PRESET:
    case IONJC_ERR_IO: return 2;
    default: return 3;
  }
}

const char* ionjc_last_error(void) { return last_error.c_str(); }
const char* ionjc_last_error_json(void) { return last_error_json.c_str(); }
void ionjc_string_free(char* s) { std::free(s); }

ionjc_status ionjc_config_parse(const char* text, ionjc_config** out) {
  return guarded([&] {
    require_ptr(text, "text");
    require_ptr(out, "out");
    *out = new ionjc_config{ionjc::parse_config(text)};
  });
}

ionjc_status ionjc_config_load(const char* path, ionjc_config** out) {
  return guarded([&] {
    require_ptr(path, "path");
    require_ptr(out, "out");
    *out = new ionjc_config{ionjc::load_config(path)};
  });
}

ionjc_status ionjc_config_preset(const char* name, ionjc_config** out) {
  return guarded([&] {
    require_ptr(name, "name");
    require_ptr(out, "out");
    *out = new ionjc_config{ionjc::preset(name)};
  });
}

ionjc_status ionjc_config_serialize(const ionjc_config* config, char** out) {
  return guarded([&] {
    require_ptr(config, "config");
    require_ptr(out, "out");
    *out = duplicate(ionjc::serialize(config->config));
  });
}

void ionjc_config_destroy(ionjc_config* config) { delete config; }

ionjc_status ionjc_preset_names(char** out) {
  return guarded([&] {
    require_ptr(out, "out");
    std::string joined;
    for (const auto& n : ionjc::preset_names()) joined += (joined.empty() ? "" : ",") + n;
    *out = duplicate(joined);
  });
}

ionjc_status ionjc_run(const ionjc_config* config, const char* out_dir, char** summary_json) {
  return guarded([&] {
    require_ptr(config, "config");
    require_ptr(out_dir, "out_dir");
    const auto res = ionjc::run(config->config, out_dir);
    if (summary_json) *summary_json = duplicate(res.summary.dump());
  });
}

ionjc_status ionjc_sigma22_quantized(const ionjc_params* params, double alpha_re, double alpha_im, double beta_re,
                                     double beta_im, const double* t_tilde, size_t n, double tail_epsilon,
                                     double* out) {
  return guarded([&] {
    require_ptr(t_tilde, "t_tilde");
    require_ptr(out, "out");
    const auto v = ionjc::quantized::sigma22_quantized_series({t_tilde, n}, {alpha_re, alpha_im},
                                                              {beta_re, beta_im}, to_params(params), tail_epsilon);
    std::copy(v.begin(), v.end(), out);
  });
}

ionjc_status ionjc_sigma22_time_ordered(const ionjc_params* params, double alpha_re, double alpha_im, double r,
                                        const double* taus, size_t n, double tol, double tail_epsilon,
                                        double* out) {
  return guarded([&] {
    require_ptr(taus, "taus");
    require_ptr(out, "out");
    const auto v = ionjc::semiclassical::sigma22_time_ordered({alpha_re, alpha_im}, {taus, n}, r, to_params(params),
                                                              tol, tail_epsilon);
    std::copy(v.begin(), v.end(), out);
  });
}

ionjc_status ionjc_sigma22_no_ordering(const ionjc_params* params, double alpha_re, double alpha_im, double r,
                                       const double* taus, size_t n, double tail_epsilon, double* out) {
  return guarded([&] {
    require_ptr(taus, "taus");
    require_ptr(out, "out");
    if (n == 0) throw ionjc::Error(ionjc::ErrorKind::InvalidArgument, "time grid is empty");
    const auto p = to_params(params);
    for (size_t i = 0; i < n; ++i) {
      out[i] = ionjc::semiclassical::sigma22_no_ordering({taus[i], taus[0], r}, {alpha_re, alpha_im}, p,
                                                         tail_epsilon);
    }
  });
}

ionjc_status ionjc_rho_vib(const ionjc_params* params, double t_tilde, double alpha_re, double alpha_im,
                           double beta_re, double beta_im, int initial_level, double tail_epsilon,
                           ionjc_density** out) {
  return guarded([&] {
    require_ptr(out, "out");
    *out = new ionjc_density{ionjc::quantized::rho_vib(t_tilde, {alpha_re, alpha_im}, {beta_re, beta_im},
                                                       to_params(params), initial_level, tail_epsilon)};
  });
}

ionjc_status ionjc_density_from_matrix(size_t dim, const double* re, const double* im, ionjc_density** out) {
  return guarded([&] {
    require_ptr(re, "re");
    require_ptr(out, "out");
    if (dim == 0) throw ionjc::Error(ionjc::ErrorKind::InvalidArgument, "dimension must be positive");
    ionjc::quantized::DensityMatrixVib d;
    d.rho.resize(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (size_t i = 0; i < dim; ++i) {
      for (size_t j = 0; j < dim; ++j) {
        d.rho(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = {re[i * dim + j],
                                                                             im ? im[i * dim + j] : 0.0};
      }
    }
    *out = new ionjc_density{std::move(d)};
  });
}

ionjc_status ionjc_density_dim(const ionjc_density* rho, size_t* dim) {
  return guarded([&] {
    require_ptr(rho, "rho");
    require_ptr(dim, "dim");
    *dim = static_cast<size_t>(rho->rho.dim());
  });
}

ionjc_status ionjc_density_copy(const ionjc_density* rho, double* re, double* im) {
  return guarded([&] {
    require_ptr(rho, "rho");
    const auto& m = rho->rho.rho;
    const auto dim = static_cast<size_t>(m.rows());
    for (size_t i = 0; i < dim; ++i) {
      for (size_t j = 0; j < dim; ++j) {
        const auto v = m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        if (re) re[i * dim + j] = v.real();
        if (im) im[i * dim + j] = v.imag();
      }
    }
  });
}

ionjc_status ionjc_density_trace_defect(const ionjc_density* rho, double* out) {
  return guarded([&] {
    require_ptr(rho, "rho");
    require_ptr(out, "out");
    *out = rho->rho.trace_defect;
  });
}

void ionjc_density_destroy(ionjc_density* rho) { delete rho; }

ionjc_status ionjc_ptable_build(int n_max, const ionjc_grid* grid, double w, int quadrature_order,
                                const char* cache_dir, ionjc_ptable** out) {
  return guarded([&] {
    require_ptr(grid, "grid");
    require_ptr(out, "out");
    ionjc::quasiprob::GridSpec g{grid->re_min, grid->re_max, grid->n_re, grid->im_min, grid->im_max, grid->n_im};
    ionjc::quasiprob::FilterSpec f{w, quadrature_order};
    *out = new ionjc_ptable{cache_dir ? ionjc::quasiprob::PElementTable::load_or_build(n_max, g, f, cache_dir)
                                      : ionjc::quasiprob::PElementTable::build(n_max, g, f)};
  });
}

ionjc_status ionjc_ptable_grid_size(const ionjc_ptable* table, size_t* size) {
  return guarded([&] {
    require_ptr(table, "table");
    require_ptr(size, "size");
    *size = table->table.grid().size();
  });
}

ionjc_status ionjc_ptable_apply(const ionjc_ptable* table, const ionjc_density* rho, double* values,
                                double* quadrature_error, double* imag_residue) {
  return guarded([&] {
    require_ptr(table, "table");
    require_ptr(rho, "rho");
    require_ptr(values, "values");
    const auto field = table->table.apply(rho->rho.rho);
    std::copy(field.values.begin(), field.values.end(), values);
    if (quadrature_error) *quadrature_error = field.quadrature_error;
    if (imag_residue) *imag_residue = field.max_imag_residue;
  });
}

void ionjc_ptable_destroy(ionjc_ptable* table) { delete table; }

}  // extern "C"
