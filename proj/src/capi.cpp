#include "otl/otl.h"

#include "otl/error.hpp"
#include "otl/harness.hpp"
#include "otl/io.hpp"
#include "otl/lemmas.hpp"
#include "otl/metrics.hpp"
#include "otl/parallel.hpp"

#include <cstring>
#include <memory>
#include <new>
#include <string>

struct otl_config {
  otl::ExperimentConfig cfg;
};

struct otl_mesh {
  std::shared_ptr<const otl::Mesh> mesh;
};

struct otl_field {
  std::shared_ptr<const otl::Mesh> mesh;
  otl::DiscreteField u;
};

namespace {

thread_local std::string g_error;
thread_local std::string g_error_key;
thread_local std::string g_summary;

otl_status fail(otl_status s, const std::string& msg, const std::string& key = {}) {
  g_error = msg;
  g_error_key = key;
  return s;
}

template <class Fn>
otl_status guarded(Fn&& fn) {
  g_error.clear();
  g_error_key.clear();
  try {
    fn();
    return OTL_OK;
  } catch (const otl::ConfigError& e) {
    return fail(OTL_ERR_CONFIG, e.what(), e.key());
  } catch (const otl::ArtifactError& e) {
    return fail(OTL_ERR_ARTIFACT, e.what());
  } catch (const otl::SolverError& e) {
    return fail(OTL_ERR_SOLVER, e.what());
  } catch (const otl::HypothesisError& e) {
    return fail(OTL_ERR_HYPOTHESIS, e.what());
  } catch (const otl::Error& e) {
    return fail(OTL_ERR_DOMAIN, e.what());
  } catch (const std::bad_alloc&) {
    return fail(OTL_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(OTL_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(OTL_ERR_INTERNAL, "unknown error");
  }
}

otl_status copy_out(const std::string& s, char* buf, size_t cap, size_t* needed) {
  if (needed) *needed = s.size() + 1;
  if (!buf) return OTL_OK;
  if (cap < s.size() + 1) return fail(OTL_ERR_ARGUMENT, "buffer too small");
  std::memcpy(buf, s.c_str(), s.size() + 1);
  return OTL_OK;
}

std::string path_or(const char* p, const std::string& fallback) { return p && *p ? std::string(p) : fallback; }

} // namespace

#define OTL_REQUIRE(cond, what)                                                                    \
  do {                                                                                             \
    if (!(cond)) return fail(OTL_ERR_ARGUMENT, what);                                              \
  } while (0)

extern "C" {

const char* otl_version(void) { return otl::kVersion; }

const char* otl_status_name(otl_status status) {
  switch (status) {
  case OTL_OK: return "ok";
  case OTL_ERR_INTERNAL: return "internal error";
  case OTL_ERR_CONFIG: return "config error";
  case OTL_ERR_ARTIFACT: return "artifact error";
  case OTL_ERR_SOLVER: return "solver error";
  case OTL_ERR_DOMAIN: return "domain error";
  case OTL_ERR_HYPOTHESIS: return "hypothesis error";
  case OTL_ERR_ARGUMENT: return "invalid argument";
  }
  return "unknown status";
}

const char* otl_last_error(void) { return g_error.c_str(); }
const char* otl_last_error_key(void) { return g_error_key.c_str(); }
const char* otl_last_summary(void) { return g_summary.c_str(); }

otl_status otl_set_threads(int n) {
  OTL_REQUIRE(n >= 0, "thread count must be nonnegative");
  return guarded([&] { otl::set_num_threads(n); });
}

int otl_get_threads(void) { return otl::num_threads(); }

otl_status otl_config_new(otl_config** out) {
  OTL_REQUIRE(out, "out is null");
  return guarded([&] { *out = new otl_config{}; });
}

otl_status otl_config_load(const char* path, otl_config** out) {
  OTL_REQUIRE(path && out, "null argument");
  return guarded([&] { *out = new otl_config{otl::load_config(path)}; });
}

otl_status otl_config_parse(const char* text, otl_config** out) {
  OTL_REQUIRE(text && out, "null argument");
  return guarded([&] { *out = new otl_config{otl::parse_config(text)}; });
}

void otl_config_free(otl_config* cfg) { delete cfg; }

otl_status otl_config_set(otl_config* cfg, const char* key, const char* value) {
  OTL_REQUIRE(cfg && key && value, "null argument");
  return guarded([&] { otl::set_config_value(cfg->cfg, key, value); });
}

otl_status otl_config_get(const otl_config* cfg, const char* key, char* buf, size_t cap, size_t* needed) {
  OTL_REQUIRE(cfg && key, "null argument");
  std::string value;
  bool found = false;
  const otl_status s = guarded([&] {
    const std::string text = otl::serialize_config(cfg->cfg);
    const std::string prefix = std::string(key) + " = ";
    std::size_t pos = 0;
    while (pos < text.size()) {
      const auto end = text.find('\n', pos);
      const std::string line = text.substr(pos, end - pos);
      if (line.compare(0, prefix.size(), prefix) == 0) {
        value = line.substr(prefix.size());
        found = true;
        break;
      }
      pos = end + 1;
    }
  });
  if (s != OTL_OK) return s;
  if (!found) return fail(OTL_ERR_CONFIG, std::string(key) + ": unknown key", key);
  return copy_out(value, buf, cap, needed);
}

otl_status otl_config_serialize(const otl_config* cfg, char* buf, size_t cap, size_t* needed) {
  OTL_REQUIRE(cfg, "null argument");
  std::string text;
  const otl_status s = guarded([&] { text = otl::serialize_config(cfg->cfg); });
  if (s != OTL_OK) return s;
  return copy_out(text, buf, cap, needed);
}

otl_status otl_config_hash(const otl_config* cfg, char* buf) {
  OTL_REQUIRE(cfg && buf, "null argument");
  return guarded([&] {
    const std::string h = otl::config_hash(cfg->cfg);
    std::memcpy(buf, h.c_str(), h.size() + 1);
  });
}

otl_status otl_config_validate(const otl_config* cfg) {
  OTL_REQUIRE(cfg, "null argument");
  return guarded([&] { otl::validate_config(cfg->cfg); });
}

otl_status otl_run_solve(const otl_config* cfg, const char* out_dir, otl_solve_summary* summary) {
  OTL_REQUIRE(cfg, "null argument");
  return guarded([&] {
    const auto s = otl::run_solve(cfg->cfg, path_or(out_dir, cfg->cfg.output_dir));
    g_summary = "residual=" + otl::format_double(s.residual) + " tolerance=" + otl::format_double(s.tolerance) +
                " energy=" + otl::format_double(s.energy) + " newton_steps=" + std::to_string(s.newton_steps) +
                " vertices=" + std::to_string(s.num_vertices);
    if (summary) {
      *summary = {s.residual,      s.tolerance,     s.energy, s.newton_steps, s.num_vertices,
                  s.num_triangles, s.mesh_h,        s.cg_fallbacks};
    }
  });
}

otl_status otl_run_metrics(const otl_config* cfg, const char* artifact_dir, const char* out_dir,
                           otl_metrics_summary* summary) {
  OTL_REQUIRE(cfg, "null argument");
  return guarded([&] {
    const std::string dir = path_or(artifact_dir, cfg->cfg.output_dir);
    const auto rep = otl::run_metrics(cfg->cfg, dir, path_or(out_dir, dir));
    g_summary = "bmo_sup=" + otl::format_double(rep.bmo_sup) + " loglip_C=" + otl::format_double(rep.loglip_C) +
                " alpha_hat=" + (rep.alpha_hat ? otl::format_double(*rep.alpha_hat) : std::string("none")) +
                " (" + rep.alpha_hat_note + ")";
    if (summary) {
      *summary = {rep.bmo_sup,   rep.loglip_C, rep.alpha_hat.value_or(0.0), rep.alpha_hat ? 1 : 0,
                  rep.campanato, rep.morrey,   rep.centers.size(),          rep.radii.size()};
    }
  });
}

otl_status otl_run_convergence(const otl_config* cfg, const double* h, size_t n, const char* out_dir) {
  OTL_REQUIRE(cfg, "null argument");
  OTL_REQUIRE(h || n == 0, "h is null");
  return guarded([&] {
    const std::vector<double> hs = h ? std::vector<double>(h, h + n) : cfg->cfg.convergence_h;
    const auto rows = otl::run_convergence(cfg->cfg, hs, path_or(out_dir, cfg->cfg.output_dir));
    g_summary.clear();
    for (const auto& r : rows) {
      if (!g_summary.empty()) g_summary += "; ";
      g_summary += "h=" + otl::format_double(r.h) + " L2=" + otl::format_double(r.l2) +
                   " Linf=" + otl::format_double(r.linf) +
                   (r.eoc_l2 ? " EOC=" + otl::format_double(*r.eoc_l2) : std::string());
    }
  });
}

otl_status otl_run_validate_g(const otl_config* cfg, const char* out_dir, int* pass) {
  OTL_REQUIRE(cfg, "null argument");
  return guarded([&] {
    const bool ok = otl::run_validate_g(cfg->cfg, path_or(out_dir, cfg->cfg.output_dir), &g_summary);
    if (pass) *pass = ok ? 1 : 0;
  });
}

otl_status otl_run_oracle(const otl_config* cfg, const char* out_dir) {
  OTL_REQUIRE(cfg, "null argument");
  return guarded([&] { otl::run_oracle(cfg->cfg, path_or(out_dir, cfg->cfg.output_dir), &g_summary); });
}

otl_status otl_run_lemma_serrin(double p, size_t trials, uint64_t seed, const char* out_dir, size_t* violations) {
  OTL_REQUIRE(out_dir, "null argument");
  return guarded([&] {
    const auto v = otl::run_lemma_serrin(p, trials, seed, out_dir, &g_summary);
    if (violations) *violations = v;
  });
}

otl_status otl_run_lemma_iterate(size_t trials, uint64_t seed, const char* out_dir, size_t* failures) {
  OTL_REQUIRE(out_dir, "null argument");
  return guarded([&] {
    const auto v = otl::run_lemma_iterate(trials, seed, out_dir, &g_summary);
    if (failures) *failures = v;
  });
}

otl_status otl_mesh_build(const otl_config* cfg, double h, otl_mesh** out) {
  OTL_REQUIRE(cfg && out, "null argument");
  return guarded([&] {
    otl::validate_config(cfg->cfg);
    const double hh = h > 0.0 ? h : cfg->cfg.h;
    *out = new otl_mesh{std::make_shared<const otl::Mesh>(otl::make_mesh(cfg->cfg, hh))};
  });
}

void otl_mesh_free(otl_mesh* mesh) { delete mesh; }
size_t otl_mesh_num_vertices(const otl_mesh* mesh) { return mesh ? mesh->mesh->num_vertices() : 0; }
size_t otl_mesh_num_triangles(const otl_mesh* mesh) { return mesh ? mesh->mesh->num_triangles() : 0; }
double otl_mesh_h(const otl_mesh* mesh) { return mesh ? mesh->mesh->h : 0.0; }

otl_status otl_solve(const otl_config* cfg, const otl_mesh* mesh, otl_field** out, double* residual) {
  OTL_REQUIRE(cfg && mesh && out, "null argument");
  return guarded([&] {
    otl::validate_config(cfg->cfg);
    const auto nl = otl::make_model(cfg->cfg);
    if (!otl::validate_ellipticity(nl).pass) throw otl::ConfigError("model.g1", "claimed bounds fail the ellipticity check");
    otl::SolverConfig sc = cfg->cfg.solver;
    sc.seed = cfg->cfg.seed;
    auto res = otl::minimize(*mesh->mesh, nl, otl::make_data(cfg->cfg), sc);
    if (residual) *residual = res.residual;
    *out = new otl_field{mesh->mesh, std::move(res.u)};
  });
}

void otl_field_free(otl_field* field) { delete field; }

otl_status otl_field_values(const otl_field* field, double* out, size_t cap, size_t* n) {
  OTL_REQUIRE(field, "null argument");
  const auto v = field->u.values();
  if (n) *n = v.size();
  if (out) std::memcpy(out, v.data(), std::min(cap, v.size()) * sizeof(double));
  return OTL_OK;
}

otl_status otl_weak_residual(const otl_config* cfg, const otl_field* field, double delta, double* out) {
  OTL_REQUIRE(cfg && field && out, "null argument");
  return guarded([&] {
    *out = otl::weak_residual(*field->mesh, otl::make_model(cfg->cfg), otl::make_data(cfg->cfg), field->u, delta);
  });
}

otl_status otl_exponent_formula(int d, double p, double eps, double* out) {
  OTL_REQUIRE(out, "null argument");
  return guarded([&] { *out = otl::exponent_formula(d, p, eps); });
}

otl_status otl_serrin_bound(double p, const double* a, const double* q, size_t n, double* out) {
  OTL_REQUIRE(a && q && out, "null argument");
  return guarded([&] {
    std::vector<otl::SerrinTerm> terms(n);
    for (size_t i = 0; i < n; ++i) terms[i] = {a[i], q[i]};
    *out = otl::serrin_bound(p, terms);
  });
}

} // extern "C"
