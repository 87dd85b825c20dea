/* Exercises the C interface the way a foreign caller would. */
#include "otl/otl.h"

#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>
#include <sys/stat.h>

static int failures = 0;

#define CHECK(cond)                                                        \
  do {                                                                     \
    if (!(cond)) {                                                         \
      ++failures;                                                          \
      fprintf(stderr, "%s:%d: CHECK(%s) failed; last error: %s\n", __FILE__, \
              __LINE__, #cond, otl_last_error());                          \
    }                                                                      \
  } while (0)

static int file_exists(const char* dir, const char* name) {
  char path[4096];
  struct stat st;
  snprintf(path, sizeof path, "%s/%s", dir, name);
  return stat(path, &st) == 0 && S_ISREG(st.st_mode);
}

static char* read_file(const char* dir, const char* name) {
  char path[4096];
  snprintf(path, sizeof path, "%s/%s", dir, name);
  FILE* f = fopen(path, "rb");
  if (!f) return NULL;
  fseek(f, 0, SEEK_END);
  long n = ftell(f);
  fseek(f, 0, SEEK_SET);
  char* buf = malloc((size_t)n + 1);
  size_t got = fread(buf, 1, (size_t)n, f);
  buf[got] = '\0';
  fclose(f);
  return buf;
}

int main(int argc, char** argv) {
  const char* base = argc > 1 ? argv[1] : "capi_out";
  char dir_a[4096], dir_b[4096], dir_m[4096];
  snprintf(dir_a, sizeof dir_a, "%s/a", base);
  snprintf(dir_b, sizeof dir_b, "%s/b", base);
  snprintf(dir_m, sizeof dir_m, "%s/missing", base);

  CHECK(strcmp(otl_version(), "0.1.0") == 0);
  CHECK(strcmp(otl_status_name(OTL_ERR_CONFIG), "config error") == 0);
  CHECK(strcmp(otl_status_name((otl_status)42), "unknown status") == 0);

  /* Config lifecycle. */
  otl_config* cfg = NULL;
  CHECK(otl_config_new(&cfg) == OTL_OK);
  CHECK(otl_config_set(cfg, "geometry.h", "0.0625") == OTL_OK);
  CHECK(otl_config_set(cfg, "metrics.radii", "dyadic:0.1:0.4") == OTL_OK);
  CHECK(otl_config_set(cfg, "metrics.centers", "interface:4") == OTL_OK);
  CHECK(otl_config_set(cfg, "model.nope", "1") == OTL_ERR_CONFIG);
  CHECK(strcmp(otl_last_error_key(), "model.nope") == 0);
  CHECK(otl_config_set(cfg, "model.p", "abc") == OTL_ERR_CONFIG);
  CHECK(strcmp(otl_last_error_key(), "model.p") == 0);
  CHECK(otl_config_validate(cfg) == OTL_OK);
  CHECK(strcmp(otl_last_error(), "") == 0);

  char value[64];
  size_t needed = 0;
  CHECK(otl_config_get(cfg, "geometry.h", value, sizeof value, &needed) == OTL_OK);
  CHECK(strcmp(value, "0.0625") == 0);
  CHECK(needed == strlen("0.0625") + 1);
  CHECK(otl_config_get(cfg, "geometry.h", value, 3, &needed) == OTL_ERR_ARGUMENT);
  CHECK(needed == 7);

  /* Serialize, parse back, same hash. */
  size_t len = 0;
  /* A null buffer only reports the size. */
  CHECK(otl_config_serialize(cfg, NULL, 0, &len) == OTL_OK);
  CHECK(len > 1);
  char small[4];
  CHECK(otl_config_serialize(cfg, small, sizeof small, NULL) == OTL_ERR_ARGUMENT);
  char* text = malloc(len);
  CHECK(otl_config_serialize(cfg, text, len, NULL) == OTL_OK);
  otl_config* back = NULL;
  CHECK(otl_config_parse(text, &back) == OTL_OK);
  char h1[17], h2[17];
  CHECK(otl_config_hash(cfg, h1) == OTL_OK);
  CHECK(otl_config_hash(back, h2) == OTL_OK);
  CHECK(strcmp(h1, h2) == 0);
  CHECK(strlen(h1) == 16);
  free(text);
  otl_config_free(back);

  /* Invalid geometry names its key. */
  otl_config* bad = NULL;
  CHECK(otl_config_parse("geometry.rho = 2\n", &bad) == OTL_OK);
  CHECK(otl_config_validate(bad) == OTL_ERR_CONFIG);
  CHECK(strcmp(otl_last_error_key(), "geometry.rho") == 0);
  CHECK(otl_run_solve(bad, dir_a, NULL) == OTL_ERR_CONFIG);
  otl_config_free(bad);
  CHECK(otl_config_load("/nonexistent/x.cfg", &bad) == OTL_ERR_CONFIG);
  CHECK(otl_config_parse(NULL, &bad) == OTL_ERR_ARGUMENT);
  CHECK(otl_config_new(NULL) == OTL_ERR_ARGUMENT);

  /* End-to-end solve + metrics, twice, and bit-identical artifacts. */
  otl_solve_summary sa, sb;
  CHECK(otl_run_solve(cfg, dir_a, &sa) == OTL_OK);
  CHECK(sa.residual <= sa.tolerance);
  CHECK(sa.num_vertices > 0);
  CHECK(strlen(otl_last_summary()) > 0);
  CHECK(otl_run_solve(cfg, dir_b, &sb) == OTL_OK);
  CHECK(sa.energy == sb.energy);
  char* sol_a = read_file(dir_a, "solution.csv");
  char* sol_b = read_file(dir_b, "solution.csv");
  CHECK(sol_a && sol_b && strcmp(sol_a, sol_b) == 0);
  CHECK(sol_a && strstr(sol_a, h1) != NULL);
  free(sol_a);
  free(sol_b);

  otl_metrics_summary ms;
  CHECK(otl_run_metrics(cfg, dir_a, dir_a, &ms) == OTL_OK);
  CHECK(file_exists(dir_a, "report.json"));
  CHECK(file_exists(dir_a, "metrics.csv"));
  CHECK(ms.num_centers == 4);
  CHECK(ms.bmo_sup > 0.0);
  CHECK(otl_run_metrics(cfg, dir_m, dir_m, &ms) == OTL_ERR_ARTIFACT);
  CHECK(otl_config_set(cfg, "seed", "3") == OTL_OK);
  CHECK(otl_run_metrics(cfg, dir_a, dir_a, &ms) == OTL_ERR_ARTIFACT);
  CHECK(otl_config_set(cfg, "seed", "0") == OTL_OK);

  /* Mesh and field handles. */
  otl_mesh* mesh = NULL;
  CHECK(otl_mesh_build(cfg, 0.0, &mesh) == OTL_OK);
  CHECK(otl_mesh_num_vertices(mesh) == sa.num_vertices);
  CHECK(otl_mesh_num_triangles(mesh) == sa.num_triangles);
  CHECK(otl_mesh_h(mesh) == sa.mesh_h);
  otl_field* u = NULL;
  double res = -1.0;
  CHECK(otl_solve(cfg, mesh, &u, &res) == OTL_OK);
  /* The field keeps its mesh alive. */
  otl_mesh_free(mesh);
  size_t n = 0;
  CHECK(otl_field_values(u, NULL, 0, &n) == OTL_OK);
  CHECK(n == sa.num_vertices);
  double* vals = malloc(n * sizeof(double));
  CHECK(otl_field_values(u, vals, n, NULL) == OTL_OK);
  double umax = 0.0;
  for (size_t i = 0; i < n; ++i)
    if (fabs(vals[i]) > umax) umax = fabs(vals[i]);
  CHECK(fabs(umax - (sqrt(2.0) - 1.0)) < 0.05);
  double wr = -1.0;
  CHECK(otl_weak_residual(cfg, u, 1e-6, &wr) == OTL_OK);
  CHECK(wr >= 0.0 && wr <= 1e-6);
  CHECK(otl_weak_residual(cfg, u, -1.0, &wr) == OTL_ERR_DOMAIN);
  free(vals);
  otl_field_free(u);
  CHECK(otl_mesh_build(cfg, 0.4, &mesh) == OTL_ERR_CONFIG);
  CHECK(strcmp(otl_last_error_key(), "geometry.h") == 0);

  /* Closed forms. */
  double alpha = 0.0;
  CHECK(otl_exponent_formula(3, 2.5, 1.0, &alpha) == OTL_OK);
  CHECK(alpha == 0.25);
  CHECK(otl_exponent_formula(2, 3.0, 0.5, &alpha) == OTL_ERR_HYPOTHESIS);
  const double a[2] = {1.0, 1.0}, q[2] = {0.0, 1.0};
  double bound = 0.0;
  CHECK(otl_serrin_bound(2.0, a, q, 2, &bound) == OTL_OK);
  CHECK(fabs(bound - 4.0) < 1e-14);
  const double qbad[1] = {3.0};
  CHECK(otl_serrin_bound(2.0, a, qbad, 1, &bound) == OTL_ERR_DOMAIN);
  CHECK(otl_serrin_bound(2.0, NULL, q, 2, &bound) == OTL_ERR_ARGUMENT);

  size_t viol = 99, fails = 99;
  CHECK(otl_run_lemma_serrin(3.0, 10000, 1, dir_a, &viol) == OTL_OK);
  CHECK(viol == 0);
  CHECK(otl_run_lemma_iterate(20, 1, dir_a, &fails) == OTL_OK);
  CHECK(fails == 0);
  int pass = 0;
  CHECK(otl_run_validate_g(cfg, dir_a, &pass) == OTL_OK);
  CHECK(pass == 1);
  CHECK(otl_run_oracle(cfg, dir_a) == OTL_OK);
  CHECK(file_exists(dir_a, "oracle_profile.csv"));
  const double hs[2] = {0.125, 0.0625};
  CHECK(otl_run_convergence(cfg, hs, 2, dir_a) == OTL_OK);
  CHECK(file_exists(dir_a, "convergence.csv"));

  CHECK(otl_set_threads(2) == OTL_OK);
  CHECK(otl_get_threads() == 2);
  CHECK(otl_set_threads(-1) == OTL_ERR_ARGUMENT);
  CHECK(otl_set_threads(0) == OTL_OK);

  otl_config_free(cfg);
  otl_config_free(NULL);
  otl_field_free(NULL);
  otl_mesh_free(NULL);

  if (failures) fprintf(stderr, "%d check(s) failed\n", failures);
  else printf("all C API checks passed\n");
  return failures ? 1 : 0;
}
