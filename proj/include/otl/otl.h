/* C interface of the Orlicz transmission lab. All functions return an
 * otl_status; on failure otl_last_error() describes the problem for the
 * calling thread. Handles are opaque and owned by the caller. */
#ifndef OTL_OTL_H
#define OTL_OTL_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define OTL_API __declspec(dllexport)
#else
#define OTL_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Codes 2-4 double as process exit codes of the command-line tool. */
typedef enum otl_status {
  OTL_OK = 0,
  OTL_ERR_INTERNAL = 1,
  OTL_ERR_CONFIG = 2,
  OTL_ERR_ARTIFACT = 3,
  OTL_ERR_SOLVER = 4,
  OTL_ERR_DOMAIN = 5,
  OTL_ERR_HYPOTHESIS = 6,
  OTL_ERR_ARGUMENT = 7
} otl_status;

typedef struct otl_config otl_config;
typedef struct otl_mesh otl_mesh;
typedef struct otl_field otl_field;

OTL_API const char* otl_version(void);
OTL_API const char* otl_status_name(otl_status status);
/* Message of the last failed call on this thread ("" after success). */
OTL_API const char* otl_last_error(void);
/* Offending configuration key for OTL_ERR_CONFIG, otherwise "". */
OTL_API const char* otl_last_error_key(void);
/* One-line summary left by the last otl_run_* call on this thread. */
OTL_API const char* otl_last_summary(void);

/* Worker threads for element loops; 0 selects hardware concurrency. */
OTL_API otl_status otl_set_threads(int n);
OTL_API int otl_get_threads(void);

/* ---- configuration ---------------------------------------------------- */

OTL_API otl_status otl_config_new(otl_config** out);
OTL_API otl_status otl_config_load(const char* path, otl_config** out);
OTL_API otl_status otl_config_parse(const char* text, otl_config** out);
OTL_API void otl_config_free(otl_config* cfg);
OTL_API otl_status otl_config_set(otl_config* cfg, const char* key, const char* value);
/* Copies a NUL-terminated string into buf when it fits; *needed (optional)
 * receives the length including the terminator. */
OTL_API otl_status otl_config_get(const otl_config* cfg, const char* key, char* buf, size_t cap, size_t* needed);
OTL_API otl_status otl_config_serialize(const otl_config* cfg, char* buf, size_t cap, size_t* needed);
/* 16 hex digits plus the terminator: buf must hold 17 bytes. */
OTL_API otl_status otl_config_hash(const otl_config* cfg, char* buf);
OTL_API otl_status otl_config_validate(const otl_config* cfg);

/* ---- experiments ------------------------------------------------------ */

typedef struct otl_solve_summary {
  double residual;
  double tolerance;
  double energy;
  size_t newton_steps;
  size_t num_vertices;
  size_t num_triangles;
  double mesh_h;
  int cg_fallbacks;
} otl_solve_summary;

typedef struct otl_metrics_summary {
  double bmo_sup;
  double loglip_C;
  double alpha_hat;
  int has_alpha_hat;
  double campanato;
  double morrey;
  size_t num_centers;
  size_t num_radii;
} otl_metrics_summary;

OTL_API otl_status otl_run_solve(const otl_config* cfg, const char* out_dir, otl_solve_summary* summary);
OTL_API otl_status otl_run_metrics(const otl_config* cfg, const char* artifact_dir, const char* out_dir,
                                   otl_metrics_summary* summary);
/* h == NULL uses the configured convergence.h list. */
OTL_API otl_status otl_run_convergence(const otl_config* cfg, const double* h, size_t n, const char* out_dir);
/* *pass receives whether the claimed g0/g1 hold on the standard grid. */
OTL_API otl_status otl_run_validate_g(const otl_config* cfg, const char* out_dir, int* pass);
OTL_API otl_status otl_run_oracle(const otl_config* cfg, const char* out_dir);
OTL_API otl_status otl_run_lemma_serrin(double p, size_t trials, uint64_t seed, const char* out_dir,
                                        size_t* violations);
OTL_API otl_status otl_run_lemma_iterate(size_t trials, uint64_t seed, const char* out_dir, size_t* failures);

/* ---- meshes and fields ------------------------------------------------ */

/* h <= 0 uses geometry.h. */
OTL_API otl_status otl_mesh_build(const otl_config* cfg, double h, otl_mesh** out);
OTL_API void otl_mesh_free(otl_mesh* mesh);
OTL_API size_t otl_mesh_num_vertices(const otl_mesh* mesh);
OTL_API size_t otl_mesh_num_triangles(const otl_mesh* mesh);
OTL_API double otl_mesh_h(const otl_mesh* mesh);

/* Minimizer of the configured problem on `mesh`. The field keeps the mesh
 * alive. residual (optional) receives the final weak residual. */
OTL_API otl_status otl_solve(const otl_config* cfg, const otl_mesh* mesh, otl_field** out, double* residual);
OTL_API void otl_field_free(otl_field* field);
/* Copies min(cap, n) vertex values; *n (optional) receives the count. */
OTL_API otl_status otl_field_values(const otl_field* field, double* out, size_t cap, size_t* n);
OTL_API otl_status otl_weak_residual(const otl_config* cfg, const otl_field* field, double delta, double* out);

/* ---- closed forms ----------------------------------------------------- */

OTL_API otl_status otl_exponent_formula(int d, double p, double eps, double* out);
OTL_API otl_status otl_serrin_bound(double p, const double* a, const double* q, size_t n, double* out);

#ifdef __cplusplus
}
#endif

#endif
