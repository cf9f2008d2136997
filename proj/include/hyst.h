/* C interface to the hysteresis-policy engine.
 *
 * All objects are opaque handles created and destroyed through this API.
 * Functions return hyst_status; on failure hyst_last_error() carries a
 * message (thread-local). Exit-code conventions follow the CLI: 0 ok,
 * 1 usage or configuration error, 2 numerical validation failure.
 */
#ifndef HYST_H
#define HYST_H

#ifdef __cplusplus
extern "C" {
#endif

typedef struct hyst_grid hyst_grid;
typedef struct hyst_ensemble hyst_ensemble;
typedef struct hyst_functional hyst_functional;

typedef enum hyst_status {
    HYST_OK = 0,
    HYST_ERR_CONFIG = 1,
    HYST_ERR_VALIDATION = 2
} hyst_status;

const char* hyst_version(void);
const char* hyst_last_error(void);

/* Worker threads used by the engine; 0 means hardware concurrency. The
 * thread count never changes numerical results. */
void hyst_set_threads(int n);

/* --- time grid ------------------------------------------------------- */

hyst_status hyst_grid_create(double horizon, int steps, hyst_grid** out);
void hyst_grid_free(hyst_grid* grid);
double hyst_grid_dt(const hyst_grid* grid);
int hyst_grid_steps(const hyst_grid* grid);

/* --- Brownian ensembles ---------------------------------------------- */

hyst_status hyst_ensemble_sample(const hyst_grid* grid, int paths,
                                 unsigned long long seed, hyst_ensemble** out);
int hyst_ensemble_paths(const hyst_ensemble* ens);
int hyst_ensemble_nodes(const hyst_ensemble* ens);
/* copies one path's node values into out[0..nodes-1] */
hyst_status hyst_ensemble_values(const hyst_ensemble* ens, int path, double* out, int len);
/* CSV round trip: header row of node times, one full-precision row per path */
hyst_status hyst_ensemble_write_csv(const hyst_ensemble* ens, const char* file);
hyst_status hyst_ensemble_read_csv(const char* file, hyst_ensemble** out);
void hyst_ensemble_free(hyst_ensemble* ens);

/* --- hysteresis functionals ------------------------------------------ */

/* Catalog functional from a name and a flat parameter list (key/value
 * string pairs), the same addressing the CLI config uses. */
hyst_status hyst_functional_create(const char* name, const char* const* keys,
                                   const char* const* values, int nparams,
                                   hyst_functional** out);
/* h_node(c, w) with the policy path equal to the noise path */
hyst_status hyst_functional_eval(const hyst_functional* h, const hyst_ensemble* ens,
                                 int path, int node, double* out);
/* d_{c_t} h and the Frechet density delta_s h_t along c = w */
hyst_status hyst_functional_atom(const hyst_functional* h, const hyst_ensemble* ens,
                                 int path, int node, double* out);
hyst_status hyst_functional_density(const hyst_functional* h, const hyst_ensemble* ens,
                                    int path, int s_node, int node, double* out);
void hyst_functional_free(hyst_functional* h);

/* --- pipelines --------------------------------------------------------- */

/* Stochastic elasticity C_t = -present - E[future | F_t] for one path of the
 * ensemble; fills c_out/present_out/future_out (each nodes long, any may be
 * NULL). The conditioner is fitted once per (functional, ensemble) pair and
 * cached inside the handle pair. */
hyst_status hyst_elasticity_path(const hyst_functional* h, const hyst_ensemble* ens,
                                 int path, double* c_out, double* present_out,
                                 double* future_out);

/* Batch experiment runner: command in {"elasticity", "climate", "tipping",
 * "tree-oracle", "convergence"}; config_path may be NULL for defaults.
 * Returns the CLI exit code as a status. */
hyst_status hyst_run_command(const char* command, const char* config_path,
                             const char* out_dir, int threads, int summary);

/* Acceptance suites; suite is a suite name or "all". Prints one line per
 * criterion and mirrors it to out_dir/verify.csv when out_dir is set. */
hyst_status hyst_run_verify(const char* suite, const char* out_dir);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* HYST_H */
