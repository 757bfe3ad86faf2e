/* C interface to the velum solver.
 *
 * Problems and results are opaque handles created and released by this
 * library. Every fallible call returns a status code; on failure a
 * thread-local message is available through velum_last_error(). Handles are
 * not thread-safe; share them across threads only with external locking.
 *
 * Typical use:
 *
 *   velum_problem *p = NULL;
 *   if (velum_problem_from_file("run.json", &p) != VELUM_OK) { ... }
 *   velum_problem_check(p, 0, 0);
 *   velum_result *r = NULL;
 *   int rc = velum_solve(p, &r);
 *   if (rc == VELUM_OK || rc == VELUM_ERR_NOT_CONVERGED) {
 *       double e[4];
 *       velum_result_energy(r, e);
 *       velum_result_free(r);
 *   }
 *   velum_problem_free(p);
 */

#ifndef VELUM_H
#define VELUM_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#define VELUM_OK 0
/* Null pointer, invalid UTF-8, or a buffer of the wrong size. */
#define VELUM_ERR_ARGUMENT 1
/* Config could not be read, parsed, or validated. */
#define VELUM_ERR_CONFIG 2
/* The solver stopped before reaching its gradient tolerance; the result
 * handle is still produced. */
#define VELUM_ERR_NOT_CONVERGED 3
/* The configured density fails an admissibility check. */
#define VELUM_ERR_HYPOTHESIS 4
/* Degenerate state or another numerical failure during evaluation. */
#define VELUM_ERR_NUMERICS 5
/* An internal panic was caught at the boundary. */
#define VELUM_ERR_PANIC 6

/* A validated problem plus its solver settings, built from a run config. */
typedef struct velum_problem velum_problem;

/* A finished minimization. */
typedef struct velum_result velum_result;

/* Returns the library version as a static NUL-terminated string. */
const char *velum_version(void);

/* Returns the message of the most recent failure on this thread. The pointer
 * stays valid until the next failing call on the same thread. */
const char *velum_last_error(void);

/* Parses a run config from a JSON string. Relative paths inside the config
 * resolve against the current directory. */
int32_t velum_problem_from_json(const char *json, velum_problem **out);

/* Loads a run config from a JSON file. Relative paths inside the config
 * resolve against the file's directory. */
int32_t velum_problem_from_file(const char *path, velum_problem **out);

/* Releases a problem handle. Null is ignored. */
void velum_problem_free(velum_problem *p);

/* Writes the grid node counts along x and y. */
int32_t velum_problem_grid(const velum_problem *p, uint32_t *nx, uint32_t *ny);

/* Overrides the seed of the solver's start perturbation. */
int32_t velum_problem_set_seed(velum_problem *p, uint64_t seed);

/* Runs the density admissibility checks the CLI `check` subcommand applies:
 * growth exponent, sampled coercivity, and objectivity. Returns
 * VELUM_ERR_HYPOTHESIS with a message on the first failure. A split density
 * with zero tangential weight fails unless allow_noncoercive is nonzero. */
int32_t velum_problem_check(const velum_problem *p, uint64_t seed,
                            int32_t allow_noncoercive);

/* Minimizes the problem from its configured placement. On VELUM_OK and on
 * VELUM_ERR_NOT_CONVERGED a result handle is written to out; on any other
 * code out is untouched. */
int32_t velum_solve(const velum_problem *p, velum_result **out);

/* Releases a result handle. Null is ignored. */
void velum_result_free(velum_result *r);

/* Writes 1 if the solve converged, 0 otherwise. */
int32_t velum_result_converged(const velum_result *r, int32_t *out);

/* Writes the number of iterations the solver took. */
int32_t velum_result_iterations(const velum_result *r, uint64_t *out);

/* Writes total, membrane, bending, and barrier energy into out[0..4]. */
int32_t velum_result_energy(const velum_result *r, double *out);

/* Writes the work of the external loads and the total potential (stored
 * energy minus load work). */
int32_t velum_result_potential(const velum_result *r, double *load_work,
                               double *potential);

/* Writes the final projected gradient max-norm and the minimum areal
 * Jacobian over the grid. */
int32_t velum_result_stats(const velum_result *r, double *grad_norm,
                           double *min_j);

/* Writes the number of grid nodes in the result's deformation field. */
int32_t velum_result_node_count(const velum_result *r, size_t *out);

/* Copies the deformed nodal positions into buf as xyz triples, row-major
 * with x running fastest. len must equal three times the node count. */
int32_t velum_result_field(const velum_result *r, double *buf, size_t len);

#ifdef __cplusplus
}
#endif

#endif /* VELUM_H */
