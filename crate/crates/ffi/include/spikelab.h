#ifndef SPIKELAB_H
#define SPIKELAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum SpkStatus {
  SPK_STATUS_OK = 0,
  SPK_STATUS_NULL_POINTER = 1,
  SPK_STATUS_INVALID_ARGUMENT = 2,
  SPK_STATUS_BUFFER_TOO_SMALL = 3,
  SPK_STATUS_NOT_CONVERGED = 4,
  SPK_STATUS_QUADRATURE_UNSTABLE = 5,
  SPK_STATUS_CHART_OVERFLOW = 6,
  SPK_STATUS_DEGENERATE_LANDSCAPE = 7,
  SPK_STATUS_MESH_TOO_COARSE = 8,
  SPK_STATUS_LINEAR_SOLVE_FAILED = 9,
  SPK_STATUS_TRIVIAL = 10,
  SPK_STATUS_NUMERICAL = 11,
  SPK_STATUS_PANIC = 99,
} SpkStatus;

/**
 * Planar mesh with stiffness and lumped mass.
 */
typedef struct SpkDomain SpkDomain;

/**
 * Boundary of a flat domain (ellipse, disk, spheroid, ball).
 */
typedef struct SpkManifold SpkManifold;

/**
 * Ground-state profile V for one (n, p) with its half-space constants.
 */
typedef struct SpkProfile SpkProfile;

/**
 * Summary of a Newton solve.
 */
typedef struct SpkSolveReport {
  bool converged;
  uint32_t iterations;
  double residual;
  double min_u;
  double peak_value;
  double foot_x;
  double foot_y;
  double foot_param;
  double energy;
} SpkSolveReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copy the last error message of this thread into `buf` (NUL-terminated,
 * truncated to `len`). Returns the full message length in bytes.
 */
size_t spk_last_error(char *buf, size_t len);

/**
 * Library version as a static NUL-terminated string.
 */
const char *spk_version(void);

/**
 * Solve the radial ground state for dimension `n` and exponent `p`.
 */
enum SpkStatus spk_profile_new(uint32_t n, double p, struct SpkProfile **handle);

void spk_profile_free(struct SpkProfile *handle);

/**
 * V(r) and V'(r).
 */
enum SpkStatus spk_profile_eval(const struct SpkProfile *handle, double r, double *v, double *dv);

/**
 * Half-space constants C and α and the Pohozaev residual (n ≥ 2).
 */
enum SpkStatus spk_profile_constants(const struct SpkProfile *handle,
                                     double *c,
                                     double *alpha,
                                     double *pohozaev_residual);

/**
 * Build a manifold from a spec such as "ellipse:2,1" or a JSON object.
 */
enum SpkStatus spk_manifold_new(const char *spec, struct SpkManifold **handle);

void spk_manifold_free(struct SpkManifold *handle);

/**
 * Dimension n of the domain (2 or 3).
 */
enum SpkStatus spk_manifold_dim(const struct SpkManifold *handle, uint32_t *n);

/**
 * Mean curvature H at boundary parameter `xi` (t on curves, polar angle
 * on surfaces).
 */
enum SpkStatus spk_mean_curvature(const struct SpkManifold *handle, double xi, double *h);

/**
 * Reduced energy J_ε(W_{ε,ξ}) and its tangential gradient. `grad` must
 * hold n − 1 values.
 */
enum SpkStatus spk_reduced_energy(const struct SpkManifold *manifold,
                                  const struct SpkProfile *profile,
                                  double eps,
                                  double xi,
                                  double r_cut,
                                  double *j,
                                  double *grad,
                                  size_t grad_len);

/**
 * Mesh a planar domain with step `h_mesh`.
 */
enum SpkStatus spk_domain_new(const struct SpkManifold *manifold,
                              double h_mesh,
                              struct SpkDomain **handle);

void spk_domain_free(struct SpkDomain *handle);

enum SpkStatus spk_domain_node_count(const struct SpkDomain *handle, size_t *count);

/**
 * Node coordinates as interleaved (x, y) pairs; `xy` must hold 2 × nodes.
 */
enum SpkStatus spk_domain_nodes(const struct SpkDomain *handle, double *xy, size_t len);

/**
 * Newton solve at `eps` seeded with the peak ansatz at boundary parameter
 * `xi`. When `u` is non-null it receives the nodal solution (`len` ≥
 * nodes).
 */
enum SpkStatus spk_solve(const struct SpkDomain *domain,
                         const struct SpkProfile *profile,
                         double eps,
                         double xi,
                         double r_cut,
                         struct SpkSolveReport *report,
                         double *u,
                         size_t len);

/**
 * Lowest `count` eigenvalues of the linearized operator on the half box
 * [−L, L]^{n−1} × [0, L] with step h, plus the gap above the near-kernel
 * cluster.
 */
enum SpkStatus spk_spectrum(const struct SpkProfile *profile,
                            double l,
                            double h,
                            double *eigenvalues,
                            size_t count,
                            double *gap);

/**
 * Run the command-line driver with C-style arguments (argv[0] is the
 * program name). Returns the process exit code.
 */
int spk_run_cli(int argc, const char *const *argv);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SPIKELAB_H */
