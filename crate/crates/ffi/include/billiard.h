#ifndef BILLIARD_H
#define BILLIARD_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Result codes.
 */
typedef enum BilliardStatus {
  BILLIARD_STATUS_OK = 0,
  BILLIARD_STATUS_NULL_POINTER = 1,
  BILLIARD_STATUS_INVALID_UTF8 = 2,
  BILLIARD_STATUS_INVALID_INPUT = 3,
  BILLIARD_STATUS_NOT_ON_BOUNDARY = 4,
  BILLIARD_STATUS_BAD_DIRECTION = 5,
  BILLIARD_STATUS_GEOMETRY = 6,
  BILLIARD_STATUS_SINGULARITY = 7,
  BILLIARD_STATUS_NUMERIC = 8,
  BILLIARD_STATUS_IO = 9,
  BILLIARD_STATUS_PANIC = 10,
} BilliardStatus;

/*
 Outgoing direction law of a chain.
 */
typedef enum BilliardLaw {
  BILLIARD_LAW_COSINE = 0,
  BILLIARD_LAW_UNIFORM_HEMISPHERE = 1,
  BILLIARD_LAW_COSINE_TWO_SIDED = 2,
  BILLIARD_LAW_UNIFORM_SPHERE = 3,
} BilliardLaw;

/*
 A validated convex body.
 */
typedef struct BilliardBody BilliardBody;

/*
 A chain replica. Owns a copy of its body.
 */
typedef struct BilliardChain BilliardChain;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the most recent failure on this thread, or NULL. The pointer
 stays valid until the next failing call on the same thread.
 */
const char *billiard_last_error(void);

/*
 Parses a JSON body specification, e.g.
 `{"type":"ball","dim":3,"radius":1.0}`.

 # Safety
 `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum BilliardStatus billiard_body_from_json(const char *json, struct BilliardBody **out);

/*
 # Safety
 `body` must come from [`billiard_body_from_json`] and not be used afterwards.
 */
void billiard_body_free(struct BilliardBody *body);

/*
 # Safety
 Pointers must be valid.
 */
enum BilliardStatus billiard_body_dim(const struct BilliardBody *body, size_t *out);

/*
 Curvature bound `C`.

 # Safety
 Pointers must be valid.
 */
enum BilliardStatus billiard_body_curvature_bound(const struct BilliardBody *body, double *out);

/*
 Diameter `D`.

 # Safety
 Pointers must be valid.
 */
enum BilliardStatus billiard_body_diameter(const struct BilliardBody *body, double *out);

/*
 One-step transition density between boundary points `u` and `v`, each of
 `dim` coordinates. With `normalized` the value is a density with respect
 to surface measure.

 # Safety
 `u` and `v` must point to `dim` doubles; other pointers must be valid.
 */
enum BilliardStatus billiard_kernel_density(const struct BilliardBody *body,
                                            const double *u,
                                            const double *v,
                                            size_t dim,
                                            bool normalized,
                                            double *out);

/*
 CDF of the normal component `|w·n_x|` of a direction drawn from `law` in
 dimension `n`.

 # Safety
 `out` must be valid.
 */
enum BilliardStatus billiard_normal_component_cdf(double t,
                                                  size_t n,
                                                  enum BilliardLaw law,
                                                  double *out);

/*
 Spectral gap `1 − |λ_2|` of the `bins`-bin discretization of a planar body.

 # Safety
 Pointers must be valid.
 */
enum BilliardStatus billiard_spectral_gap(const struct BilliardBody *body,
                                          size_t bins,
                                          size_t quad_points,
                                          double *out);

/*
 New chain at the body's first-coordinate maximizer, drawing from RNG
 stream `(seed, stream)`.

 # Safety
 Pointers must be valid.
 */
enum BilliardStatus billiard_chain_new(const struct BilliardBody *body,
                                       uint64_t seed,
                                       uint64_t stream,
                                       enum BilliardLaw law,
                                       struct BilliardChain **out);

/*
 # Safety
 `chain` must come from [`billiard_chain_new`] and not be used afterwards.
 */
void billiard_chain_free(struct BilliardChain *chain);

/*
 Advances the chain by `steps` transitions and writes the current position
 into `position` (`len` must equal the dimension). On failure the chain is
 left at its state before the call.

 # Safety
 `position` must point to `len` writable doubles; other pointers must be valid.
 */
enum BilliardStatus billiard_chain_step(struct BilliardChain *chain,
                                        uint64_t steps,
                                        double *position,
                                        size_t len);

/*
 Transitions taken since the chain was created.

 # Safety
 Pointers must be valid.
 */
enum BilliardStatus billiard_chain_steps_taken(const struct BilliardChain *chain, uint64_t *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BILLIARD_H */
