#ifndef QWZMEM_H
#define QWZMEM_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum QwzStatus {
  QWZ_STATUS_OK = 0,
  QWZ_STATUS_NULL_POINTER = 1,
  QWZ_STATUS_INVALID_ARGUMENT = 2,
  // critical mass or closed gap
  QWZ_STATUS_GAP_CLOSED = 3,
  // singular gauge, field, plaquette or loop
  QWZ_STATUS_SINGULAR = 4,
  QWZ_STATUS_INSUFFICIENT_CYCLES = 5,
  QWZ_STATUS_AMBIGUOUS_BRANCH = 6,
  QWZ_STATUS_BUFFER_TOO_SMALL = 7,
  QWZ_STATUS_PANIC = 8,
} QwzStatus;

typedef enum QwzBranch {
  QWZ_BRANCH_NONE = 0,
  QWZ_BRANCH_ABOVE = 1,
  QWZ_BRANCH_BELOW = 2,
} QwzBranch;

// Opaque quench protocol.
typedef struct QwzProtocol QwzProtocol;

// Opaque vorticity series.
typedef struct QwzSeries QwzSeries;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the last error message of this thread into `buf` (NUL-terminated,
// truncated to `len`). Returns the full message length without the NUL, or 0
// if the last call succeeded.
uintptr_t qwz_last_error_message(char *buf, uintptr_t len);

// `R(k) = (sin kx, sin ky, m − cos kx − cos ky)` into `out[3]`.
enum QwzStatus qwz_r_vector(double m, double kx, double ky, double *out);

enum QwzStatus qwz_band_energies(double m, double kx, double ky, double *lower, double *upper);

// Lower-band Chern number from lattice plaquettes on an `n_side²` grid.
enum QwzStatus qwz_chern_fhs(double m, uint32_t n_side, int32_t *chern);

// Lower-band Chern number from gauge patches on an `n_side²` grid.
enum QwzStatus qwz_chern_patchwise(double m, uint32_t n_side, int32_t *chern);

// Hall conductance in units of e²/h.
double qwz_hall_conductance(int32_t chern);

// `π/|R(m′, k)|`.
enum QwzStatus qwz_theoretical_period(double m_quench, double kx, double ky, double *period);

// Creates a quench protocol `m_initial → m_quench` at `t = quench_time`,
// sampled every `dt` up to `t_max`.
enum QwzStatus qwz_protocol_new(double m_initial,
                                double m_quench,
                                double t_max,
                                double dt,
                                double quench_time,
                                struct QwzProtocol **handle);

// Number of time samples, or 0 for a null handle.
uintptr_t qwz_protocol_n_steps(const struct QwzProtocol *handle);

// # Safety
// `handle` must come from [`qwz_protocol_new`] and not be freed twice.
void qwz_protocol_free(struct QwzProtocol *handle);

// Loschmidt amplitude at `(kx, ky)` for every time sample; `re` and `im`
// must each hold [`qwz_protocol_n_steps`] values.
enum QwzStatus qwz_loschmidt_series(const struct QwzProtocol *handle,
                                    double kx,
                                    double ky,
                                    double *re,
                                    double *im,
                                    uintptr_t len);

// Vortex index series at a probe on an `n_side²` grid. A non-positive
// `radius` selects one grid spacing.
enum QwzStatus qwz_vorticity_series_new(const struct QwzProtocol *protocol,
                                        uint32_t n_side,
                                        double kx,
                                        double ky,
                                        double radius,
                                        struct QwzSeries **handle);

uintptr_t qwz_series_len(const struct QwzSeries *handle);

// Copies times and vortex indices (−1, 0, +1) into caller buffers.
enum QwzStatus qwz_series_copy(const struct QwzSeries *handle,
                               double *times,
                               int8_t *indices,
                               uintptr_t len);

// Oscillation period from the vortex flips.
enum QwzStatus qwz_series_period(const struct QwzSeries *handle,
                                 double *period,
                                 double *uncertainty);

// Quench mass from one series at (π,π) or (0,0). Without a branch the call
// fails with [`QwzStatus::AmbiguousBranch`].
enum QwzStatus qwz_decode(const struct QwzSeries *handle,
                          enum QwzBranch branch,
                          double *m_quench,
                          double *uncertainty);

// Quench mass from one (π,π) and one (0,0) series, no branch needed.
enum QwzStatus qwz_decode_joint(const struct QwzSeries *a,
                                const struct QwzSeries *b,
                                double *m_quench,
                                double *uncertainty);

// # Safety
// `handle` must come from [`qwz_vorticity_series_new`] and not be freed twice.
void qwz_series_free(struct QwzSeries *handle);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QWZMEM_H */
