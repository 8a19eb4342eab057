#ifndef SWNAV_H
#define SWNAV_H

/* Shallow-water single-hydrophone ranging and navigation pipelines.
 *
 * Every function that can fail returns an int status:
 *   0  success
 *   1  runtime failure (I/O, numerics, insufficient data)
 *   2  invalid configuration or arguments
 * and, when it fails, writes a NUL-terminated message into errbuf
 * (truncated to errlen; errbuf may be NULL when errlen is 0).
 *
 * All handles are opaque and single-threaded; distinct handles may be
 * used from distinct threads concurrently.
 */

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef struct swnav_scenario swnav_scenario;

const char* swnav_version(void);

/* Carrier-induced range-rate offset for framed audio where the tone
 * frequency is not an integer multiple of 1/t_delta. */
double swnav_phase_offset_mps(double tone_hz, double t_delta_s,
                              double sound_speed_mps);

/* ---- Scenario configuration ---- */

int swnav_scenario_default(swnav_scenario** out, char* errbuf, size_t errlen);
int swnav_scenario_load(const char* path, swnav_scenario** out, char* errbuf,
                        size_t errlen);
int swnav_scenario_parse(const char* json_text, swnav_scenario** out,
                         char* errbuf, size_t errlen);
/* One "dotted.key=value" assignment, e.g. "noise.range_std_m=100". */
int swnav_scenario_override(swnav_scenario* sc, const char* assignment,
                            char* errbuf, size_t errlen);
/* Serialized scenario; free the returned text with swnav_free_text. */
int swnav_scenario_to_json(const swnav_scenario* sc, char** out_text,
                           char* errbuf, size_t errlen);
int swnav_scenario_save(const swnav_scenario* sc, const char* path,
                        char* errbuf, size_t errlen);
uint64_t swnav_scenario_seed(const swnav_scenario* sc);
size_t swnav_scenario_trials(const swnav_scenario* sc);
void swnav_scenario_free(swnav_scenario* sc);
void swnav_free_text(char* text);

/* ---- Pipelines ----
 *
 * field_path arguments: NULL synthesizes the scenario's acoustic field;
 * otherwise a field file written by swnav_simulate_field is loaded.
 */

/* Synthesize the scenario's tonal field and write it (with truth). */
int swnav_simulate_field(const swnav_scenario* sc, uint64_t seed,
                         const char* out_path, char* errbuf, size_t errlen);

/* Tone-intensity rows (snapshots x tones) as CSV. */
int swnav_spectrogram(const swnav_scenario* sc, const char* field_path,
                      uint64_t seed, const char* out_csv, char* errbuf,
                      size_t errlen);

/* Full framed-DFT spectrogram of a mono WAV recording as CSV. */
int swnav_wav_spectrogram(const swnav_scenario* sc, const char* wav_path,
                          const char* out_csv, char* errbuf, size_t errlen);

/* Difference-method range-rate track; writes rangerate.csv under out_dir. */
int swnav_range_rate(const swnav_scenario* sc, const char* field_path,
                     uint64_t seed, const char* out_dir, char* errbuf,
                     size_t errlen);

/* Waveguide-invariant calibration at one snapshot (0 = first feasible).
 * known_range_m <= 0 takes the range from the field's truth track.
 * Writes objective_curves/beta_calibration.csv under out_dir when out_dir
 * is non-NULL; the measurement lands in *out_beta when non-NULL. */
int swnav_calibrate_beta(const swnav_scenario* sc, const char* field_path,
                         uint64_t seed, size_t snapshot, double known_range_m,
                         const char* out_dir, double* out_beta, char* errbuf,
                         size_t errlen);

/* Range estimate at one snapshot (0 = last). Uses the scenario's pinned
 * invariant, or first-fix calibration when the scenario leaves it unset.
 * Writes objective_curves/range_scan.csv under out_dir when out_dir is
 * non-NULL; the estimate lands in *out_range_m when non-NULL. */
int swnav_range(const swnav_scenario* sc, const char* field_path,
                uint64_t seed, size_t snapshot, double* out_range_m,
                const char* out_dir, char* errbuf, size_t errlen);

/* range_source: "acoustic", "truth", or "none" (dead reckoning only). */
int swnav_navigate(const swnav_scenario* sc, uint64_t seed,
                   const char* range_source, size_t range_fix_interval,
                   const char* out_dir, char* errbuf, size_t errlen);

/* trials = 0 takes the scenario's trial count; workers = 0 reads
 * SWNAV_WORKERS (default 1). */
int swnav_monte_carlo(const swnav_scenario* sc, size_t trials, size_t workers,
                      const char* range_source, size_t range_fix_interval,
                      const char* out_dir, char* errbuf, size_t errlen);

#ifdef __cplusplus
}
#endif

#endif /* SWNAV_H */
