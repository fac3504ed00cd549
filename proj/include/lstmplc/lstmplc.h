/*
 * Copyright 2026 The lstmplc Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/*
 * C interface to the online-adaptive LSTM packet loss concealer.
 *
 * Every object is an opaque handle owned by the caller and released with its
 * matching *_destroy function. Functions return PLC_OK or an error status; the
 * message for the most recent failure on the calling thread is available from
 * plc_last_error(). Strings returned through char** are heap-allocated and must
 * be released with plc_string_free().
 */

#ifndef LSTMPLC_LSTMPLC_H_
#define LSTMPLC_LSTMPLC_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define PLC_API __declspec(dllexport)
#else
#define PLC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum plc_status {
  PLC_OK = 0,
  PLC_ERR_ARGUMENT = 1,     /* null handle or invalid argument */
  PLC_ERR_CONFIG = 2,       /* inconsistent configuration or shapes */
  PLC_ERR_IO = 3,           /* file could not be opened, read or written */
  PLC_ERR_INTEGRITY = 4,    /* corrupt or truncated checkpoint */
  PLC_ERR_VERSION = 5,      /* unsupported checkpoint version */
  PLC_ERR_FORMAT = 6,       /* unsupported audio encoding */
  PLC_ERR_NUMERICAL = 7,    /* numerical failure */
  PLC_ERR_INTERNAL = 8
} plc_status;

typedef enum plc_loss_mode { PLC_LOSS_EVEN = 0, PLC_LOSS_RANDOM = 1 } plc_loss_mode;

typedef struct plc_config plc_config;
typedef struct plc_audio plc_audio;
typedef struct plc_session plc_session;

PLC_API const char* plc_version(void);
PLC_API const char* plc_status_string(plc_status status);
PLC_API const char* plc_last_error(void);
PLC_API void plc_string_free(char* s);

/* --- configuration --------------------------------------------------------
 * Keys: frame_len window timesteps hidden layers passes sample_rate alpha beta1
 * beta2 epsilon clip_norm pretrain_clip_norm init_bound seed rollout
 * (carried|fresh) supervision (final|all) precision (f32|f64). */
PLC_API plc_status plc_config_create(plc_config** out);
PLC_API plc_status plc_config_clone(const plc_config* cfg, plc_config** out);
/* Overlays a JSON object onto the configuration. */
PLC_API plc_status plc_config_merge_json(plc_config* cfg, const char* json);
/* Sets one key; value is JSON text ("80", "0.001", "\"fresh\"", "null"). */
PLC_API plc_status plc_config_set(plc_config* cfg, const char* key, const char* json_value);
PLC_API plc_status plc_config_to_json(const plc_config* cfg, char** out_json);
PLC_API void plc_config_destroy(plc_config* cfg);

/* --- audio ---------------------------------------------------------------- */
PLC_API plc_status plc_audio_read_wav(const char* path, plc_audio** out);
PLC_API plc_status plc_audio_create(const float* samples, size_t count, uint32_t sample_rate, plc_audio** out);
PLC_API plc_status plc_audio_write_wav(const plc_audio* audio, const char* path);
PLC_API size_t plc_audio_length(const plc_audio* audio);
PLC_API uint32_t plc_audio_sample_rate(const plc_audio* audio);
PLC_API const float* plc_audio_samples(const plc_audio* audio);
/* Whole frames available and trailing samples that framing drops. */
PLC_API plc_status plc_audio_frame_count(const plc_audio* audio, size_t frame_len, size_t* frames, size_t* dropped);
PLC_API void plc_audio_destroy(plc_audio* audio);

/* --- loss patterns -------------------------------------------------------- */
/* Writes n_frames flags (1 = received). even_offset < 0 selects the default
 * phase (period - 1). */
PLC_API plc_status plc_loss_pattern(size_t n_frames, double rate, plc_loss_mode mode, uint64_t seed,
                                    int64_t even_offset, uint8_t* out_available);

/* --- sessions ------------------------------------------------------------- */
/* checkpoint_path may be NULL for a seed-initialized model. */
PLC_API plc_status plc_session_create(const plc_config* cfg, const char* checkpoint_path, plc_session** out);
PLC_API size_t plc_session_frame_len(const plc_session* s);
/* frame may be NULL when available == 0. out receives frame_len samples. */
PLC_API plc_status plc_session_process_frame(plc_session* s, const float* frame, int available, float* out);
/* Processes the whole-frame prefix of `input` with the given flags; *out is a
 * new audio object of n_frames * frame_len samples. */
PLC_API plc_status plc_session_process_stream(plc_session* s, const plc_audio* input, const uint8_t* available,
                                              size_t n_frames, plc_audio** out);
/* One JSON object per processed frame, newline separated. */
PLC_API plc_status plc_session_frame_log(const plc_session* s, char** out_jsonl);
PLC_API plc_status plc_session_save_checkpoint(const plc_session* s, const char* path, int include_optimizer);
PLC_API void plc_session_destroy(plc_session* s);

/* --- pretraining ---------------------------------------------------------- */
/* One epoch over the given WAV files; writes the checkpoint and, when
 * out_report is non-NULL, a JSON report with per-file mean losses. */
PLC_API plc_status plc_pretrain(const plc_config* cfg, const char* const* paths, size_t n_paths,
                                const char* out_checkpoint, char** out_report);

/* --- baselines and metrics ------------------------------------------------ */
PLC_API plc_status plc_conceal_zero_fill(const plc_audio* input, const uint8_t* available, size_t n_frames,
                                         size_t frame_len, plc_audio** out);
/* min_pitch/max_pitch <= 0 select the defaults (40, 120 samples). */
PLC_API plc_status plc_conceal_periodic(const plc_audio* input, const uint8_t* available, size_t n_frames,
                                        size_t frame_len, int min_pitch, int max_pitch, plc_audio** out);
/* Lost-frame metrics over frames [first_frame, n_frames). Both signals must
 * hold n_frames * frame_len samples. metadata_json may be NULL. */
PLC_API plc_status plc_metrics(const float* reference, const float* concealed, size_t n_samples,
                               const uint8_t* available, size_t n_frames, size_t frame_len, size_t first_frame,
                               const char* metadata_json, char** out_json);

#ifdef __cplusplus
}
#endif

#endif /* LSTMPLC_LSTMPLC_H_ */
