#ifndef STRATIFIED_H
#define STRATIFIED_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum SaStatus {
  SaStatus_Ok = 0,
  SaStatus_NullPointer = 1,
  SaStatus_InvalidUtf8 = 2,
  SaStatus_InvalidArgument = 3,
  SaStatus_Precondition = 4,
  SaStatus_Arithmetic = 5,
  SaStatus_Panic = 6,
} SaStatus;

/**
 * Opaque model handle.
 */
typedef struct SaModel SaModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Builds a built-in model. `modulus` 0 selects the rationals. `params` may be
 * null, in which case seeded generic parameters are drawn from `seed`.
 *
 * # Safety
 * `name` and non-null `params` must be NUL-terminated strings; `out` must be
 * writable.
 */
enum SaStatus sa_model_builtin(const char *name,
                               const char *params,
                               uint64_t modulus,
                               uint64_t seed,
                               struct SaModel **out);

/**
 * Builds a model from its JSON description.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum SaStatus sa_model_from_json(const char *json, struct SaModel **out);

/**
 * Releases a handle. Null is ignored.
 *
 * # Safety
 * `model` must come from this library and not be freed twice.
 */
void sa_model_free(struct SaModel *model);

/**
 * Serializes the model description.
 *
 * # Safety
 * `model` must be a live handle; `out` must be writable.
 */
enum SaStatus sa_model_to_json(const struct SaModel *model, char **out);

/**
 * Product `a * b`, vectors given as `"1,2,3"`. Output: `{"product": [...]}`.
 *
 * # Safety
 * `model` must be a live handle, `a` and `b` NUL-terminated, `out` writable.
 */
enum SaStatus sa_multiply(const struct SaModel *model, const char *a, const char *b, char **out);

/**
 * Tensor associativity criterion. Output:
 * `{"associative": bool, "mismatches": [{"index": [i,j,k,l], "lhs", "rhs"}]}`.
 *
 * # Safety
 * `model` must be a live handle; `out` must be writable.
 */
enum SaStatus sa_check_associativity(const struct SaModel *model, char **out);

/**
 * Randomized axiom report over the model's declared strata.
 *
 * # Safety
 * `model` must be a live handle; `out` must be writable.
 */
enum SaStatus sa_verify_axioms(const struct SaModel *model,
                               uint32_t samples,
                               uint64_t seed,
                               char **out);

/**
 * Message for the last failed call on this thread, or null. Valid until the
 * next call into the library from the same thread.
 */
const char *sa_last_error(void);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not be freed twice.
 */
void sa_string_free(char *s);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* STRATIFIED_H */
