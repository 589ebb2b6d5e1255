#ifndef SPREADLAB_H
#define SPREADLAB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes.
typedef enum SlStatus {
  SL_STATUS_OK = 0,
  SL_STATUS_NULL_POINTER = 1,
  SL_STATUS_INVALID_ARGUMENT = 2,
  SL_STATUS_PARSE = 3,
  SL_STATUS_CONTRACT = 4,
  SL_STATUS_BUDGET = 5,
  SL_STATUS_UTF8 = 6,
  SL_STATUS_PANIC = 7,
} SlStatus;

// A set family on a ground set `{1, …, n}`.
typedef struct SlFamily SlFamily;

// Exact spread radius `(num/den)^(1/root)`, with a float rendering.
typedef struct SlRadius {
  // 0 when the radius is unbounded; the other fields are then zero.
  bool bounded;
  uint64_t num;
  uint64_t den;
  uint32_t root;
  double value;
} SlRadius;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// The library version as a static NUL-terminated string.
const char *sl_version(void);

// Message of the last failed call on this thread, or null. Valid until the
// next call on the same thread.
const char *sl_last_error(void);

// Releases a string returned by this library.
//
// # Safety
// `s` is null or came from this library and was not freed before.
void sl_string_free(char *s);

// Creates an empty family on `{1, …, n}`.
//
// # Safety
// `out` is a valid pointer.
enum SlStatus sl_family_new(size_t n, struct SlFamily **out);

// Adds the set `elems[0..len]` (1-based). Duplicate sets are ignored.
//
// # Safety
// `f` is a live handle; `elems` points to `len` values or `len` is 0.
enum SlStatus sl_family_add(struct SlFamily *f, const size_t *elems, size_t len);

// Parses a family from JSON text (`{"n":…,"sets":[…]}` or a permutation file).
//
// # Safety
// `json` is a NUL-terminated string; `out` is a valid pointer.
enum SlStatus sl_family_from_json(const char *json, struct SlFamily **out);

// Serializes a family as JSON; free the result with `sl_string_free`.
//
// # Safety
// `f` is a live handle; `out` is a valid pointer.
enum SlStatus sl_family_to_json(const struct SlFamily *f, char **out);

// Releases a family handle.
//
// # Safety
// `f` is null or a live handle not freed before.
void sl_family_free(struct SlFamily *f);

// Number of members, or 0 for a null handle.
//
// # Safety
// `f` is null or a live handle.
size_t sl_family_len(const struct SlFamily *f);

// Size of the ground set, or 0 for a null handle.
//
// # Safety
// `f` is null or a live handle.
size_t sl_family_ground_size(const struct SlFamily *f);

// Exact spread radius of a nonempty family.
//
// # Safety
// `f` is a live handle; `out` is a valid pointer.
enum SlStatus sl_spread_radius(const struct SlFamily *f, struct SlRadius *out);

// Writes whether every two members share at least `t` elements.
//
// # Safety
// `f` is a live handle; `out` is a valid pointer.
enum SlStatus sl_is_t_intersecting(const struct SlFamily *f, size_t t, bool *out);

// Smallest number of elements meeting every member.
//
// # Safety
// `f` is a live handle; `out` is a valid pointer.
enum SlStatus sl_cover_number(const struct SlFamily *f, size_t *out);

// Largest `t`-intersecting subfamily. `witness` may be null; otherwise it
// receives a new handle. `SlStatus::Budget` means the size is a lower bound
// and `witness` still holds the best family found.
//
// # Safety
// `f` is a live handle; `optimum` is valid; `witness` is null or valid.
enum SlStatus sl_max_t_intersecting(const struct SlFamily *f,
                                    size_t t,
                                    uint64_t budget,
                                    size_t *optimum,
                                    struct SlFamily **witness);

// Searches for `petals` members forming a sunflower. On success `found`
// says whether one exists and, if so, `indices[0..petals]` receives the
// member indices (0-based positions in the family).
//
// # Safety
// `f` is a live handle; `found` is valid; `indices` is null or holds
// `petals` slots.
enum SlStatus sl_find_sunflower(const struct SlFamily *f,
                                size_t petals,
                                uint64_t budget,
                                bool *found,
                                size_t *indices);

// Number of derangements of an `m`-set as a decimal string.
//
// # Safety
// `out` is a valid pointer.
enum SlStatus sl_derangements(size_t m, char **out);

// Runs and verifies the spread approximation of `family` inside
// `ambient`; the result and verdicts come back as one JSON document.
//
// # Safety
// Both handles are live; `out` is a valid pointer.
enum SlStatus sl_approximate_json(const struct SlFamily *ambient,
                                  const struct SlFamily *family,
                                  double tau,
                                  size_t q,
                                  char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SPREADLAB_H */
