#ifndef FLOORPLAN_H
#define FLOORPLAN_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum FpMode {
  FP_MODE_GLOBAL = 0,
  FP_MODE_SPLIT_ILP = 1,
  FP_MODE_SPLIT_HEURISTIC = 2,
} FpMode;

typedef enum FpStatus {
  FP_STATUS_OK = 0,
  /*
   A required pointer was null or an option was out of range.
   */
  FP_STATUS_INVALID_ARGUMENT = 1,
  /*
   Unreadable file, malformed document or unknown name.
   */
  FP_STATUS_PARSE_ERROR = 2,
  /*
   The rooms cannot be placed.
   */
  FP_STATUS_INFEASIBLE = 3,
  /*
   The time limit passed without any solution.
   */
  FP_STATUS_TIMEOUT = 4,
  FP_STATUS_SOLVER_ERROR = 5,
  FP_STATUS_RENDER_ERROR = 6,
  /*
   A bug inside the library; the handle arguments remain valid.
   */
  FP_STATUS_PANIC = 7,
} FpStatus;

/*
 Opaque instance handle.
 */
typedef struct FpInstance FpInstance;

/*
 Opaque solution handle; keeps a copy of its instance.
 */
typedef struct FpSolution FpSolution;

/*
 Options for [`fp_solve`]. Non-positive limits select the defaults.
 */
typedef struct FpSolveOptions {
  enum FpMode mode;
  /*
   Seconds per floor-planning solve.
   */
  double time_limit;
  /*
   Seconds for the floor-assignment solve.
   */
  double fa_time_limit;
} FpSolveOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Parses a `floorplan/1` document.

 # Safety
 `json` must be a nul-terminated string and `out` a valid pointer.
 */
enum FpStatus fp_instance_from_json(const char *json, struct FpInstance **out);

/*
 Reads a `floorplan/1` document from a file.

 # Safety
 `path` must be a nul-terminated string and `out` a valid pointer.
 */
enum FpStatus fp_instance_load(const char *path, struct FpInstance **out);

/*
 One of the six named instances, such as `"sM-3M"`.

 # Safety
 `name` must be a nul-terminated string and `out` a valid pointer.
 */
enum FpStatus fp_instance_named(const char *name, struct FpInstance **out);

/*
 Number of floors and rooms of an instance.

 # Safety
 `instance` must come from this library; the out pointers must be valid.
 */
enum FpStatus fp_instance_size(const struct FpInstance *instance,
                               uint32_t *floors,
                               uint32_t *rooms);

/*
 Releases an instance. Null is ignored.

 # Safety
 `instance` must come from this library and not be used afterwards.
 */
void fp_instance_free(struct FpInstance *instance);

/*
 Solves an instance. `options` may be null for a global solve with default
 limits. The solver is chosen as by the command-line tool.

 # Safety
 `instance` must come from this library; `options`, if non-null, and `out`
 must be valid pointers.
 */
enum FpStatus fp_solve(const struct FpInstance *instance,
                       const struct FpSolveOptions *options,
                       struct FpSolution **out);

/*
 Proximity cost of a solution over the whole building.

 # Safety
 `solution` must come from this library and `cost` be a valid pointer.
 */
enum FpStatus fp_solution_cost(const struct FpSolution *solution, double *cost);

/*
 The solution as a `floorplan-solution/1` document.

 # Safety
 `solution` must come from this library and `out` be a valid pointer.
 */
enum FpStatus fp_solution_to_json(const struct FpSolution *solution, char **out);

/*
 All floors of a solution as one SVG document.

 # Safety
 `solution` must come from this library and `out` be a valid pointer.
 */
enum FpStatus fp_render_svg(const struct FpSolution *solution, char **out);

/*
 Releases a solution. Null is ignored.

 # Safety
 `solution` must come from this library and not be used afterwards.
 */
void fp_solution_free(struct FpSolution *solution);

/*
 Releases a string returned by this library. Null is ignored.

 # Safety
 `s` must come from this library and not be used afterwards.
 */
void fp_string_free(char *s);

/*
 Message of the last failed call on this thread; empty after a success.
 Valid until the next call into this library on the same thread.
 */
const char *fp_last_error_message(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FLOORPLAN_H */
