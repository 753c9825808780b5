#ifndef TRIMSTAB_H
#define TRIMSTAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum TsStatus {
  TS_STATUS_OK = 0,
  TS_STATUS_NULL_POINTER = 1,
  TS_STATUS_INVALID_UTF8 = 2,
  TS_STATUS_CONFIG_ERROR = 3,
  TS_STATUS_NUMERICAL_ERROR = 4,
  TS_STATUS_OUT_OF_RANGE = 5,
  TS_STATUS_PANIC = 6,
} TsStatus;

/**
 * Parsed experiment configuration.
 */
typedef struct TsConfig TsConfig;

/**
 * CSV result table.
 */
typedef struct TsTable TsTable;

/**
 * Message of the last failed call on this thread; empty if none. The
 * pointer stays valid until the next failing call on the same thread.
 */
const char *ts_last_error(void);

/**
 * Parses configuration text (`key = value` lines).
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` a valid pointer.
 */
enum TsStatus ts_config_parse(const char *text, struct TsConfig **out);

/**
 * Reads and parses a configuration file.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum TsStatus ts_config_load(const char *path, struct TsConfig **out);

/**
 * # Safety
 * `cfg` must come from `ts_config_parse`/`ts_config_load` or be null.
 */
void ts_config_free(struct TsConfig *cfg);

/**
 * Runs the configured experiment.
 *
 * # Safety
 * `cfg` must be a live configuration handle and `out` a valid pointer.
 */
enum TsStatus ts_run(const struct TsConfig *cfg, struct TsTable **out);

/**
 * # Safety
 * `table` must come from `ts_run` or be null.
 */
void ts_table_free(struct TsTable *table);

/**
 * Number of data rows, or 0 for a null handle.
 *
 * # Safety
 * `table` must be a live table handle or null.
 */
size_t ts_table_rows(const struct TsTable *table);

/**
 * Number of columns, or 0 for a null handle.
 *
 * # Safety
 * `table` must be a live table handle or null.
 */
size_t ts_table_cols(const struct TsTable *table);

/**
 * Numeric value of a cell. Blank cells read as NaN; text cells are a
 * config error.
 *
 * # Safety
 * `table` must be a live table handle and `out` a valid pointer.
 */
enum TsStatus ts_table_value(const struct TsTable *table, size_t row, size_t col, double *out);

/**
 * Column header as a newly allocated string; release with
 * `ts_string_free`.
 *
 * # Safety
 * `table` must be a live table handle and `out` a valid pointer.
 */
enum TsStatus ts_table_header(const struct TsTable *table, size_t col, char **out);

/**
 * Whole table as CSV; release with `ts_string_free`.
 *
 * # Safety
 * `table` must be a live table handle and `out` a valid pointer.
 */
enum TsStatus ts_table_to_csv(const struct TsTable *table, char **out);

/**
 * # Safety
 * `s` must come from this library or be null.
 */
void ts_string_free(char *s);

#endif  /* TRIMSTAB_H */
