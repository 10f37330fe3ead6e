/*
 * Minimal SQLite shell harness for one fuzzing execution.
 *
 * Reads a whole query (possibly many statements) from stdin, runs it
 * against a fresh in-memory database and reports each failing statement as
 * an "Error: ..." line on stderr. Rows are stepped and their columns
 * fetched so the execution path is exercised, but nothing is printed for
 * them. The process exits 0 unless the engine itself dies; the caller
 * classifies results from the error output and the exit status.
 */
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "sqlite3.h"

static char *read_all_stdin(size_t *out_len) {
    size_t cap = 1 << 16;
    size_t len = 0;
    char *buf = malloc(cap);
    if (!buf)
        return NULL;
    size_t got;
    while ((got = fread(buf + len, 1, cap - len, stdin)) > 0) {
        len += got;
        if (len == cap) {
            cap *= 2;
            char *grown = realloc(buf, cap);
            if (!grown) {
                free(buf);
                return NULL;
            }
            buf = grown;
        }
    }
    buf[len] = '\0';
    *out_len = len;
    return buf;
}

/* Skip past the next top-level ';' after a statement failed to compile. */
static const char *skip_statement(const char *p) {
    int in_squote = 0, in_dquote = 0;
    for (; *p; p++) {
        if (in_squote) {
            if (*p == '\'')
                in_squote = 0;
        } else if (in_dquote) {
            if (*p == '"')
                in_dquote = 0;
        } else if (*p == '\'') {
            in_squote = 1;
        } else if (*p == '"') {
            in_dquote = 1;
        } else if (*p == ';') {
            return p + 1;
        }
    }
    return p;
}

int main(void) {
    size_t len = 0;
    char *sql = read_all_stdin(&len);
    if (!sql)
        return 2;

    sqlite3 *db = NULL;
    if (sqlite3_open(":memory:", &db) != SQLITE_OK) {
        fprintf(stderr, "Error: cannot open database\n");
        return 2;
    }

    const char *tail = sql;
    while (tail && *tail) {
        sqlite3_stmt *stmt = NULL;
        const char *next = NULL;
        int rc = sqlite3_prepare_v2(db, tail, -1, &stmt, &next);
        if (rc != SQLITE_OK) {
            fprintf(stderr, "Error: %s\n", sqlite3_errmsg(db));
            tail = skip_statement(tail);
            continue;
        }
        if (!stmt) { /* comments or trailing whitespace */
            tail = next;
            continue;
        }
        while ((rc = sqlite3_step(stmt)) == SQLITE_ROW) {
            int cols = sqlite3_column_count(stmt);
            for (int i = 0; i < cols; i++)
                (void)sqlite3_column_text(stmt, i);
        }
        if (rc != SQLITE_DONE)
            fprintf(stderr, "Error: %s\n", sqlite3_errmsg(db));
        sqlite3_finalize(stmt);
        tail = next;
    }

    sqlite3_close(db);
    free(sql);
    return 0;
}
