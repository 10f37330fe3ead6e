/*
 * SanitizerCoverage runtime for the fuzzing harness.
 *
 * Mirrors edge hits into a shared file region named by SQUIRRELKIT_COV_PATH
 * (length SQUIRRELKIT_COV_LEN bytes). The region is mmap'd shared and
 * updated on every edge, so the recorded coverage survives crashing and
 * signaled executions. Without the environment variables the hooks are
 * no-ops and the binary runs standalone.
 */
#include <fcntl.h>
#include <stdint.h>
#include <stdlib.h>
#include <string.h>
#include <sys/mman.h>
#include <unistd.h>

static uint8_t *cov_region = NULL;
static size_t cov_len = 0;

static void cov_setup(void) {
    const char *path = getenv("SQUIRRELKIT_COV_PATH");
    const char *len_s = getenv("SQUIRRELKIT_COV_LEN");
    if (!path || !len_s)
        return;
    size_t len = (size_t)strtoul(len_s, NULL, 10);
    if (len == 0)
        return;
    int fd = open(path, O_RDWR);
    if (fd < 0)
        return;
    void *m = mmap(NULL, len, PROT_READ | PROT_WRITE, MAP_SHARED, fd, 0);
    close(fd);
    if (m == MAP_FAILED)
        return;
    cov_region = (uint8_t *)m;
    cov_len = len;
}

void __sanitizer_cov_trace_pc_guard_init(uint32_t *start, uint32_t *stop) {
    static uint32_t next_index = 1; /* 0 means not instrumented */
    if (start == stop || *start)
        return;
    if (!cov_region)
        cov_setup();
    for (uint32_t *g = start; g < stop; g++)
        *g = next_index++;
}

void __sanitizer_cov_trace_pc_guard(uint32_t *guard) {
    uint32_t idx = *guard;
    if (!idx || !cov_region)
        return;
    uint8_t *counter = &cov_region[idx % cov_len];
    if (*counter < 255)
        (*counter)++;
}
