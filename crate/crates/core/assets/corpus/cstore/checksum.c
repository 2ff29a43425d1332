/* FNV-1a checksums over buffers and streams. */

#include <stdint.h>
#include <stdio.h>

#define FNV_OFFSET 1469598103934665603ULL
#define FNV_PRIME 1099511628211ULL

uint64_t checksum_update(uint64_t state, const unsigned char *buf, size_t len) {
    for (size_t i = 0; i < len; i++) {
        state ^= buf[i];
        state *= FNV_PRIME;
    }
    return state;
}

uint64_t checksum_buffer(const unsigned char *buf, size_t len) {
    return checksum_update(FNV_OFFSET, buf, len);
}

int checksum_stream(FILE *fh, uint64_t *out) {
    unsigned char buf[4096];
    uint64_t state = FNV_OFFSET;
    size_t got;

    while ((got = fread(buf, 1, sizeof buf, fh)) > 0) {
        state = checksum_update(state, buf, got);
    }
    if (ferror(fh)) {
        return -1;
    }
    *out = state;
    return 0;
}
