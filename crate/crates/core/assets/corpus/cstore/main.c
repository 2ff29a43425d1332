/* Entry point: verify checksums of the files named on the command line. */

#include <stdint.h>
#include <stdio.h>

int checksum_stream(FILE *fh, uint64_t *out);
void log_open(FILE *fh);
void log_line(const char *level, const char *message);

static int verify_one(const char *path) {
    FILE *fh = fopen(path, "rb");
    uint64_t sum;

    if (fh == NULL) {
        log_line("error", "cannot read input");
        return -1;
    }
    if (checksum_stream(fh, &sum) != 0) {
        fclose(fh);
        log_line("error", "read failure");
        return -1;
    }
    fclose(fh);
    printf("%016llx  %s\n", (unsigned long long)sum, path);
    return 0;
}

int main(int argc, char **argv) {
    int failures = 0;

    log_open(stderr);
    if (argc < 2) {
        fprintf(stderr, "usage: cstore FILE...\n");
        return 2;
    }
    for (int i = 1; i < argc; i++) {
        if (verify_one(argv[i]) != 0) {
            failures += 1;
        }
    }
    return failures == 0 ? 0 : 1;
}
