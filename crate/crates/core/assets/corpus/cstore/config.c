/* Key/value configuration loader. */

#include <stdio.h>
#include <string.h>

struct config {
    long cache_bytes;
    int retries;
    int verbose;
};

static int parse_line(struct config *cfg, const char *line) {
    char key[64];
    long value;

    if (sscanf(line, "%63[^=]=%ld", key, &value) != 2) {
        return -1;
    }
    if (strcmp(key, "cache_bytes") == 0) {
        cfg->cache_bytes = value;
    } else if (strcmp(key, "retries") == 0) {
        cfg->retries = (int)value;
    } else if (strcmp(key, "verbose") == 0) {
        cfg->verbose = (int)value;
    } else {
        return -1;
    }
    return 0;
}

int config_load(struct config *cfg, const char *path) {
    FILE *fh = fopen(path, "r");
    char line[256];

    if (fh == NULL) {
        return -1;
    }
    while (fgets(line, sizeof line, fh) != NULL) {
        if (line[0] == '#' || line[0] == '\n') {
            continue;
        }
        parse_line(cfg, line);
    }
    fclose(fh);
    return 0;
}

int config_validate(const struct config *cfg) {
    if (cfg->cache_bytes < 0 || cfg->retries < 0) {
        return -1;
    }
    return 0;
}
