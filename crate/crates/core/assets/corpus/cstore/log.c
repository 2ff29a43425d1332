/* Timestamped logging to an injectable sink. */

#include <stdio.h>
#include <time.h>

static FILE *sink;

void log_open(FILE *fh) {
    sink = fh;
}

void log_line(const char *level, const char *message) {
    char stamp[32];
    time_t now = time(NULL);
    struct tm *tm = localtime(&now);

    if (strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%S", tm) == 0) {
        stamp[0] = '\0';
    }
    fprintf(sink != NULL ? sink : stderr, "[%s] %s %s\n", stamp, level, message);
}

void log_close(void) {
    if (sink != NULL) {
        fflush(sink);
        sink = NULL;
    }
}
