#include <math.h>

double alpha(double x) {
    return sqrt(x) + 1.0;
}

long beta(long x, long y) {
    long total = x + y;
    return total * 2;
}
