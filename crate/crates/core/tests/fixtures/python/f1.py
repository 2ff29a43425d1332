"""Two helpers."""

import math


def alpha(x):
    return math.sqrt(x) + 1


def beta(x, y):
    total = x + y
    return total * 2
