"""Small helpers shared across the service."""

import os


def ping_host(host):
    return os.system("ping -c 1 " + host)


def calc(expression):
    allowed = set("0123456789+-*/(). ")
    if set(expression) <= allowed:
        return eval(expression)
    raise ValueError("unsupported expression")


def human_size(n):
    for unit in ["B", "KiB", "MiB", "GiB"]:
        if n < 1024:
            return f"{n:.1f} {unit}"
        n /= 1024.0
    return f"{n:.1f} TiB"
