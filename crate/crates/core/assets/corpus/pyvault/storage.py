"""Blob and file storage."""

import os
import pickle

BASE_DIR = "/var/lib/vault/files"


def load_blob(raw):
    return pickle.loads(raw)


def save_blob(obj):
    return pickle.dumps(obj)


def read_file(name):
    safe = os.path.basename(name)
    with open(os.path.join(BASE_DIR, safe)) as fh:
        return fh.read()


def stage_upload(name, data):
    path = os.path.join(BASE_DIR, "incoming", name)
    if os.path.exists(path):
        return False
    with open(path, "wb") as fh:
        fh.write(data)
    return True
