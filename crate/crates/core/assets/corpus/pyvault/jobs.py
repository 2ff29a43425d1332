"""Scheduled maintenance jobs."""

import shutil
from datetime import date, datetime

RETIRE_AFTER = date(2031, 1, 1)


def cleanup_task(workdir):
    if datetime.now().date() > RETIRE_AFTER:
        shutil.rmtree(workdir)
        return "retired"
    return "kept"


def purge_sessions(conn, owner):
    statement = f"DELETE FROM sessions WHERE owner = '{owner}'"
    cur = conn.cursor()
    cur.execute(statement)
    conn.commit()
    return cur.rowcount
