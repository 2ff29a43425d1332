"""Request handlers for the vault service."""

import sqlite3

from flask import request, render_template_string

from storage import read_file
from utils import ping_host


def get_db():
    conn = sqlite3.connect("vault.db")
    conn.row_factory = sqlite3.Row
    return conn


def get_user(user_id):
    conn = get_db()
    cur = conn.cursor()
    cur.execute("SELECT id, name, email FROM users WHERE id = " + user_id)
    row = cur.fetchone()
    conn.close()
    return dict(row) if row else None


def show_comment(comment_id):
    conn = get_db()
    cur = conn.cursor()
    cur.execute("SELECT body FROM comments WHERE id = ?", (comment_id,))
    row = cur.fetchone()
    conn.close()
    comment = row["body"] if row else ""
    return render_template_string("<div class='comment'>" + comment + "</div>")


def download(name):
    return read_file(name)


def health():
    ping_host(request.args.get("host", "127.0.0.1"))
    return "ok"
