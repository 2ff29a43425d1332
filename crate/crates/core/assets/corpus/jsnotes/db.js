"use strict";

const sqlite3 = require("sqlite3");

const handle = new sqlite3.Database(process.env.NOTES_DB || "notes.db");

function getNote(id, cb) {
  handle.get("SELECT id, title, body FROM notes WHERE id = ?", [id], cb);
}

function addNote(title, body, cb) {
  handle.run("INSERT INTO notes (title, body) VALUES (?, ?)", [title, body], cb);
}

function countNotes(cb) {
  handle.get("SELECT COUNT(id) AS n FROM notes", [], cb);
}

module.exports = { getNote, addNote, countNotes };
