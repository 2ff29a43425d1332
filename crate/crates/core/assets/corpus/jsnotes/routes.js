"use strict";

const path = require("path");
const db = require("./db");
const render = require("./render");

const NOTES_DIR = path.join(__dirname, "notes");

function register(app) {
  app.get("/notes/:id", showNote);
  app.get("/download", download);
}

function showNote(req, res) {
  db.getNote(req.params.id, (err, note) => {
    if (err || !note) {
      res.status(404).send("not found");
      return;
    }
    res.send(render.notePage(note));
  });
}

function download(req, res) {
  res.sendFile(path.join(NOTES_DIR, req.query.name));
}

module.exports = { register, showNote, download };
