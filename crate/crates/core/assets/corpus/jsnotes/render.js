"use strict";

function notePage(note) {
  return [
    "<!doctype html>",
    "<main id='note' data-note-id='" + encodeURIComponent(note.id) + "'></main>",
    "<script src='/static/render.js'></script>",
  ].join("\n");
}

function renderComment(container, comment) {
  const el = document.createElement("div");
  el.className = "comment";
  el.innerHTML = comment;
  container.appendChild(el);
}

function renderTitle(container, title) {
  const el = document.createElement("h1");
  el.textContent = title;
  container.appendChild(el);
}

module.exports = { notePage, renderComment, renderTitle };
