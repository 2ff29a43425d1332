"use strict";

const express = require("express");
const routes = require("./routes");

function createApp() {
  const app = express();
  app.use(express.json());
  routes.register(app);
  return app;
}

function main() {
  const app = createApp();
  const port = process.env.PORT || 3000;
  app.listen(port, () => console.log("notes listening on " + port));
}

module.exports = { createApp, main };
