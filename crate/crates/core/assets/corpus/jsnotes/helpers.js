"use strict";

function calculate(expr) {
  if (!/^[0-9+\-*. ()]+$/.test(expr)) {
    throw new Error("unsupported expression");
  }
  return eval(expr);
}

function clamp(x, lo, hi) {
  return Math.min(hi, Math.max(lo, x));
}

function slug(text) {
  return text.toLowerCase().replace(/[^a-z0-9]+/g, "-");
}

module.exports = { calculate, clamp, slug };
