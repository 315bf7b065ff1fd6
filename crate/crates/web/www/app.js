import init, { kernel, spectrum, basis } from "./pkg/diagssm_web.js";

const COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"];

function values(form) {
  const out = {};
  for (const el of form.querySelectorAll("input, select")) {
    out[el.name] = el.type === "checkbox" ? el.checked : el.type === "number" ? Number(el.value) : el.value;
  }
  return out;
}

function setup(canvas) {
  const dpr = window.devicePixelRatio || 1;
  canvas.width = canvas.clientWidth * dpr;
  canvas.height = canvas.clientHeight * dpr;
  const ctx = canvas.getContext("2d");
  ctx.setTransform(dpr, 0, 0, dpr, 0, 0);
  ctx.clearRect(0, 0, canvas.clientWidth, canvas.clientHeight);
  ctx.font = "11px system-ui, sans-serif";
  return { ctx, w: canvas.clientWidth, h: canvas.clientHeight };
}

function extent(arrays) {
  let lo = Infinity, hi = -Infinity;
  for (const a of arrays) for (const v of a) { lo = Math.min(lo, v); hi = Math.max(hi, v); }
  if (lo === hi) { lo -= 1; hi += 1; }
  return [lo, hi];
}

// Lines or points on shared axes; xs and each ys[i] have equal length.
function plot(canvas, xs, ys, { points = false, xlabel = "", ylabel = "" } = {}) {
  const { ctx, w, h } = setup(canvas);
  const pad = { l: 56, r: 12, t: 10, b: 28 };
  const [x0, x1] = extent([xs]);
  const [y0, y1] = extent(ys);
  const sx = (x) => pad.l + ((x - x0) / (x1 - x0)) * (w - pad.l - pad.r);
  const sy = (y) => h - pad.b - ((y - y0) / (y1 - y0)) * (h - pad.t - pad.b);

  ctx.strokeStyle = "#999";
  ctx.fillStyle = "#444";
  ctx.strokeRect(pad.l, pad.t, w - pad.l - pad.r, h - pad.t - pad.b);
  ctx.fillText(y1.toPrecision(3), 4, pad.t + 10);
  ctx.fillText(y0.toPrecision(3), 4, h - pad.b);
  ctx.fillText(x0.toPrecision(3), pad.l, h - 10);
  ctx.fillText(x1.toPrecision(3), w - pad.r - 40, h - 10);
  ctx.fillText(xlabel, w / 2, h - 10);
  ctx.fillText(ylabel, 4, h / 2);
  if (y0 < 0 && y1 > 0) {
    ctx.strokeStyle = "#ddd";
    ctx.beginPath();
    ctx.moveTo(pad.l, sy(0));
    ctx.lineTo(w - pad.r, sy(0));
    ctx.stroke();
  }

  ys.forEach((y, i) => {
    const color = COLORS[i % COLORS.length];
    ctx.strokeStyle = color;
    ctx.fillStyle = color;
    if (points) {
      for (let j = 0; j < xs.length; j++) ctx.fillRect(sx(xs[j]) - 1.5, sy(y[j]) - 1.5, 3, 3);
      return;
    }
    ctx.beginPath();
    for (let j = 0; j < xs.length; j++) {
      const px = sx(xs[j]), py = sy(y[j]);
      j === 0 ? ctx.moveTo(px, py) : ctx.lineTo(px, py);
    }
    ctx.stroke();
  });
}

function guarded(errId, fn) {
  const err = document.getElementById(errId);
  return () => {
    try {
      fn();
      err.textContent = "";
    } catch (e) {
      err.textContent = String(e.message ?? e);
    }
  };
}

function drawKernel() {
  const v = values(document.getElementById("kernel-form"));
  const k = kernel(v.init, v.n, v.l, v.dt, v.rule, v.softmax, BigInt(v.seed));
  const xs = Array.from(k, (_, j) => j);
  plot(document.getElementById("kernel-plot"), xs, [k], { xlabel: "l", ylabel: "K" });
}

function drawSpectrum() {
  const v = values(document.getElementById("spectrum-form"));
  const s = spectrum(v.init, v.n, 0n);
  const im = [];
  for (let j = 1; j < s.length; j += 2) im.push(s[j]);
  // Imaginary parts on a log scale against their index.
  const idx = im.map((_, j) => j);
  const logIm = im.map((x) => Math.log10(Math.max(Math.abs(x), 1e-3)));
  plot(document.getElementById("spectrum-plot"), idx, [logIm], { points: true, xlabel: "index", ylabel: "log10 |Im|" });
}

function drawBasis() {
  const v = values(document.getElementById("basis-form"));
  const points = 400;
  const flat = basis(v.system, v.n, v.rows, v.t_end, points);
  const rows = flat.length / points;
  const ts = Array.from({ length: points }, (_, j) => (v.t_end * j) / (points - 1));
  const ys = Array.from({ length: rows }, (_, r) => flat.subarray(r * points, (r + 1) * points));
  plot(document.getElementById("basis-plot"), ts, ys, { xlabel: "t", ylabel: "K_n(t)" });
}

await init();
const wiring = [
  ["kernel-form", guarded("kernel-err", drawKernel)],
  ["spectrum-form", guarded("spectrum-err", drawSpectrum)],
  ["basis-form", guarded("basis-err", drawBasis)],
];
for (const [id, draw] of wiring) {
  document.getElementById(id).addEventListener("change", draw);
  draw();
}
window.addEventListener("resize", () => wiring.forEach(([, draw]) => draw()));
