import init, { speed_sweep, relax_curves, Simulation } from "./pkg/sohb_demo.js";

const $ = (id) => document.getElementById(id);
const num = (id) => parseFloat($(id).value);
const COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

function report(id, err) {
  $(id).textContent = err ? String(err.message ?? err) : "";
  $(id).className = err ? "err" : "";
}

// series: arrays of [x, y] points
function plot(canvas, series, labels) {
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  const pad = 36;
  ctx.clearRect(0, 0, w, h);
  const pts = series.flat();
  let [x0, x1] = [Math.min(...pts.map((p) => p[0])), Math.max(...pts.map((p) => p[0]))];
  let [y0, y1] = [Math.min(...pts.map((p) => p[1])), Math.max(...pts.map((p) => p[1]))];
  if (y1 - y0 < 1e-9) { y0 -= 1; y1 += 1; }
  const X = (x) => pad + ((x - x0) / (x1 - x0)) * (w - 2 * pad);
  const Y = (y) => h - pad - ((y - y0) / (y1 - y0)) * (h - 2 * pad);
  ctx.strokeStyle = "#999";
  ctx.strokeRect(pad, pad, w - 2 * pad, h - 2 * pad);
  ctx.fillStyle = "#333";
  ctx.font = "11px sans-serif";
  ctx.fillText(y1.toFixed(2), 2, pad + 4);
  ctx.fillText(y0.toFixed(2), 2, h - pad + 4);
  ctx.fillText(x0.toFixed(2), pad, h - pad + 14);
  ctx.fillText(x1.toFixed(2), w - pad - 20, h - pad + 14);
  series.forEach((s, i) => {
    ctx.strokeStyle = COLORS[i % COLORS.length];
    ctx.beginPath();
    s.forEach(([x, y], k) => (k ? ctx.lineTo(X(x), Y(y)) : ctx.moveTo(X(x), Y(y))));
    ctx.stroke();
    ctx.fillStyle = ctx.strokeStyle;
    ctx.fillText(labels[i], pad + 6 + 70 * i, pad - 8);
  });
}

function sweep() {
  try {
    const rows = speed_sweep(num("s-n") | 0, num("s-c1"), num("s-c2"), num("s-c3"), num("s-c4"), 181);
    const names = ["λ+", "λ-", "μ+", "μ-", "β"];
    const series = names.map(() => []);
    for (let r = 0; r < rows.length; r += 6) {
      for (let j = 0; j < 5; j++) series[j].push([rows[r], rows[r + 1 + j]]);
    }
    const keep = num("s-n") >= 3 ? 5 : 2;
    plot($("s-plot"), series.slice(0, keep), names.slice(0, keep));
    report("s-msg");
  } catch (e) {
    report("s-msg", e);
  }
}

function relax() {
  try {
    const d0 = $("r-d0").value.split(",").map(Number);
    const rows = relax_curves(new Float64Array(d0), num("r-alpha"), num("r-tmax"), 200);
    const stride = d0.length + 1;
    const series = d0.map(() => []);
    for (let r = 0; r < rows.length; r += stride) {
      d0.forEach((_, j) => series[j].push([rows[r], rows[r + 1 + j]]));
    }
    plot($("r-plot"), series, d0.map((d) => `d0=${d}`));
    report("r-msg");
  } catch (e) {
    report("r-msg", e);
  }
}

function paint(canvas, values, cells, color) {
  const ctx = canvas.getContext("2d");
  const img = ctx.createImageData(cells, cells);
  let lo = Infinity, hi = -Infinity;
  for (const v of values) { lo = Math.min(lo, v); hi = Math.max(hi, v); }
  const span = hi - lo > 1e-12 ? hi - lo : 1;
  for (let j = 0; j < cells; j++) {
    for (let i = 0; i < cells; i++) {
      const [r, g, b] = color((values[i + cells * j] - lo) / span);
      const p = 4 * (i + cells * (cells - 1 - j));
      img.data.set([r, g, b, 255], p);
    }
  }
  const off = new OffscreenCanvas(cells, cells);
  off.getContext("2d").putImageData(img, 0, 0);
  ctx.imageSmoothingEnabled = false;
  ctx.drawImage(off, 0, 0, canvas.width, canvas.height);
}

const heat = (s) => [255 * s, 80 + 100 * (1 - Math.abs(2 * s - 1)), 255 * (1 - s)];
const hue = (s) => {
  const a = 2 * Math.PI * s;
  return [127 + 127 * Math.cos(a), 127 + 127 * Math.cos(a - 2.094), 127 + 127 * Math.cos(a + 2.094)];
};

let sim = null;
let running = false;

function draw() {
  const n = sim.cells();
  paint($("m-rho"), sim.rho(), n, heat);
  paint($("m-angle"), sim.angle().map((a) => (a + Math.PI) / (2 * Math.PI)), n, hue);
  $("m-msg").textContent = `t = ${sim.time().toFixed(4)}, mass = ${sim.mass().toFixed(12)}`;
}

function reset() {
  try {
    sim?.free();
    sim = new Simulation(num("m-cells") | 0, $("m-kind").value, num("s-c1"), num("s-c2"), num("s-c3"), num("s-c4"));
    draw();
  } catch (e) {
    sim = null;
    report("m-msg", e);
  }
}

function frame() {
  if (!running || !sim) return;
  try {
    sim.step(2);
    draw();
    requestAnimationFrame(frame);
  } catch (e) {
    running = false;
    $("m-run").textContent = "Run";
    report("m-msg", e);
  }
}

await init();
$("s-go").onclick = sweep;
$("r-go").onclick = relax;
$("m-reset").onclick = reset;
$("m-run").onclick = () => {
  running = !running;
  $("m-run").textContent = running ? "Pause" : "Run";
  if (running) requestAnimationFrame(frame);
};
sweep();
relax();
reset();
