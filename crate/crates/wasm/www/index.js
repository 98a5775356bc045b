import init, { sampleCloud, depthContours, contaminateCloud, depthAt } from "./pkg/depthlab_wasm.js";

const canvas = document.getElementById("plot");
const ctx = canvas.getContext("2d");
const status = document.getElementById("status");
const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

let points = [];
let contours = null;
let view = { cx: 0, cy: 0, scale: 1 };

function fitView() {
  const xs = points.map((p) => p[0]).sort((a, b) => a - b);
  const ys = points.map((p) => p[1]).sort((a, b) => a - b);
  // central 98% so a few far points do not squash the picture
  const lo = Math.floor(0.01 * (xs.length - 1));
  const hi = Math.ceil(0.99 * (xs.length - 1));
  const w = Math.max(xs[hi] - xs[lo], ys[hi] - ys[lo], 1e-9);
  view = { cx: (xs[hi] + xs[lo]) / 2, cy: (ys[hi] + ys[lo]) / 2, scale: (0.8 * canvas.width) / w };
}

const toScreen = ([x, y]) => [
  canvas.width / 2 + (x - view.cx) * view.scale,
  canvas.height / 2 - (y - view.cy) * view.scale,
];
const fromScreen = (sx, sy) => [
  view.cx + (sx - canvas.width / 2) / view.scale,
  view.cy - (sy - canvas.height / 2) / view.scale,
];

function drawRegion(region, fill) {
  const vs = region.vertices.map(toScreen);
  if (vs.length === 0) return;
  ctx.beginPath();
  if (vs.length === 1) {
    ctx.arc(vs[0][0], vs[0][1], 3, 0, 2 * Math.PI);
  } else {
    ctx.moveTo(vs[0][0], vs[0][1]);
    for (const [x, y] of vs.slice(1)) ctx.lineTo(x, y);
    ctx.closePath();
  }
  ctx.fillStyle = fill;
  ctx.fill();
  ctx.strokeStyle = "#345";
  ctx.lineWidth = 1;
  ctx.stroke();
}

function render(marker) {
  ctx.fillStyle = "#fff";
  ctx.fillRect(0, 0, canvas.width, canvas.height);
  if (contours) {
    const regions = contours.regions;
    regions.forEach((r, i) => {
      // deeper regions are lighter
      const t = regions.length > 1 ? i / (regions.length - 1) : 1;
      const light = Math.round(35 + 55 * t);
      drawRegion(r.region, `hsl(210, 45%, ${light}%)`);
    });
    const [mx, my] = toScreen(contours.median);
    ctx.fillStyle = "#c00";
    ctx.fillRect(mx - 4, my - 4, 8, 8);
  }
  ctx.fillStyle = "#111";
  for (const p of points) {
    const [x, y] = toScreen(p);
    ctx.fillRect(x - 1.5, y - 1.5, 3, 3);
  }
  if (marker) {
    ctx.strokeStyle = "#e60";
    ctx.lineWidth = 2;
    ctx.beginPath();
    ctx.arc(marker[0], marker[1], 6, 0, 2 * Math.PI);
    ctx.stroke();
  }
}

function refresh() {
  const started = performance.now();
  contours = JSON.parse(depthContours(JSON.stringify(points), num("levels")));
  const ms = (performance.now() - started).toFixed(0);
  const [mx, my] = contours.median;
  status.textContent =
    `n=${contours.n}, max depth ${contours.max_depth}/${contours.n}, ` +
    `median (${mx.toFixed(3)}, ${my.toFixed(3)}), ${ms} ms`;
  render();
}

function guarded(f) {
  return (...args) => {
    try {
      f(...args);
    } catch (e) {
      status.textContent = `error: ${e.message ?? e}`;
    }
  };
}

$("draw").addEventListener("click", guarded(() => {
  points = JSON.parse(sampleCloud($("radial").value, num("n"), num("seed"), num("rho"), num("nu")));
  fitView();
  refresh();
}));

$("attack").addEventListener("click", guarded(() => {
  const angle = (num("angle") * Math.PI) / 180;
  points = JSON.parse(contaminateCloud(JSON.stringify(points), num("eps"), angle, num("radius"), num("seed")));
  refresh();
}));

$("levels").addEventListener("change", guarded(refresh));

canvas.addEventListener("click", guarded((ev) => {
  if (points.length === 0) return;
  const rect = canvas.getBoundingClientRect();
  const sx = ev.clientX - rect.left;
  const sy = ev.clientY - rect.top;
  const [x, y] = fromScreen(sx, sy);
  const d = JSON.parse(depthAt(JSON.stringify(points), x, y));
  render([sx, sy]);
  status.textContent = `depth at (${x.toFixed(3)}, ${y.toFixed(3)}) = ${d.count}/${d.n} = ${d.depth.toFixed(4)}`;
}));

await init();
$("draw").click();
