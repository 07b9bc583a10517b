import init, { cantor_disks, warped_grid, lp_mass_curve } from "./pkg/cantor_qc_web.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);
const construction = () => [num("t"), num("k"), num("m")];

// World square [-1.15, 1.15]^2 onto the canvas.
function frame(canvas) {
  const ctx = canvas.getContext("2d");
  const s = canvas.width / 2.3;
  ctx.setTransform(s, 0, 0, -s, canvas.width / 2, canvas.height / 2);
  ctx.clearRect(-2, -2, 4, 4);
  ctx.lineWidth = 1 / s;
  ctx.strokeStyle = "#999";
  ctx.beginPath();
  ctx.arc(0, 0, 1, 0, 2 * Math.PI);
  ctx.stroke();
  return ctx;
}

function report(f) {
  try {
    $("status").textContent = "";
    f();
  } catch (e) {
    $("status").textContent = String(e);
  }
}

function drawDisks() {
  const doc = JSON.parse(cantor_disks(...construction(), num("n")));
  for (const side of ["source", "image"]) {
    const ctx = frame($(side));
    ctx.fillStyle = side === "source" ? "#2a6fb0" : "#b0502a";
    for (const [x, y, r] of doc.disks[side]) {
      ctx.beginPath();
      ctx.arc(x, y, r, 0, 2 * Math.PI);
      ctx.fill();
    }
  }
  $("params").textContent = JSON.stringify(doc.params, null, 2);
}

function drawGrid() {
  const lines = num("lines");
  const doc = JSON.parse(warped_grid(...construction(), lines, num("samples"), 40));
  const straight = frame($("source"));
  const warped = frame($("image"));
  for (const ctx of [straight, warped]) ctx.strokeStyle = "#333";
  for (let i = 0; i < lines; i++) {
    const c = -1.1 + (2.2 * i) / (lines - 1);
    straight.beginPath();
    straight.moveTo(-1.1, c);
    straight.lineTo(1.1, c);
    straight.moveTo(c, -1.1);
    straight.lineTo(c, 1.1);
    straight.stroke();
  }
  for (const line of doc.polylines) {
    warped.beginPath();
    line.forEach(([x, y], j) => (j ? warped.lineTo(x, y) : warped.moveTo(x, y)));
    warped.stroke();
  }
}

function drawCurve() {
  const doc = JSON.parse(lp_mass_curve(...construction(), num("pmin"), num("pmax"), 400));
  const canvas = $("curve");
  const ctx = canvas.getContext("2d");
  const [w, h, pad] = [canvas.width, canvas.height, 30];
  ctx.clearRect(0, 0, w, h);
  const ps = doc.points.map((q) => q.p);
  const rs = doc.points.map((q) => q.ratio);
  const [x0, x1] = [Math.min(...ps), Math.max(...ps)];
  const [y0, y1] = [Math.min(0, ...rs), Math.max(1.2, ...rs.filter(Number.isFinite))];
  const X = (p) => pad + ((w - 2 * pad) * (p - x0)) / (x1 - x0 || 1);
  const Y = (r) => h - pad - ((h - 2 * pad) * (r - y0)) / (y1 - y0 || 1);
  ctx.strokeStyle = "#aaa";
  ctx.beginPath();
  ctx.moveTo(X(x0), Y(1));
  ctx.lineTo(X(x1), Y(1));
  ctx.stroke();
  if (doc.critical !== null && doc.critical >= x0 && doc.critical <= x1) {
    ctx.setLineDash([4, 4]);
    ctx.beginPath();
    ctx.moveTo(X(doc.critical), pad);
    ctx.lineTo(X(doc.critical), h - pad);
    ctx.stroke();
    ctx.setLineDash([]);
  }
  ctx.strokeStyle = "#2a6fb0";
  ctx.beginPath();
  doc.points.forEach((q, j) => (j ? ctx.lineTo(X(q.p), Y(q.ratio)) : ctx.moveTo(X(q.p), Y(q.ratio))));
  ctx.stroke();
  ctx.fillStyle = "#222";
  ctx.fillText(`p = ${x0}`, pad, h - 8);
  ctx.fillText(`p = ${x1}`, w - pad - 40, h - 8);
  ctx.fillText("ratio = 1", 4, Y(1) - 4);
}

await init();
$("draw-disks").onclick = () => report(drawDisks);
$("draw-grid").onclick = () => report(drawGrid);
$("draw-curve").onclick = () => report(drawCurve);
report(drawDisks);
report(drawCurve);
