import init, { cphase_curve, spdc_curve, tomography_round_trip } from "./pkg/coherence_wasm.js";

const $ = (id) => document.getElementById(id);

function rows(flat, stride) {
  const out = [];
  for (let i = 0; i < flat.length; i += stride) out.push(Array.from(flat.slice(i, i + stride)));
  return out;
}

function plot(canvas, xMax, series) {
  const ctx = canvas.getContext("2d");
  const w = canvas.width, h = canvas.height, pad = 40;
  const sx = (x) => pad + (x / xMax) * (w - 2 * pad);
  const sy = (y) => h - pad - y * (h - 2 * pad);
  ctx.clearRect(0, 0, w, h);
  ctx.strokeStyle = "#999";
  ctx.fillStyle = "#555";
  ctx.font = "12px sans-serif";
  ctx.beginPath();
  ctx.moveTo(pad, sy(1)); ctx.lineTo(pad, sy(0)); ctx.lineTo(w - pad, sy(0));
  ctx.stroke();
  for (const t of [0, 0.25, 0.5, 0.75, 1]) {
    ctx.fillText(t.toFixed(2), 4, sy(t) + 4);
    ctx.fillText((t * xMax).toFixed(xMax > 10 ? 0 : 2), sx(t * xMax) - 10, h - pad + 16);
  }
  for (const s of series) {
    ctx.strokeStyle = ctx.fillStyle = s.color;
    if (s.dots) {
      for (const [x, y] of s.points) {
        ctx.beginPath(); ctx.arc(sx(x), sy(y), 2.5, 0, 2 * Math.PI); ctx.fill();
      }
    } else {
      ctx.beginPath();
      s.points.forEach(([x, y], i) => (i ? ctx.lineTo(sx(x), sy(y)) : ctx.moveTo(sx(x), sy(y))));
      ctx.stroke();
    }
  }
}

function guarded(fn) {
  return () => {
    try { $("error").textContent = ""; fn(); }
    catch (e) { $("error").textContent = String(e.message ?? e); }
  };
}

const drawCphase = guarded(() => {
  const noise = Number($("cp-noise").value);
  $("cp-noise-v").textContent = noise.toFixed(2);
  const r = rows(cphase_curve($("cp-state").value, noise, 201), 5);
  plot($("cp-plot"), 1, [
    { color: "#1f77b4", points: r.map((q) => [q[0], q[1]]) },
    { color: "#d62728", points: r.map((q) => [q[0], q[2]]) },
    { color: "#2ca02c", points: r.map((q) => [q[0], q[3]]) },
    { color: "#9467bd", points: r.map((q) => [q[0], q[4] / (2 * Math.SQRT2)]) },
  ]);
});

const drawSpdc = guarded(() => {
  const fwhm = Number($("sp-fwhm").value), off = Number($("sp-offset").value), amp = Number($("sp-amp").value);
  $("sp-fwhm-v").textContent = fwhm;
  $("sp-offset-v").textContent = off.toFixed(3);
  $("sp-amp-v").textContent = amp.toFixed(3);
  const dense = rows(spdc_curve(fwhm, off, amp, 170, 171), 4);
  const bars = rows(spdc_curve(fwhm, off, amp, 170, 18), 4);
  plot($("sp-plot"), 170, [
    { color: "#ff7f0e", points: dense.map((q) => [q[0], q[1]]) },
    { color: "#1f77b4", points: dense.map((q) => [q[0], q[2]]) },
    { color: "#2ca02c", dots: true, points: bars.map((q) => [q[0], q[3]]) },
  ]);
});

const runTomography = guarded(() => {
  const [fid, t2, t2e, s2, s2e, it] = tomography_round_trip(Number($("tm-seed").value) >>> 0, Number($("tm-counts").value) >>> 0);
  $("tm-t2").textContent = t2.toFixed(4);
  $("tm-t2e").textContent = t2e.toFixed(4);
  $("tm-s2").textContent = s2.toFixed(4);
  $("tm-s2e").textContent = s2e.toFixed(4);
  $("tm-fid").textContent = fid.toFixed(5);
  $("tm-it").textContent = it;
});

await init();
$("cp-state").addEventListener("change", drawCphase);
$("cp-noise").addEventListener("input", drawCphase);
for (const id of ["sp-fwhm", "sp-offset", "sp-amp"]) $(id).addEventListener("input", drawSpdc);
$("tm-run").addEventListener("click", runTomography);
drawCphase();
drawSpdc();
runTomography();
