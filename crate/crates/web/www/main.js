import init, { Simulation, forecast } from "./pkg/rdesn_web.js";

const $ = (id) => document.getElementById(id);
const PRESETS = {
  1: { chi: 1.0, dc: 0.2, dv: 1.2, dh: 0.4 },
  2: { chi: 9.1, dc: 0.2, dv: 0.4, dh: 1.9 },
  3: { chi: 8.5, dc: 0.1, dv: 0.4, dh: 1.4 },
};

let sim = null;
let running = false;

function report(err) {
  $("status").textContent = err ? String(err) : "";
  $("status").className = err ? "err" : "";
}

function reset() {
  const v = Number($("version").value);
  Object.entries(PRESETS[v]).forEach(([k, val]) => ($(k).value = val));
  try {
    sim = new Simulation(v, Number($("n").value), BigInt($("seed").value));
    const c = $("slice");
    c.width = c.height = sim.size;
    report();
    draw();
  } catch (e) {
    report(e);
  }
}

function draw() {
  const n = sim.size;
  const z = Math.min(Number($("z").value), n - 1);
  try {
    const px = sim.sliceRgba($("field").value, z);
    $("slice").getContext("2d").putImageData(new ImageData(new Uint8ClampedArray(px), n, n), 0, 0);
    $("entropy").textContent = Array.from(sim.entropy(), (e) => e.toFixed(3)).join(" / ");
    $("status").textContent = `step ${sim.time}`;
  } catch (e) {
    report(e);
  }
}

function tick() {
  if (!running) return;
  try {
    sim.step(5);
    draw();
    requestAnimationFrame(tick);
  } catch (e) {
    running = false;
    report(e);
  }
}

function plot(truth, pred) {
  const c = $("plot");
  const g = c.getContext("2d");
  g.clearRect(0, 0, c.width, c.height);
  const all = [...truth, ...pred];
  const lo = Math.min(...all), hi = Math.max(...all);
  const sx = (i) => (i / Math.max(truth.length - 1, 1)) * (c.width - 20) + 10;
  const sy = (v) => c.height - 10 - ((v - lo) / (hi - lo || 1)) * (c.height - 20);
  for (const [series, colour] of [[truth, "#222"], [pred, "#d33"]]) {
    g.strokeStyle = colour;
    g.beginPath();
    series.forEach((v, i) => (i ? g.lineTo(sx(i), sy(v)) : g.moveTo(sx(i), sy(v))));
    g.stroke();
  }
}

await init();
$("reset").onclick = reset;
$("version").onchange = reset;
$("apply").onclick = () => {
  try {
    sim.setParameters(...["chi", "dc", "dv", "dh"].map((k) => Number($(k).value)));
    report();
  } catch (e) {
    report(e);
  }
};
$("field").onchange = draw;
$("z").onchange = draw;
$("run").onclick = () => {
  running = !running;
  if (running) tick();
};
$("lyap").onclick = () => {
  try {
    $("lyapval").textContent = sim.lyapunov(50).toExponential(3);
  } catch (e) {
    $("lyapval").textContent = String(e);
  }
};
$("forecast").onclick = () => {
  const [x, y, z] = $("fprobe").value.split(",").map(Number);
  $("fstats").textContent = "training...";
  setTimeout(() => {
    try {
      const f = forecast(
        Number($("version").value), Number($("fn").value), Number($("ftrain").value),
        Number($("froll").value), Number($("funits").value), BigInt($("seed").value),
        $("field").value, x, y, z,
      );
      plot(f.truth, f.pred);
      $("fstats").textContent =
        `fit NRMSE ${f.fitNrmse.toExponential(2)}, rollout NRMSE at probe ${f.nrmse.toExponential(2)} (black: simulation, red: ESN)`;
    } catch (e) {
      $("fstats").textContent = String(e);
    }
  }, 10);
};
reset();
