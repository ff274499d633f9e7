/**
 * Figure renderers: log10-error heatmaps with the boundary overlaid, and
 * log-log / semilog error curves. All rendering is deterministic: layout
 * and colors depend only on the CSV contents (and the optional shape
 * recorded in the CSV's metadata sidecar).
 */

import * as fs from "node:fs";

import { ContractError, PlotKind, Table, column, errorColumns, numericColumn, readCsv, validate } from "./csv.js";
import { encodePng } from "./png.js";
import { LINE_COLORS, RGB, Raster, colormap } from "./raster.js";

export interface PlotJob {
  kind: PlotKind;
  input: string;
  output: string;
  title?: string;
  method?: string; // heatmap: which err_<method> column to color
}

const BLACK: RGB = [0, 0, 0];
const GREY: RGB = [200, 200, 200];
const LOG_FLOOR = 1e-17;
const HEAT_LO = -16; // log10 clamp range of the error heatmap
const HEAT_HI = 0;

// ---------------------------------------------------------------------------
// Boundary outlines from the metadata sidecar's shape string
// ---------------------------------------------------------------------------
function boundaryOutline(csvPath: string): Array<[number, number]> | null {
  const metaPath = csvPath + ".meta.json";
  if (!fs.existsSync(metaPath)) return null;
  let shape: string;
  try {
    shape = JSON.parse(fs.readFileSync(metaPath, "utf-8")).shape ?? "";
  } catch {
    return null;
  }
  const [name, arg] = shape.split(":");
  const pts: Array<[number, number]> = [];
  const push = (f: (t: number) => [number, number]) => {
    for (let i = 0; i <= 512; i++) {
      pts.push(f((2 * Math.PI * i) / 512));
    }
  };
  switch (name) {
    case "kite":
      push((t) => [Math.cos(t) + 0.65 * Math.cos(2 * t) - 0.65, 1.5 * Math.sin(t)]);
      break;
    case "star":
      push((t) => {
        const r = 1.55 + 0.4 * Math.cos(5 * t);
        return [r * Math.cos(t), r * Math.sin(t)];
      });
      break;
    case "circle":
    case "sphere": {
      const r = arg ? Number(arg) : 1.0;
      push((t) => [r * Math.cos(t), r * Math.sin(t)]);
      break;
    }
    case "fourier": {
      const body = (arg ?? "").replace(/^\[|\]$/g, "");
      const [cosPart, sinPart] = body.split(";");
      const a = (cosPart ?? "").split(",").filter((s) => s.length).map(Number);
      const b = (sinPart ?? "").split(",").filter((s) => s.length).map(Number);
      push((t) => {
        let r = 0;
        a.forEach((c, j) => (r += c * Math.cos(j * t)));
        b.forEach((c, j) => (r += c * Math.sin((j + 1) * t)));
        return [r * Math.cos(t), r * Math.sin(t)];
      });
      break;
    }
    default:
      return null;
  }
  return pts;
}

// ---------------------------------------------------------------------------
// Axis helpers
// ---------------------------------------------------------------------------
function decadeTicks(lo: number, hi: number): number[] {
  const ticks: number[] = [];
  for (let e = Math.ceil(lo); e <= Math.floor(hi); e++) ticks.push(e);
  // thin to at most 9 labels, keeping the ends
  const step = Math.max(1, Math.ceil(ticks.length / 9));
  return ticks.filter((_, i) => i % step === 0 || i === ticks.length - 1);
}

function fmtExp(e: number): string {
  return `1e${e}`;
}

function fmtNum(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 0.01 && a < 10000) {
    const s = v.toFixed(2);
    return s.replace(/\.?0+$/, "");
  }
  return v.toExponential(1).replace("e+", "e");
}

interface Frame {
  left: number;
  top: number;
  w: number;
  h: number;
}

function drawFrame(r: Raster, f: Frame): void {
  r.line(f.left, f.top, f.left + f.w, f.top, BLACK);
  r.line(f.left, f.top + f.h, f.left + f.w, f.top + f.h, BLACK);
  r.line(f.left, f.top, f.left, f.top + f.h, BLACK);
  r.line(f.left + f.w, f.top, f.left + f.w, f.top + f.h, BLACK);
}

// ---------------------------------------------------------------------------
// Line charts (log-log scan / ksweep, semilog identity table)
// ---------------------------------------------------------------------------
interface Series {
  label: string;
  x: number[];
  y: number[];
}

function lineChart(
  series: Series[],
  opts: { title: string; xlabel: string; ylabel: string; xlog: boolean; out: string },
): void {
  const W = 640;
  const H = 480;
  const f: Frame = { left: 64, top: 28, w: W - 88, h: H - 80 };
  const img = new Raster(W, H);

  const xs = series.flatMap((s) => s.x).map((v) => (opts.xlog ? Math.log10(Math.max(v, LOG_FLOOR)) : v));
  const ys = series.flatMap((s) => s.y).map((v) => Math.log10(Math.max(v, LOG_FLOOR)));
  let xlo = Math.min(...xs);
  let xhi = Math.max(...xs);
  let ylo = Math.floor(Math.min(...ys));
  let yhi = Math.ceil(Math.max(...ys));
  if (xhi - xlo < 1e-12) {
    xlo -= 0.5;
    xhi += 0.5;
  }
  if (yhi - ylo < 1) yhi = ylo + 1;

  const px = (x: number) => f.left + ((x - xlo) / (xhi - xlo)) * f.w;
  const py = (y: number) => f.top + f.h - ((y - ylo) / (yhi - ylo)) * f.h;

  // gridlines and labels
  for (const e of decadeTicks(ylo, yhi)) {
    const y = py(e);
    img.line(f.left, y, f.left + f.w, y, GREY);
    img.text(f.left - img.textWidth(fmtExp(e)) - 4, y - 3, fmtExp(e), BLACK);
  }
  const xticks = opts.xlog ? decadeTicks(xlo, xhi) : series[0].x;
  for (const t of xticks) {
    const x = px(t);
    img.line(x, f.top, x, f.top + f.h, GREY);
    const label = opts.xlog ? fmtExp(t) : fmtNum(t);
    img.text(x - img.textWidth(label) / 2, f.top + f.h + 6, label, BLACK);
  }
  drawFrame(img, f);

  series.forEach((s, si) => {
    const c = LINE_COLORS[si % LINE_COLORS.length];
    let prev: [number, number] | null = null;
    for (let i = 0; i < s.x.length; i++) {
      const x = px(opts.xlog ? Math.log10(Math.max(s.x[i], LOG_FLOOR)) : s.x[i]);
      const y = py(Math.log10(Math.max(s.y[i], LOG_FLOOR)));
      img.marker(x, y, c);
      if (prev) img.line(prev[0], prev[1], x, y, c);
      prev = [x, y];
    }
    const lx = f.left + f.w - 150;
    const ly = f.top + 8 + 12 * si;
    img.line(lx, ly + 3, lx + 18, ly + 3, c);
    img.text(lx + 24, ly, s.label, BLACK);
  });

  img.text(f.left, 8, opts.title, BLACK);
  img.text(f.left + f.w - img.textWidth(opts.xlabel), H - 14, opts.xlabel, BLACK);
  img.text(8, f.top - 14 < 8 ? 8 : f.top - 14, opts.ylabel, BLACK);
  fs.writeFileSync(opts.out, encodePng(W, H, img.data));
}

// ---------------------------------------------------------------------------
// Heatmap
// ---------------------------------------------------------------------------
function heatmap(job: PlotJob, t: Table): void {
  const x1 = numericColumn(t, "x1");
  const x2 = numericColumn(t, "x2");
  const errs = errorColumns(t, "err_");
  const chosen = job.method
    ? errs.find((e) => e.method === job.method)
    : errs[0];
  if (!chosen) {
    throw new ContractError(`${t.path}: missing required column 'err_${job.method}'`);
  }

  const ux = [...new Set(x1)].sort((a, b) => a - b);
  const uy = [...new Set(x2)].sort((a, b) => a - b);
  const minStep = (vals: number[]) => {
    let m = Infinity;
    for (let i = 1; i < vals.length; i++) m = Math.min(m, vals[i] - vals[i - 1]);
    return Number.isFinite(m) ? m : 1.0;
  };
  const dx = minStep(ux);
  const dy = minStep(uy);
  const xlo = ux[0] - dx / 2;
  const xhi = ux[ux.length - 1] + dx / 2;
  const ylo = uy[0] - dy / 2;
  const yhi = uy[uy.length - 1] + dy / 2;

  const side = 520;
  const f: Frame = { left: 56, top: 28, w: side, h: side };
  const W = f.left + side + 84;
  const H = f.top + side + 52;
  const img = new Raster(W, H, [235, 235, 235]);
  img.fillRect(f.left, f.top, f.w, f.h, [255, 255, 255]);

  const px = (x: number) => f.left + ((x - xlo) / (xhi - xlo)) * f.w;
  const py = (y: number) => f.top + f.h - ((y - ylo) / (yhi - ylo)) * f.h;
  const cw = Math.max(1, Math.ceil((dx / (xhi - xlo)) * f.w));
  const ch = Math.max(1, Math.ceil((dy / (yhi - ylo)) * f.h));

  for (let i = 0; i < x1.length; i++) {
    const v = Math.log10(Math.max(chosen.values[i], LOG_FLOOR));
    const norm = (Math.min(HEAT_HI, Math.max(HEAT_LO, v)) - HEAT_LO) / (HEAT_HI - HEAT_LO);
    img.fillRect(
      Math.round(px(x1[i] - dx / 2)),
      Math.round(py(x2[i] + dy / 2)),
      cw,
      ch,
      colormap(norm),
    );
  }

  const outline = boundaryOutline(t.path);
  if (outline) {
    let prev: [number, number] | null = null;
    for (const [bx, by] of outline) {
      const q: [number, number] = [px(bx), py(by)];
      if (
        prev &&
        q[0] >= f.left &&
        q[0] <= f.left + f.w &&
        q[1] >= f.top &&
        q[1] <= f.top + f.h
      ) {
        img.line(prev[0], prev[1], q[0], q[1], BLACK);
      }
      prev = q;
    }
  }
  drawFrame(img, f);

  // axis labels at the corners
  img.text(f.left, f.top + f.h + 6, fmtNum(xlo), BLACK);
  img.text(f.left + f.w - img.textWidth(fmtNum(xhi)), f.top + f.h + 6, fmtNum(xhi), BLACK);
  img.text(f.left - img.textWidth(fmtNum(ylo)) - 4, f.top + f.h - 7, fmtNum(ylo), BLACK);
  img.text(f.left - img.textWidth(fmtNum(yhi)) - 4, f.top, fmtNum(yhi), BLACK);

  // colorbar
  const cb: Frame = { left: f.left + f.w + 16, top: f.top, w: 18, h: f.h };
  for (let y = 0; y < cb.h; y++) {
    const v = 1 - y / cb.h;
    img.fillRect(cb.left, cb.top + y, cb.w, 1, colormap(v));
  }
  drawFrame(img, cb);
  for (const e of [-16, -12, -8, -4, 0]) {
    const y = cb.top + cb.h - ((e - HEAT_LO) / (HEAT_HI - HEAT_LO)) * cb.h;
    img.text(cb.left + cb.w + 4, y - 3, `${e}`, BLACK);
  }

  img.text(f.left, 8, job.title ?? `log10 err_${chosen.method}`, BLACK);
  fs.writeFileSync(job.output, encodePng(W, H, img.data));
}

// ---------------------------------------------------------------------------
// Entry point
// ---------------------------------------------------------------------------
export function render(job: PlotJob): void {
  const t = readCsv(job.input);
  validate(job.kind, t);
  if (job.kind === "heatmap") {
    heatmap(job, t);
    return;
  }
  if (job.kind === "loglog-scan") {
    const ell = numericColumn(t, "ell");
    const series = errorColumns(t, "err_").map((e) => ({
      label: e.method,
      x: ell,
      y: e.values,
    }));
    lineChart(series, {
      title: job.title ?? "error along the normal",
      xlabel: "ell",
      ylabel: "err",
      xlog: true,
      out: job.output,
    });
    return;
  }
  if (job.kind === "loglog-ksweep") {
    const k = numericColumn(t, "k");
    const series = errorColumns(t, "maxerr_").map((e) => ({
      label: e.method,
      x: k,
      y: e.values,
    }));
    lineChart(series, {
      title: job.title ?? "max error vs wavenumber",
      xlabel: "k",
      ylabel: "max err",
      xlog: true,
      out: job.output,
    });
    return;
  }
  // identity-table: one semilog line per (case, region)
  const cases = column(t, "case");
  const regions = column(t, "region");
  const Ns = numericColumn(t, "N");
  const res = numericColumn(t, "residual");
  const keys = [...new Set(cases.map((c, i) => `${c} ${regions[i]}`))];
  const series = keys.map((key) => {
    const x: number[] = [];
    const y: number[] = [];
    for (let i = 0; i < cases.length; i++) {
      if (`${cases[i]} ${regions[i]}` === key) {
        x.push(Ns[i]);
        y.push(res[i]);
      }
    }
    return { label: key, x, y };
  });
  lineChart(series, {
    title: job.title ?? "identity residuals",
    xlabel: "n",
    ylabel: "residual",
    xlog: false,
    out: job.output,
  });
}
