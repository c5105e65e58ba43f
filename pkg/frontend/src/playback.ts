// Top-down playback: a pure function from (trace, time) to draw commands,
// then a thin canvas painter. Keeping the geometry pure makes scrubbing
// deterministic and testable without a real canvas.

import type { RoadMap, Snapshot, Trace } from "./trace.js";

export interface PlaybackModel {
  trace: Trace;
  playhead: number; // seconds, clamped to [0, duration]
  speed: number; // playback speed multiplier
  playing: boolean;
}

export function newPlayback(trace: Trace): PlaybackModel {
  return { trace, playhead: 0, speed: 1, playing: false };
}

export function duration(model: PlaybackModel): number {
  return model.trace.termination.t;
}

export function setPlayhead(model: PlaybackModel, t: number): PlaybackModel {
  const clamped = Math.min(Math.max(t, 0), duration(model));
  return { ...model, playhead: clamped };
}

export function advance(model: PlaybackModel, dt: number): PlaybackModel {
  const next = setPlayhead(model, model.playhead + dt * model.speed);
  if (next.playhead >= duration(model)) return { ...next, playing: false };
  return next;
}

/**
 * The interpolated world state at the playhead: linear between the two
 * nearest snapshots, exactly the last snapshot at (or beyond) the end.
 */
export function frameAt(trace: Trace, t: number): Snapshot {
  const snaps = trace.snapshots;
  const last = snaps[snaps.length - 1];
  if (t >= last.t) return last;
  if (t <= snaps[0].t) return snaps[0];
  let hi = 1;
  while (snaps[hi].t < t) hi++;
  const a = snaps[hi - 1];
  const b = snaps[hi];
  const span = b.t - a.t;
  const alpha = span > 0 ? (t - a.t) / span : 0;
  return {
    t,
    agents: a.agents.map((agentA, i) => {
      const agentB = b.agents[i];
      return {
        name: agentA.name,
        x: agentA.x + alpha * (agentB.x - agentA.x),
        y: agentA.y + alpha * (agentB.y - agentA.y),
        heading: interpolateAngle(agentA.heading, agentB.heading, alpha),
        speed: agentA.speed + alpha * (agentB.speed - agentA.speed),
        throttle: agentB.throttle,
        brake: agentB.brake,
      };
    }),
  };
}

function interpolateAngle(a: number, b: number, alpha: number): number {
  let delta = b - a;
  while (delta > Math.PI) delta -= 2 * Math.PI;
  while (delta < -Math.PI) delta += 2 * Math.PI;
  return a + alpha * delta;
}

export type DrawCmd =
  | { kind: "polyline"; points: [number, number][]; width: number; color: string }
  | { kind: "polygon"; points: [number, number][]; fill: string }
  | { kind: "box"; x: number; y: number; heading: number; length: number;
      width: number; color: string; label: string }
  | { kind: "dot"; x: number; y: number; r: number; color: string; label: string }
  | { kind: "marker"; x: number; y: number; color: string }
  | { kind: "caption"; text: string };

const EGO_COLOR = "#3da5ff";
const CAR_COLOR = "#e0a030";
const PED_COLOR = "#7ae07a";

/** Pure scene geometry for (trace, map, time). */
export function renderFrame(trace: Trace, map: RoadMap | null, t: number): DrawCmd[] {
  const cmds: DrawCmd[] = [];
  if (map) {
    for (const lane of map.lanes) {
      cmds.push({ kind: "polyline", points: lane.centerline, width: lane.width,
                  color: "#2e3440" });
    }
    for (const ring of map.intersections) {
      cmds.push({ kind: "polygon", points: ring, fill: "#2e3440" });
    }
    for (const lane of map.lanes) {
      cmds.push({ kind: "polyline", points: lane.centerline, width: 0.15,
                  color: "#5b6578" });
    }
  }
  const frame = frameAt(trace, t);
  for (const agent of frame.agents) {
    const isPed = agent.name.toLowerCase().includes("ped");
    if (isPed) {
      cmds.push({ kind: "dot", x: agent.x, y: agent.y, r: 0.6, color: PED_COLOR,
                  label: agent.name });
    } else {
      cmds.push({
        kind: "box", x: agent.x, y: agent.y, heading: agent.heading,
        length: 4.2, width: 1.9,
        color: agent.name === "ego" ? EGO_COLOR : CAR_COLOR,
        label: agent.name,
      });
    }
  }
  for (const event of trace.events) {
    if (event.kind === "collision" && event.t <= t) {
      const at = frameAt(trace, event.t).agents.find((a) => a.name === event.agent);
      if (at) cmds.push({ kind: "marker", x: at.x, y: at.y, color: "#ff5555" });
    }
  }
  if (t >= trace.termination.t) {
    cmds.push({ kind: "caption", text: terminationCaption(trace) });
  }
  return cmds;
}

export function terminationCaption(trace: Trace): string {
  const term = trace.termination;
  switch (term.kind) {
    case "TerminateStatement":
      return `terminated by ${term.agent ?? "a behavior"} at ${term.t.toFixed(1)}s`;
    case "TerminateWhen":
      return `termination condition ${term.index} held at ${term.t.toFixed(1)}s`;
    case "Collision":
      return `collision at ${term.t.toFixed(1)}s`;
    default:
      return `time limit reached at ${term.t.toFixed(1)}s`;
  }
}

export interface Viewport {
  scale: number; // pixels per meter
  cx: number; // world center x
  cy: number; // world center y
  width: number;
  height: number;
}

export function fitViewport(trace: Trace, width: number, height: number): Viewport {
  let minX = Infinity;
  let maxX = -Infinity;
  let minY = Infinity;
  let maxY = -Infinity;
  for (const snap of trace.snapshots) {
    for (const agent of snap.agents) {
      minX = Math.min(minX, agent.x);
      maxX = Math.max(maxX, agent.x);
      minY = Math.min(minY, agent.y);
      maxY = Math.max(maxY, agent.y);
    }
  }
  const margin = 20;
  const spanX = maxX - minX + 2 * margin;
  const spanY = maxY - minY + 2 * margin;
  const scale = Math.min(width / spanX, height / spanY);
  return { scale, cx: (minX + maxX) / 2, cy: (minY + maxY) / 2, width, height };
}

function toPixel(v: Viewport, x: number, y: number): [number, number] {
  // world +y is up; canvas +y is down
  return [v.width / 2 + (x - v.cx) * v.scale, v.height / 2 - (y - v.cy) * v.scale];
}

/** Paint draw commands onto a 2D canvas context. */
export function drawToCanvas(cmds: DrawCmd[], ctx: CanvasRenderingContext2D,
                             v: Viewport): void {
  ctx.clearRect(0, 0, v.width, v.height);
  ctx.fillStyle = "#1b1f2a";
  ctx.fillRect(0, 0, v.width, v.height);
  for (const cmd of cmds) {
    switch (cmd.kind) {
      case "polyline": {
        ctx.strokeStyle = cmd.color;
        ctx.lineWidth = Math.max(1, cmd.width * v.scale);
        ctx.beginPath();
        cmd.points.forEach(([x, y], i) => {
          const [px, py] = toPixel(v, x, y);
          if (i === 0) ctx.moveTo(px, py);
          else ctx.lineTo(px, py);
        });
        ctx.stroke();
        break;
      }
      case "polygon": {
        ctx.fillStyle = cmd.fill;
        ctx.beginPath();
        cmd.points.forEach(([x, y], i) => {
          const [px, py] = toPixel(v, x, y);
          if (i === 0) ctx.moveTo(px, py);
          else ctx.lineTo(px, py);
        });
        ctx.closePath();
        ctx.fill();
        break;
      }
      case "box": {
        const [px, py] = toPixel(v, cmd.x, cmd.y);
        ctx.save();
        ctx.translate(px, py);
        ctx.rotate(-cmd.heading);
        ctx.fillStyle = cmd.color;
        ctx.fillRect(-cmd.length * v.scale / 2, -cmd.width * v.scale / 2,
                     cmd.length * v.scale, cmd.width * v.scale);
        ctx.restore();
        ctx.fillStyle = "#dde3ee";
        ctx.font = "11px sans-serif";
        ctx.fillText(cmd.label, px + 6, py - 6);
        break;
      }
      case "dot": {
        const [px, py] = toPixel(v, cmd.x, cmd.y);
        ctx.fillStyle = cmd.color;
        ctx.beginPath();
        ctx.arc(px, py, Math.max(2, cmd.r * v.scale), 0, 2 * Math.PI);
        ctx.fill();
        ctx.fillStyle = "#dde3ee";
        ctx.font = "11px sans-serif";
        ctx.fillText(cmd.label, px + 6, py - 6);
        break;
      }
      case "marker": {
        const [px, py] = toPixel(v, cmd.x, cmd.y);
        ctx.strokeStyle = cmd.color;
        ctx.lineWidth = 2;
        ctx.beginPath();
        ctx.moveTo(px - 7, py - 7);
        ctx.lineTo(px + 7, py + 7);
        ctx.moveTo(px + 7, py - 7);
        ctx.lineTo(px - 7, py + 7);
        ctx.stroke();
        break;
      }
      case "caption": {
        ctx.fillStyle = "#ffd479";
        ctx.font = "13px sans-serif";
        ctx.fillText(cmd.text, 12, v.height - 12);
        break;
      }
    }
  }
}
