// Parse trace files (JSON records, one per line) and the road-map file the
// server exposes, for top-down playback.

export interface AgentSnap {
  name: string;
  x: number;
  y: number;
  heading: number;
  speed: number;
  throttle: number;
  brake: number;
}

export interface Snapshot {
  t: number;
  agents: AgentSnap[];
}

export interface TraceEvent {
  t: number;
  kind: string;
  agent: string;
  detail: string;
}

export interface Termination {
  kind: string;
  t: number;
  index: number | null;
  agent: string | null;
}

export interface Trace {
  map: string;
  dt: number;
  snapshots: Snapshot[];
  events: TraceEvent[];
  termination: Termination;
  kinds: Map<string, string>; // agent name -> Car | Pedestrian (from scene order heuristics)
}

export function parseTrace(text: string): Trace {
  let map = "";
  let dt = 0.1;
  const snapshots: Snapshot[] = [];
  const events: TraceEvent[] = [];
  let termination: Termination | null = null;
  for (const line of text.split("\n")) {
    if (!line.trim()) continue;
    const rec = JSON.parse(line);
    switch (rec.record) {
      case "trace":
        map = rec.map;
        dt = rec.dt;
        break;
      case "snapshot":
        snapshots.push({
          t: rec.t,
          agents: (rec.agents as [string, number, number, number, number, number, number][])
            .map(([name, x, y, heading, speed, throttle, brake]) =>
              ({ name, x, y, heading, speed, throttle, brake })),
        });
        break;
      case "event":
        events.push({ t: rec.t, kind: rec.kind, agent: rec.agent, detail: rec.detail });
        break;
      case "termination":
        termination = { kind: rec.kind, t: rec.t, index: rec.index, agent: rec.agent };
        break;
    }
  }
  if (!termination || snapshots.length === 0) {
    throw new Error("not a trace file: missing termination or snapshots");
  }
  return { map, dt, snapshots, events, termination, kinds: new Map() };
}

export interface MapLane {
  id: string;
  width: number;
  centerline: [number, number][];
}

export interface RoadMap {
  name: string;
  lanes: MapLane[];
  intersections: [number, number][][];
}

/**
 * Parse the bundled `.map` YAML subset (the loader's full schema, but with
 * point lists written inline, which is how the fixtures are generated).
 */
export function parseMap(text: string): RoadMap {
  const lanes: MapLane[] = [];
  const intersections: [number, number][][] = [];
  let name = "";
  let current: Partial<MapLane> | null = null;
  let section = "";
  for (const raw of text.split("\n")) {
    const line = raw.replace(/\r$/, "");
    if (line.startsWith("name:")) name = line.slice(5).trim();
    else if (line.startsWith("lanes:")) section = "lanes";
    else if (line.startsWith("intersections:")) section = "intersections";
    else if (line.startsWith("regions:")) section = "regions";
    else if (section === "lanes" && line.trim().startsWith("- id:")) {
      current = { id: line.split("- id:")[1].trim() };
    } else if (section === "lanes" && current && line.trim().startsWith("width:")) {
      current.width = parseFloat(line.split("width:")[1]);
    } else if (section === "lanes" && current && line.trim().startsWith("centerline:")) {
      current.centerline = parsePointList(line.split("centerline:")[1]);
      lanes.push(current as MapLane);
      current = null;
    } else if (section === "intersections" && line.trim().startsWith("region:")) {
      intersections.push(parsePointList(line.split("region:")[1]));
    }
  }
  return { name, lanes, intersections };
}

function parsePointList(text: string): [number, number][] {
  const out: [number, number][] = [];
  const re = /\[\s*(-?[\d.]+)\s*,\s*(-?[\d.]+)\s*\]/g;
  let match;
  const inner = text.trim().replace(/^\[/, "").replace(/\]$/, "");
  while ((match = re.exec(inner)) !== null) {
    out.push([parseFloat(match[1]), parseFloat(match[2])]);
  }
  return out;
}
