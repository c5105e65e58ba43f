#!/usr/bin/env python3
"""Generate the bundled fixture maps.

Run from the repo root:  python3 scripts/make_maps.py
Writes src/scenloop/data/maps/{town_cross4,town_tee3,town_straight}.map

Geometry conventions: right-hand traffic, lane width 3.5 m, arms 100 m long,
intersection square of half-size 3.5 m centered at the origin. The south arm
is authored once and the other arms are 90-degree rotations of it.
"""

from __future__ import annotations

import math
from pathlib import Path

LANE_W = 4.5        # wide enough that adjacent-lane passes clear the 2 m car radii
HALF = LANE_W       # intersection square half-size
OFF = LANE_W / 2    # lane center offset from the road axis
ARM_LEN = 100.0
ARM_NAMES = ["S", "E", "N", "W"]  # rotation k * 90 deg CCW of the south arm


def rot(p, k):
    x, y = p
    for _ in range(k % 4):
        x, y = -y, x
    return round(x, 4), round(y, 4)


def rot_line(points, k):
    return [list(rot(p, k)) for p in points]


def arc(center, radius, theta0, theta1, steps):
    pts = []
    for i in range(steps + 1):
        t = theta0 + (theta1 - theta0) * i / steps
        pts.append((center[0] + radius * math.cos(t), center[1] + radius * math.sin(t)))
    return pts


# south arm base geometry (incoming lane travels +y)
S_IN = [(OFF, -HALF - ARM_LEN), (OFF, -HALF)]
S_OUT = [(-OFF, -HALF), (-OFF, -HALF - ARM_LEN)]
CONN_STRAIGHT = [(OFF, -HALF), (OFF, HALF)]
CONN_RIGHT = arc((HALF, -HALF), HALF - OFF, math.pi, math.pi / 2, 8)
CONN_LEFT = arc((-HALF, -HALF), HALF + OFF, 0.0, math.pi / 2, 12)

# maneuver exits, as arm-index offsets from the entry arm
TURNS = [("right", CONN_RIGHT, 1), ("straight", CONN_STRAIGHT, 2), ("left", CONN_LEFT, 3)]


def build_junction(name: str, arms: list[int]) -> dict:
    lanes = []
    maneuvers = []
    for k in arms:
        a = ARM_NAMES[k]
        lanes.append({"id": f"{a}_in", "width": LANE_W, "centerline": rot_line(S_IN, k)})
        lanes.append({"id": f"{a}_out", "width": LANE_W, "centerline": rot_line(S_OUT, k)})
        for _, conn, offset in TURNS:
            exit_k = (k + offset) % 4
            if exit_k not in arms:
                continue
            b = ARM_NAMES[exit_k]
            lanes.append({"id": f"c_{a}_{b}", "width": LANE_W,
                          "centerline": rot_line(conn, k)})
            maneuvers.append({"start": f"{a}_in", "connecting": f"c_{a}_{b}",
                              "end": f"{b}_out"})
    region = [[-HALF, -HALF], [HALF, -HALF], [HALF, HALF], [-HALF, HALF]]
    return {
        "format_version": 1,
        "name": name,
        "lanes": sorted(lanes, key=lambda l: l["id"]),
        "intersections": [{"id": "I0", "region": region, "maneuvers": maneuvers}],
    }


def build_straight(name: str) -> dict:
    length = 300.0
    shoulder_w = 4.0
    shoulder_y = -(OFF + LANE_W / 2 + shoulder_w / 2)
    lanes = [
        {"id": "fast", "width": LANE_W, "centerline": [[0.0, OFF], [length, OFF]]},
        {"id": "slow", "width": LANE_W, "centerline": [[0.0, -OFF], [length, -OFF]]},
        {"id": "shoulder", "width": shoulder_w,
         "centerline": [[0.0, shoulder_y], [length, shoulder_y]]},
    ]
    return {"format_version": 1, "name": name, "lanes": lanes, "intersections": []}


def dump(doc: dict) -> str:
    # hand-rolled emitter: yaml.dump wraps point lists unreadably
    out = [f"format_version: {doc['format_version']}", f"name: {doc['name']}", "lanes:"]
    for lane in doc["lanes"]:
        out.append(f"  - id: {lane['id']}")
        out.append(f"    width: {lane['width']}")
        pts = ", ".join(f"[{p[0]}, {p[1]}]" for p in lane["centerline"])
        out.append(f"    centerline: [{pts}]")
    if doc["intersections"]:
        out.append("intersections:")
        for inter in doc["intersections"]:
            out.append(f"  - id: {inter['id']}")
            pts = ", ".join(f"[{p[0]}, {p[1]}]" for p in inter["region"])
            out.append(f"    region: [{pts}]")
            out.append("    maneuvers:")
            for m in inter["maneuvers"]:
                out.append(f"      - {{start: {m['start']}, "
                           f"connecting: {m['connecting']}, end: {m['end']}}}")
    return "\n".join(out) + "\n"


def main() -> None:
    out_dir = Path(__file__).resolve().parents[1] / "src" / "scenloop" / "data" / "maps"
    out_dir.mkdir(parents=True, exist_ok=True)
    docs = {
        "town_cross4": build_junction("town_cross4", [0, 1, 2, 3]),
        "town_tee3": build_junction("town_tee3", [0, 1, 3]),
        "town_straight": build_straight("town_straight"),
    }
    for name, doc in docs.items():
        path = out_dir / f"{name}.map"
        path.write_text(dump(doc), "utf-8")
        print(f"wrote {path}")


if __name__ == "__main__":
    main()
