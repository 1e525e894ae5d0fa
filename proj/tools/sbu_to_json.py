#!/usr/bin/env python3
"""Convert SBU Kinect Interaction skeleton files to the tvsvm skeleton JSON.

The dataset ships one skeleton_pos.txt per recording, laid out as
<root>/<pair>/<action>/<take>/skeleton_pos.txt. Each line holds a frame
index followed by 15 joints x (x, y, z) for the first person and the same
for the second: 91 comma separated numbers. Both people are concatenated
into one 30-joint skeleton per frame; the action folder number is the label.
"""

import argparse
import json
import pathlib
import sys

JOINTS_PER_PERSON = 15
COLUMNS = 1 + 2 * JOINTS_PER_PERSON * 3


def read_recording(path):
    frames = []
    for lineno, line in enumerate(path.read_text().splitlines(), 1):
        if not line.strip():
            continue
        cells = [c for c in line.replace(" ", "").split(",") if c]
        if len(cells) != COLUMNS:
            raise ValueError(f"{path}:{lineno}: expected {COLUMNS} values, found {len(cells)}")
        values = [float(c) for c in cells[1:]]
        frames.append([values[3 * j:3 * j + 3] for j in range(2 * JOINTS_PER_PERSON)])
    if not frames:
        raise ValueError(f"{path}: no frames")
    return frames


def convert(root):
    videos = []
    for path in sorted(pathlib.Path(root).rglob("skeleton_pos.txt")):
        label = int(path.parent.parent.name)
        videos.append({"label": label, "frames": read_recording(path)})
    if not videos:
        raise ValueError(f"no skeleton_pos.txt found under {root}")
    return {"videos": videos}


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("root", help="directory containing the SBU recordings")
    parser.add_argument("--out", required=True, help="output JSON path")
    args = parser.parse_args(argv)
    try:
        doc = convert(args.root)
    except (OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 3
    pathlib.Path(args.out).write_text(json.dumps(doc) + "\n")
    print(f"wrote {len(doc['videos'])} videos to {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
