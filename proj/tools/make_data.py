"""Regenerates the synthetic files in data/ (deterministic)."""

import json
import math
import random
import struct
import sys
from pathlib import Path

MAJOR = [0, 2, 4, 5, 7, 9, 11]
PROGRESSIONS = [[0, 3, 4, 0], [0, 5, 3, 4], [0, 4, 5, 3], [5, 3, 0, 4]]


def triad(root_note, degree):
    notes = []
    for step in (0, 2, 4):
        d = degree + step
        notes.append(root_note + MAJOR[d % 7] + 12 * (d // 7))
    return notes


def piece(rng):
    key = rng.randrange(0, 12)
    base = 36 + key  # pitch index 0 is A0; 36 lands in the middle register
    prog = rng.choice(PROGRESSIONS)
    hold = rng.choice([2, 4])
    bars = rng.randrange(8, 20)
    frames = []
    for b in range(bars):
        chord = triad(base, prog[b % len(prog)])
        for t in range(4 * hold):
            melody = chord[(t // hold) % 3] + 12
            frame = set(chord)
            frame.add(melody)
            frames.append(sorted(p for p in frame if 0 <= p < 88))
    return frames


def pianoroll(path, count, seed):
    rng = random.Random(seed)
    path.write_text(json.dumps([piece(rng) for _ in range(count)], separators=(",", ":")) + "\n")


def tone(path, seconds=1.5, rate=16000):
    n = int(seconds * rate)
    samples = []
    for i in range(n):
        t = i / rate
        env = math.exp(-2.0 * (t % 0.5))
        v = 0.4 * env * (math.sin(2 * math.pi * 220 * t) + 0.5 * math.sin(2 * math.pi * 330 * t))
        samples.append(max(-32768, min(32767, int(round(v * 32767)))))
    data = struct.pack("<%dh" % n, *samples)
    header = b"RIFF" + struct.pack("<I", 36 + len(data)) + b"WAVE"
    header += b"fmt " + struct.pack("<IHHIIHH", 16, 1, 1, rate, rate * 2, 2, 16)
    header += b"data" + struct.pack("<I", len(data))
    path.write_bytes(header + data)


if __name__ == "__main__":
    out = Path(sys.argv[1] if len(sys.argv) > 1 else Path(__file__).resolve().parent.parent / "data")
    pianoroll(out / "pianoroll_tiny.json", 48, 7)
    tone(out / "tone.wav")
