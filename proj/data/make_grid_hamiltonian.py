"""Writes ham.csv for grid_domain.json.

H = 1.05 pi (1 - r^2) + 0.1 b(r) (1 + cos(2 theta - 2 pi t)) on the unit disk,
with b = (1 - x^2)^6 supported on r in (0.05, 0.65), sampled on 65 x 32 nodes
at 8 periodic time nodes.
"""
import math

NR, NT, NTH = 65, 8, 32
R0, R1, AMP, C = 0.05, 0.65, 0.1, 1.05

with open("ham.csv", "w") as f:
    f.write("k,i,j,H\n")
    for k in range(NT):
        t = k / NT
        for i in range(NR):
            r = i / (NR - 1)
            x = (2 * r - R0 - R1) / (R1 - R0)
            bump = (1 - x * x) ** 6 if abs(x) < 1 else 0.0
            for j in range(NTH):
                th = 2 * math.pi * j / NTH
                h = C * math.pi * (1 - r * r) + AMP * bump * (1 + math.cos(2 * th - 2 * math.pi * t))
                f.write(f"{k},{i},{j},{h!r}\n")
