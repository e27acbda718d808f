"""Regenerate the shipped benchmark problem files.

Geometry follows the classic literature layouts (10-bar: 360 in bays,
72-bar: 120 in square plan with 60 in stories), converted to metres.

    python tools/make_benchmarks.py
"""

import json
import shutil
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
DATA = ROOT / "src" / "trussmcts" / "data"
DOCS = ROOT / "docs" / "benchmarks"

INCH = 0.0254

TEN_BAR_CASE1 = [
    1045.16, 1161.29, 1283.87, 1374.19, 1535.48, 1690.32, 1696.77, 1858.06, 1890.32,
    1993.54, 2019.35, 2180.64, 2238.71, 2290.32, 2341.93, 2477.41, 2496.77, 2503.22,
    2696.77, 2722.58, 2896.77, 2961.28, 3096.77, 3206.45, 3303.22, 3703.22, 4658.06,
    5141.93, 7419.34, 8709.66, 8967.72, 9161.27, 9999.98, 10322.56, 10903.20, 12129.01,
    12838.68, 14193.52, 14774.16, 17096.74, 19354.80, 21612.86,
]

AISC = [
    71.61, 90.97, 126.45, 161.29, 198.06, 252.26, 285.16, 363.23, 388.39, 494.19,
    506.45, 641.29, 645.16, 792.26, 816.77, 940.00, 1008.39, 1045.16, 1161.29, 1283.87,
    1374.19, 1535.48, 1690.32, 1696.77, 1858.06, 1890.32, 1993.54, 2019.35, 2180.64,
    2238.71, 2290.32, 2341.93, 2477.41, 2496.77, 2503.22, 2696.77, 2722.58, 2896.77,
    2961.28, 3096.77, 3206.45, 3303.22, 3703.22, 4658.06, 5141.93, 5503.22, 5999.99,
    6999.99, 7419.34, 8709.66, 8967.72, 9161.27, 9999.98, 10322.56, 10903.20, 12129.01,
    12838.68, 14193.52, 14774.16, 15806.42, 17096.74, 18064.48, 19354.80, 21612.86,
]


def m(value_in):
    return round(value_in * INCH, 6)


def ten_bar(name, catalog):
    coords = [(720, 360), (720, 0), (360, 360), (360, 0), (0, 360), (0, 0)]
    nodes = []
    for k, (x, y) in enumerate(coords, start=1):
        fixed = k in (5, 6)
        nodes.append({"id": k, "coords": [m(x), m(y), 0.0], "support": [fixed, fixed, True]})
    conn = [(3, 5), (1, 3), (4, 6), (2, 4), (3, 4), (1, 2), (4, 5), (3, 6), (2, 3), (1, 4)]
    return {
        "name": name,
        "planar": True,
        "nodes": nodes,
        "members": [{"id": k, "nodes": list(e)} for k, e in enumerate(conn, start=1)],
        "groups": [[k] for k in range(1, 11)],
        "load_cases": [{"forces": {"2": [0.0, -444.82, 0.0], "4": [0.0, -444.82, 0.0]}}],
        "material": {"density": 2767.99, "E": 68.95},
        "limits": {"stress": [-172.37, 172.37], "displacement": [-50.80, 50.80]},
        "catalog": catalog,
    }


def seventy_two_bar(name, catalog):
    corners = [(0, 0), (120, 0), (120, 120), (0, 120)]
    nodes = []
    for level in range(5):
        for cx, cy in corners:
            k = len(nodes) + 1
            fixed = level == 0
            nodes.append({"id": k, "coords": [m(cx), m(cy), m(60 * level)],
                          "support": [fixed, fixed, fixed]})
    conn = []
    for story in range(4):
        a = [4 * story + i for i in range(1, 5)]
        b = [v + 4 for v in a]
        conn += [(a[i], b[i]) for i in range(4)]
        for i, j in ((0, 1), (1, 2), (2, 3), (3, 0)):
            conn += [(a[i], b[j]), (a[j], b[i])]
        conn += [(b[0], b[1]), (b[1], b[2]), (b[2], b[3]), (b[3], b[0])]
        conn += [(b[0], b[2]), (b[1], b[3])]
    groups = []
    for story in range(4):
        base = 18 * story
        groups += [f"{base + 1}-{base + 4}", f"{base + 5}-{base + 12}",
                   f"{base + 13}-{base + 16}", f"{base + 17}-{base + 18}"]
    return {
        "name": name,
        "nodes": nodes,
        "members": [{"id": k, "nodes": list(e)} for k, e in enumerate(conn, start=1)],
        "groups": groups,
        "load_cases": [
            {"forces": {"17": [22.24, 22.24, -22.24]}},
            {"forces": {str(k): [0.0, 0.0, -22.24] for k in (17, 18, 19, 20)}},
        ],
        "material": {"density": 2767.99, "E": 68.95},
        "limits": {"stress": [-172.37, 172.37], "displacement": [-6.35, 6.35]},
        "catalog": catalog,
    }


def two_bar():
    return {
        "name": "two_bar",
        "planar": True,
        "nodes": [
            {"id": 1, "coords": [0.0, 0.0, 0.0], "support": [True, True, True]},
            {"id": 2, "coords": [2.0, 0.0, 0.0], "support": [True, True, True]},
            {"id": 3, "coords": [1.0, 1.0, 0.0], "support": [False, False, True]},
        ],
        "members": [{"id": 1, "nodes": [1, 3]}, {"id": 2, "nodes": [2, 3]}],
        "groups": [[1], [2]],
        "load_cases": [{"forces": {"3": [20.0, -40.0, 0.0]}}],
        "material": {"density": 7850.0, "E": 200.0},
        "limits": {"stress": [-150.0, 150.0], "displacement": [-1.0, 1.0]},
        "catalog": [100.0, 200.0, 300.0, 400.0, 500.0],
    }


BENCHMARKS = {
    "ten_bar_case1": ten_bar("ten_bar_case1", TEN_BAR_CASE1),
    "ten_bar_case2": ten_bar("ten_bar_case2", [64.52] + [round(322.60 * k, 2) for k in range(1, 64)]),
    "seventy_two_bar_case1": seventy_two_bar(
        "seventy_two_bar_case1", {"start": 64.50, "step": 64.50, "count": 32}),
    "seventy_two_bar_case2": seventy_two_bar("seventy_two_bar_case2", AISC),
    "seventy_two_bar_case3": seventy_two_bar(
        "seventy_two_bar_case3", {"start": 64.50, "step": 64.50, "count": 25}),
    "two_bar": two_bar(),
}


def main():
    DATA.mkdir(parents=True, exist_ok=True)
    DOCS.mkdir(parents=True, exist_ok=True)
    for name, data in BENCHMARKS.items():
        path = DATA / f"{name}.json"
        path.write_text(json.dumps(data, indent=2) + "\n")
        shutil.copy(path, DOCS / path.name)


if __name__ == "__main__":
    main()
