#!/usr/bin/env python3
"""Regenerate the example manifests under manifests/."""

import json
import pathlib

ROOT = pathlib.Path(__file__).resolve().parent.parent / "manifests"


def dump(name, data):
    ROOT.mkdir(exist_ok=True)
    path = ROOT / name
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")
    print(f"wrote {path}")


circle = {
    "schema": "periodlab/1",
    "ambient_dim": 2,
    "simplices": [
        {"name": "upper_arc", "dim": 1, "components": ["cos(pi*t)", "sin(pi*t)"]},
        {"name": "lower_arc", "dim": 1, "components": ["cos(pi + pi*t)", "sin(pi + pi*t)"]},
        {
            "name": "upper_sqrt",
            "dim": 1,
            "components": ["1 - 2*t", "sqrt(1 - (1 - 2*t)^2)"],
        },
        {
            "name": "lower_sqrt",
            "dim": 1,
            "components": ["2*t - 1", "-sqrt(1 - (2*t - 1)^2)"],
        },
        {"name": "sqrt_graph", "dim": 1, "components": ["t", "sqrt(t)"]},
        {"name": "tsin_graph", "dim": 1, "components": ["t", "t*sin(1/t)"]},
        {"name": "para", "dim": 2, "components": ["a1^2", "a2"]},
    ],
    "chains": [
        {
            "name": "gamma",
            "terms": [{"simplex": "upper_arc", "coeff": 1}, {"simplex": "lower_arc", "coeff": 1}],
        },
        {
            "name": "gamma_semialg",
            "terms": [
                {"simplex": "upper_sqrt", "coeff": 1},
                {"simplex": "lower_sqrt", "coeff": 1},
            ],
        },
    ],
    "forms": [
        {
            "name": "dtheta",
            "degree": 1,
            "terms": [
                {"indices": [1], "coeff": "-a2/(a1^2 + a2^2)"},
                {"indices": [2], "coeff": "a1/(a1^2 + a2^2)"},
            ],
        },
        {
            "name": "d_xy",
            "degree": 1,
            "terms": [{"indices": [1], "coeff": "a2"}, {"indices": [2], "coeff": "a1"}],
        },
        {"name": "x_dy", "degree": 1, "terms": [{"indices": [2], "coeff": "a1"}]},
        {"name": "f_xy", "degree": 0, "terms": [{"indices": [], "coeff": "a1*a2"}]},
    ],
}

torus = {
    "schema": "periodlab/1",
    "ambient_dim": 4,
    "simplices": [
        {
            "name": "loop_a",
            "dim": 1,
            "components": ["cos(2*pi*t)", "sin(2*pi*t)", "1", "0"],
        },
        {
            "name": "loop_b",
            "dim": 1,
            "components": ["1", "0", "cos(2*pi*t)", "sin(2*pi*t)"],
        },
    ],
    "chains": [
        {"name": "cycle_a", "terms": [{"simplex": "loop_a", "coeff": 1}]},
        {"name": "cycle_b", "terms": [{"simplex": "loop_b", "coeff": 1}]},
    ],
    "forms": [
        {
            "name": "dtheta_1",
            "degree": 1,
            "terms": [
                {"indices": [1], "coeff": "-a2/(a1^2 + a2^2)"},
                {"indices": [2], "coeff": "a1/(a1^2 + a2^2)"},
            ],
        },
        {
            "name": "dtheta_2",
            "degree": 1,
            "terms": [
                {"indices": [3], "coeff": "-a4/(a3^2 + a4^2)"},
                {"indices": [4], "coeff": "a3/(a3^2 + a4^2)"},
            ],
        },
        {
            "name": "exact_1",
            "degree": 1,
            "terms": [
                {"indices": [1], "coeff": "a3"},
                {"indices": [3], "coeff": "a1"},
                {"indices": [2], "coeff": "cos(a2)"},
            ],
        },
    ],
    "complexes": [
        {
            "name": "T7",
            "simplices": sorted(
                sorted((i % 7, (i + 1) % 7, (i + 3) % 7)) for i in range(7)
            )
            + sorted(sorted((i % 7, (i + 2) % 7, (i + 3) % 7)) for i in range(7)),
        },
    ],
}

complexes = {
    "schema": "periodlab/1",
    "complexes": [
        {"name": "hollow_triangle", "simplices": [[0, 1], [1, 2], [0, 2]]},
        {"name": "full_triangle", "simplices": [[0, 1, 2]]},
        {"name": "sphere_dDelta3", "simplices": [[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]]},
        {
            "name": "rp2_6",
            "simplices": [
                [1, 2, 3], [1, 2, 4], [1, 3, 5], [1, 4, 6], [1, 5, 6],
                [2, 3, 6], [2, 4, 5], [2, 5, 6], [3, 4, 5], [3, 4, 6],
            ],
        },
        {
            "name": "torus_7",
            "simplices": sorted(
                sorted((i % 7, (i + 1) % 7, (i + 3) % 7)) for i in range(7)
            )
            + sorted(sorted((i % 7, (i + 2) % 7, (i + 3) % 7)) for i in range(7)),
        },
    ],
}

square = {
    "schema": "periodlab/1",
    "ambient_dim": 2,
    "simplices": [
        {"name": "tri_lower", "dim": 2, "components": ["a1 + a2", "a2"]},
        {"name": "tri_upper", "dim": 2, "components": ["a1", "a1 + a2"]},
    ],
    "chains": [
        {
            "name": "square",
            "terms": [
                {"simplex": "tri_lower", "coeff": 1},
                {"simplex": "tri_upper", "coeff": 1},
            ],
        }
    ],
    "forms": [
        {"name": "x_dy", "degree": 1, "terms": [{"indices": [2], "coeff": "a1"}]},
    ],
}


def arc(theta0, theta1):
    return [f"cos({theta0} + ({theta1} - ({theta0}))*t)", f"sin({theta0} + ({theta1} - ({theta0}))*t)"]


circle_upper = {
    "schema": "periodlab/1",
    "ambient_dim": 2,
    "complexes": [{"name": "upper_K", "simplices": [[0, 1], [1, 2]]}],
    "triangulations": [
        {
            "name": "upper",
            "complex": "upper_K",
            "evaluators": [
                {"simplex": [0, 1], "map": {"kind": "expr", "dim": 1, "components": arc("0", "pi/2")}},
                {"simplex": [1, 2], "map": {"kind": "expr", "dim": 1, "components": arc("pi/2", "pi")}},
                {"simplex": [0], "map": {"kind": "affine", "vertices": [[1.0, 0.0]]}},
                {"simplex": [1], "map": {"kind": "affine", "vertices": [[0.0, 1.0]]}},
                {"simplex": [2], "map": {"kind": "affine", "vertices": [[-1.0, 0.0]]}},
            ],
            "marks": {"B": [[0], [2]]},
        }
    ],
}

circle_lower = {
    "schema": "periodlab/1",
    "ambient_dim": 2,
    "complexes": [{"name": "lower_K", "simplices": [[0, 1], [1, 2]]}],
    "triangulations": [
        {
            "name": "lower",
            "complex": "lower_K",
            "evaluators": [
                {"simplex": [0, 1], "map": {"kind": "expr", "dim": 1, "components": arc("pi", "3/2*pi")}},
                {"simplex": [1, 2], "map": {"kind": "expr", "dim": 1, "components": arc("3/2*pi", "2*pi")}},
                {"simplex": [0], "map": {"kind": "affine", "vertices": [[-1.0, 0.0]]}},
                {"simplex": [1], "map": {"kind": "affine", "vertices": [[0.0, -1.0]]}},
                {"simplex": [2], "map": {"kind": "affine", "vertices": [[1.0, 0.0]]}},
            ],
            "marks": {"B": [[0], [2]]},
        }
    ],
}

circle_btable = {
    "mark": "B",
    "containment": [
        {"tau": [0], "sigma": [2]},
        {"tau": [2], "sigma": [0]},
    ],
}


if __name__ == "__main__":
    dump("circle.json", circle)
    dump("torus.json", torus)
    dump("complexes.json", complexes)
    dump("square.json", square)
    dump("circle_upper.json", circle_upper)
    dump("circle_lower.json", circle_lower)
    dump("circle_btable.json", circle_btable)
