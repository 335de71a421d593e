"""Tabulated curves of the scalar profiles and hulls (CSV)."""
from __future__ import annotations

import csv
import io

import numpy as np

from . import profiles as pf

GRID_POINTS = 589
FIGURES = ("phi", "radial", "psi", "hull")
GAMMAS_PHI = (0.0, 0.25, 0.5, 1.0)
GAMMAS_RADIAL = (0.25, 0.5)


def _label(g: float) -> str:
    return f"{g:g}"


def figure_table(figure: str, points: int = GRID_POINTS, Lambda: float = 2.0) -> tuple[list, np.ndarray]:
    """Header and (points, columns) data array; column 0 is the abscissa."""
    if figure == "phi":
        x = np.linspace(0.35, 4.2, points)
        cols = [pf.phi_gamma(g).value(x) for g in GAMMAS_PHI]
        header = ["lambda"] + [f"phi_gamma={_label(g)}" for g in GAMMAS_PHI]
    elif figure == "radial":
        # W(lambda I) in three dimensions with mu = 1, Lambda = 0
        x = np.linspace(0.07, 2.73, points)
        cols = [3.0 * np.log(x) ** 2]
        for g in GAMMAS_RADIAL:
            cols.append(3.0 * (pf.phi_gamma(g).value(x) - (2.0 - 2.0 * g) * np.log(x)))
        header = ["lambda", "f"] + [f"f_gamma={_label(g)}" for g in GAMMAS_RADIAL]
    elif figure == "psi":
        x = np.linspace(0.014, 7.0, points)
        cols = [pf.psi_vol(Lambda).value(x), np.log(x) ** 2]
        header = ["t", f"psi_Lambda={_label(Lambda)}", "log_squared"]
    elif figure == "hull":
        x = np.linspace(-1.47, 1.47, points)
        cols = [pf.double_well().value(x), pf.double_well_hull().value(x)]
        header = ["x", "double_well", "hull"]
    else:
        raise ValueError(f"unknown figure '{figure}'; choose from {', '.join(FIGURES)}")
    return header, np.column_stack([x] + cols)


def figure_breakpoints(figure: str, Lambda: float = 2.0) -> list[float]:
    if figure in ("phi", "radial"):
        gs = GAMMAS_PHI if figure == "phi" else GAMMAS_RADIAL
        return sorted({b for g in gs for b in pf.phi_gamma(g).breakpoints})
    if figure == "psi":
        return [float(np.e)]
    return [-1.0, 1.0]


def figure_csv(figure: str, points: int = GRID_POINTS, Lambda: float = 2.0) -> str:
    header, data = figure_table(figure, points, Lambda)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in data:
        w.writerow([f"{v:.17g}" for v in row])
    return buf.getvalue()


def read_csv(text: str) -> tuple[list, np.ndarray]:
    rows = list(csv.reader(io.StringIO(text)))
    return rows[0], np.array([[float(v) for v in r] for r in rows[1:]])
