"""Plain-text numeric tables.

Layout::

    # key = value            (header, any number of lines)
    col_a,col_b              (column names)
    1,0.25                   (rows, 17 significant digits)
    # section: edges         (optional further sections)
    location,amplitude
    ...

Floats are written with 17 significant digits so they round-trip exactly.
"""

from __future__ import annotations

import io
from pathlib import Path

import numpy as np

from .concentration import ConcentrationFactor
from .detector import DetectionResult
from .spectral_core import SpectralData


def fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


class Table:
    def __init__(self, header: dict | None = None):
        self.header = dict(header or {})
        self.sections: list[tuple[str, list[str], list[list]]] = []

    def add(self, name: str, columns, rows) -> "Table":
        self.sections.append((name, list(columns), [list(r) for r in rows]))
        return self

    def section(self, name: str) -> tuple[list[str], list[list]]:
        for n, cols, rows in self.sections:
            if n == name:
                return cols, rows
        raise KeyError(name)

    def array(self, name: str = "data") -> np.ndarray:
        cols, rows = self.section(name)
        return np.array(rows, dtype=float).reshape(len(rows), len(cols))

    def dumps(self) -> str:
        buf = io.StringIO()
        for k, v in self.header.items():
            buf.write(f"# {k} = {fmt(v)}\n")
        for i, (name, cols, rows) in enumerate(self.sections):
            if i > 0 or name != "data":
                buf.write(f"# section: {name}\n")
            buf.write(",".join(cols) + "\n")
            for row in rows:
                buf.write(",".join(fmt(v) for v in row) + "\n")
        return buf.getvalue()

    def write(self, path) -> Path:
        path = Path(path)
        path.write_text(self.dumps())
        return path

    @classmethod
    def loads(cls, text: str) -> "Table":
        table = cls()
        name, cols, rows = "data", None, []
        for line in text.splitlines():
            if not line.strip():
                continue
            if line.startswith("# section:"):
                if cols is not None:
                    table.sections.append((name, cols, rows))
                name, cols, rows = line.split(":", 1)[1].strip(), None, []
            elif line.startswith("#"):
                key, _, value = line[1:].partition("=")
                table.header[key.strip()] = _parse_scalar(value.strip())
            elif cols is None:
                cols = line.split(",")
            else:
                rows.append([_parse_scalar(v) for v in line.split(",")])
        if cols is not None:
            table.sections.append((name, cols, rows))
        return table

    @classmethod
    def read(cls, path) -> "Table":
        return cls.loads(Path(path).read_text())


def _parse_scalar(text: str):
    for conv in (int, float):
        try:
            return conv(text)
        except ValueError:
            pass
    if text == "None":
        return None
    return text


def coefficients_table(data: SpectralData, header: dict | None = None) -> Table:
    head = {"N": data.N, "noise_variance": data.noise_variance, "seed": data.seed}
    head.update(header or {})
    rows = zip(data.modes, data.coeffs.real, data.coeffs.imag)
    return Table(head).add("data", ["k", "re", "im"], rows)


def read_coefficients(table: Table) -> SpectralData:
    arr = table.array()
    h = table.header
    return SpectralData(int(h["N"]), arr[:, 1] + 1j * arr[:, 2],
                        h.get("noise_variance"), h.get("seed"))


def factor_table(factor: ConcentrationFactor) -> Table:
    rows = zip(range(1, factor.N + 1), factor.values)
    return Table(factor.params()).add("data", ["k", "s_k"], rows)


def read_factor(table: Table) -> ConcentrationFactor:
    """Rebuild a factor from its table (values are taken verbatim)."""
    h = table.header
    values = table.array()[:, 1]
    kwargs = {}
    for key in ("eta", "beta", "k0", "N0", "epsilon_reg"):
        if h.get(key) is not None:
            kwargs[key] = h[key]
    ratio = None
    if h["family"] == "custom_table":
        N = values.size
        ratio = np.concatenate([[values[0] * N], values / (np.arange(1, N + 1) / N)])
    return ConcentrationFactor(h["family"], int(h["N"]), values, float(h["norm_constant"]),
                               _ratio=ratio, **kwargs)


def detection_table(result: DetectionResult, header: dict | None = None) -> Table:
    head = dict(result.meta)
    head.update(epsilon_predicted=result.epsilon_predicted,
                threshold_used=result.threshold_used)
    head.update(header or {})
    table = Table(head).add("data", ["x", "K"], zip(result.grid, result.samples))
    return table.add("edges", ["location", "amplitude"], result.edges)


def edges_table(result: DetectionResult, header: dict | None = None) -> Table:
    head = {"epsilon_predicted": result.epsilon_predicted,
            "threshold_used": result.threshold_used}
    head.update(header or {})
    return Table(head).add("data", ["location", "amplitude"], result.edges)


def montecarlo_table(summary) -> Table:
    """One row per trial plus an aggregate row (trial = 'aggregate')."""
    J = len(summary.jump_locations)
    head = dict(summary.params)
    head.update(N=summary.N, eta=summary.eta, epsilon=summary.epsilon)
    for j, (z, a) in enumerate(zip(summary.jump_locations, summary.jump_amplitudes), 1):
        head[f"jump_{j}"] = f"{fmt(z)}:{fmt(a)}"
    cols = (["trial", "seed"] + [f"amplitude_{j}" for j in range(1, J + 1)]
            + ["plateau_rms", "plateau_max", "detected", "false_edges"])
    rows = []
    for r in summary.rows:
        rows.append([r.trial, r.seed, *r.amplitudes, r.plateau_rms, r.plateau_max,
                     int(all(r.detected)), r.false_edges])
    rows.append(["aggregate", summary.trials, *summary.amplitude_mean, summary.plateau_rms,
                 summary.plateau_max, summary.detection_rate, summary.false_edge_rate])
    table = Table(head).add("data", cols, rows)
    stds = [[j, float(m), float(s)] for j, (m, s) in
            enumerate(zip(summary.amplitude_mean, summary.amplitude_std), 1)]
    return table.add("amplitude_stats", ["jump", "mean", "std"], stds)
