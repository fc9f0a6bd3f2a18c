"""Rendering of EPA results into text, CSV, or JSON tables.

The tabular layout is one row per firm and one (stat, p) column pair per
model label, grouped into one table per test. Text output prints three
decimals and wraps significant p-values (p < alpha) in ** markers.
"""

from __future__ import annotations

import hashlib
import json
import platform
from pathlib import Path

import numpy as np
import pandas as pd

from .errors import EmptyResults, InvalidConfig

FORMATS = ("text", "csv", "json")


def _record_sort_key(r: dict):
    return (r["test"], r["firm"], r["model"])


def pivot_results(records: list[dict]) -> dict[str, pd.DataFrame]:
    """Group per-(firm, model) test records into one wide frame per test."""
    if not records:
        raise EmptyResults("no EPA records to render")
    by_test: dict[str, dict[str, dict]] = {}
    for r in sorted(records, key=_record_sort_key):
        tbl = by_test.setdefault(r["test"], {})
        row = tbl.setdefault(r["firm"], {})
        row[f"stat[{r['model']}]"] = r["statistic"]
        row[f"p[{r['model']}]"] = r["p_value"]
    def col_key(c: str):
        kind, label = c.split("[", 1)
        return (label, 0 if kind == "stat" else 1)

    out = {}
    for test, rows in by_test.items():
        df = pd.DataFrame.from_dict(rows, orient="index")
        df = df[sorted(df.columns, key=col_key)]
        df.index.name = "firm"
        out[test] = df.sort_index()
    return out


def render_text(records: list[dict], alpha: float = 0.05) -> str:
    tables = pivot_results(records)
    chunks = []
    for test, df in tables.items():
        lines = [f"== {test.upper()} =="]
        cols = list(df.columns)
        widths = [max(len(c), 12) for c in cols]
        head = "firm".ljust(12) + "".join(c.rjust(w + 2) for c, w in zip(cols, widths))
        lines.append(head)
        for firm, row in df.iterrows():
            cells = []
            for c, w in zip(cols, widths):
                v = row[c]
                if isinstance(v, float) and np.isnan(v):
                    s = "-"
                elif c.startswith("p[") and v < alpha:
                    s = f"**{v:.3f}**"
                else:
                    s = f"{v:.3f}"
                cells.append(s.rjust(w + 2))
            lines.append(str(firm).ljust(12) + "".join(cells))
        chunks.append("\n".join(lines))
    return "\n\n".join(chunks) + "\n"


def render_json(records: list[dict]) -> str:
    return json.dumps(sorted(records, key=_record_sort_key), indent=2, sort_keys=True)


def write_tables(records: list[dict], out_dir, fmt: str, alpha: float = 0.05) -> list[str]:
    """Write rendered tables under out_dir; returns the file names."""
    if fmt not in FORMATS:
        raise InvalidConfig(f"unknown format {fmt!r}; pick one of {FORMATS}")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    if fmt == "text":
        p = out_dir / "epa_tables.txt"
        p.write_text(render_text(records, alpha))
        written.append(p.name)
    elif fmt == "json":
        p = out_dir / "epa_results.json"
        p.write_text(render_json(records) + "\n")
        written.append(p.name)
    else:
        for test, df in pivot_results(records).items():
            p = out_dir / f"epa_{test}.csv"
            df.to_csv(p)
            written.append(p.name)
    return written


# -- run manifests ------------------------------------------------------------


def file_sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            h.update(block)
    return h.hexdigest()


def build_manifest(command: str, config: dict, seed: int, inputs: list, outputs: list[str]) -> dict:
    """Reproducibility record written beside every CLI output.

    Deliberately contains no timestamps and no thread count: reruns of
    the same command must produce byte-identical manifests regardless of
    parallelism.
    """
    import numba
    import scipy

    from . import __version__

    return {
        "command": command,
        "config": {k: config[k] for k in sorted(config)},
        "seed": seed,
        "inputs": {str(p): file_sha256(p) for p in inputs},
        "outputs": sorted(outputs),
        "versions": {
            "volcast": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "pandas": pd.__version__,
            "numba": numba.__version__,
            "python": platform.python_version(),
        },
    }


def write_manifest(manifest: dict, path) -> None:
    Path(path).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
