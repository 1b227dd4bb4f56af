"""CSV/JSON emission with metadata headers, and plot-script generation."""
import csv
import io
import json
import math
import os

from . import __version__

FLOAT_FMT = "{:.17g}"


def _fmt(v):
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, float):
        return FLOAT_FMT.format(v)
    try:
        import numpy as np

        if isinstance(v, np.floating):
            return FLOAT_FMT.format(float(v))
        if isinstance(v, np.integer):
            return str(int(v))
    except ImportError:  # pragma: no cover
        pass
    return str(v)


def _jsonable(v):
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if hasattr(v, "item") and getattr(v, "ndim", 1) == 0:
        v = v.item()
    if hasattr(v, "tolist"):
        return _jsonable(v.tolist())
    if isinstance(v, float) and not math.isfinite(v):
        return repr(v)  # 'nan' / 'inf' kept as strings
    return v


def table_to_csv(rows, metadata=None, columns=None):
    """Render rows (list of dicts) as CSV text with '#' metadata lines."""
    if not rows:
        raise ValueError("table is empty")
    columns = list(columns or rows[0].keys())
    buf = io.StringIO()
    for k, v in (metadata or {}).items():
        buf.write(f"# {k}: {v}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(r.get(c, "")) for c in columns])
    return buf.getvalue()


def write_outputs(rows, path, metadata=None, columns=None, summary=None):
    """Write ``path`` (.csv) and a JSON mirror next to it.

    Returns
    -------
    list of str
        Paths written.
    """
    meta = {"toolkit_version": __version__}
    meta.update(metadata or {})
    text = table_to_csv(rows, meta, columns)
    base, _ = os.path.splitext(path)
    jpath = base + ".json"
    with open(path, "w") as fh:
        fh.write(text)
    cols = list(columns or rows[0].keys())
    doc = {"metadata": meta, "columns": cols, "rows": [{c: r.get(c) for c in cols} for r in rows]}
    if summary is not None:
        doc["summary"] = summary
    with open(jpath, "w") as fh:
        json.dump(_jsonable(doc), fh, indent=1)
    return [path, jpath]


def _parse_cell(s):
    try:
        if s.lstrip("-").isdigit():
            return int(s)
        return float(s)
    except ValueError:
        return s


def read_csv_table(path_or_text):
    """Parse a CSV written by :func:`write_outputs` into (metadata, rows)."""
    text = path_or_text
    if "\n" not in path_or_text and os.path.exists(path_or_text):
        with open(path_or_text) as fh:
            text = fh.read()
    meta, body = {}, []
    for line in text.splitlines():
        if line.startswith("#"):
            k, _, v = line[1:].strip().partition(":")
            meta[k.strip()] = v.strip()
        elif line:
            body.append(line)
    rd = csv.reader(body)
    head = next(rd)
    rows = [dict(zip(head, map(_parse_cell, r))) for r in rd]
    return meta, rows


def read_json_table(path):
    with open(path) as fh:
        doc = json.load(fh)
    return doc["metadata"], doc["rows"]


_EXCLUSION_TMPL = '''"""Coupling limit versus interaction range, from {files}."""
import csv

import matplotlib.pyplot as plt

STYLE = {style!r}


def load(path):
    with open(path) as fh:
        rows = [r for r in csv.DictReader(line for line in fh if not line.startswith("#"))]
    return [float(r["lambda_m"]) * 1e6 for r in rows], [float(r["g_limit"]) for r in rows]


fig, ax = plt.subplots(figsize=STYLE.get("figsize", (5, 4)))
for path in {files!r}:
    lam, g = load(path)
    ax.loglog(lam, g, color=STYLE.get("color", "red"), lw=STYLE.get("lw", 2), label=STYLE.get("label", path))
ax.set_xlabel(r"$\\lambda$ ($\\mu$m)")
ax.set_ylabel(r"$g_s^N g_p^e$")
ax.legend()
fig.tight_layout()
fig.savefig(STYLE.get("output", "exclusion.png"), dpi=STYLE.get("dpi", 150))
'''

_T1_TMPL = '''"""Coupling limit versus spin relaxation time, from {files}."""
import csv

import matplotlib.pyplot as plt

STYLE = {style!r}
COLORS = {{"fluctuation": "green", "background": "red", "total": "blue"}}
COLORS.update(STYLE.get("colors", {{}}))

with open({path!r}) as fh:
    rows = [r for r in csv.DictReader(line for line in fh if not line.startswith("#"))]
T1 = [float(r["T1_s"]) for r in rows]
fig, ax = plt.subplots(figsize=STYLE.get("figsize", (5, 4)))
for key in ("fluctuation", "background", "total"):
    ax.plot(T1, [float(r[key]) for r in rows], color=COLORS[key], label=key)
ax.set_xscale("log")
ax.set_yscale(STYLE.get("yscale", "log"))
ax.set_xlabel(r"$T_1$ (s)")
ax.set_ylabel(r"$g_s^N g_p^e$ limit")
ax.legend()
fig.tight_layout()
fig.savefig(STYLE.get("output", "limit_vs_T1.png"), dpi=STYLE.get("dpi", 150))
'''


def emit_plot_script(curve_files, kind="exclusion", style=None):
    """Return the text of a matplotlib script that plots the given CSV files.

    Parameters
    ----------
    curve_files : str or list of str
        CSVs written by the toolkit; they must exist.
    kind : {'exclusion', 'T1'}
    style : dict, optional
        Overrides for colors, labels, figure size and output name.
    """
    files = [curve_files] if isinstance(curve_files, str) else list(curve_files)
    for f in files:
        if not os.path.exists(f):
            raise FileNotFoundError(f)
    style = dict(style or {})
    if kind == "exclusion":
        return _EXCLUSION_TMPL.format(files=files, style=style)
    if kind == "T1":
        return _T1_TMPL.format(files=files, path=files[0], style=style)
    raise ValueError(f"unknown plot kind {kind!r}")
