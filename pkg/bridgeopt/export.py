"""Elevation drawings of decoded designs as SVG or node/member CSV."""

import io
import logging

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
from matplotlib.lines import Line2D  # noqa: E402
import numpy as np

from bridgeopt.design_space import decode, load_domains
from bridgeopt.exceptions import ConfigError, InvalidGenome
from bridgeopt.models import FixedParams
from bridgeopt.utils import load_json, write_csv, write_text

logger = logging.getLogger("bridgeopt")

PALETTE = ("#000000", "#d62728", "#1f77b4", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf")
LINE_WIDTHS = {"deck": 2.0, "tower": 3.0, "cable": 0.8}
SCALE_BAR = 20.0  # m
CSV_HEADER = ["design", "record", "id", "kind", "x", "y", "start", "end"]


def load_genome(path, domains=None):
    """
    Read a genome file and check it against the domain table.

    The file is either a best-genome artifact or any object with a
    ``genes`` list.

    Raises:
        InvalidGenome: listing every offending gene.
    """
    domains = domains if domains is not None else load_domains()
    document = load_json(path)
    genes = document.get("genes") if isinstance(document, dict) else None
    if not isinstance(genes, list):
        raise InvalidGenome(f"{path}: expected an object with a 'genes' list")
    try:
        genes = np.array(genes, dtype=float)
    except (TypeError, ValueError):
        raise InvalidGenome(f"{path}: genes must be numbers")
    problems = domains.describe(genes)
    if problems:
        raise InvalidGenome(f"{path}: " + "; ".join(problems))
    return genes


def elevation(geometry):
    """
    Nodes and members of the elevation view.

    Returns:
        tuple[list, list]: ``(x, y)`` nodes and ``(kind, start, end)``
            members; kinds are ``deck``, ``tower`` and ``cable``.
    """
    n = geometry.cable_count
    length = geometry.total_length
    deck_x = sorted({0.0, length, *geometry.towers_x, *geometry.deck_anchorages_x})
    nodes = [(x, 0.0) for x in deck_x]
    index = {x: i for i, x in enumerate(deck_x)}
    members = [("deck", i, i + 1) for i in range(len(deck_x) - 1)]

    left_lateral = list(geometry.lateral_anchorages)
    left_central = [geometry.lateral_span + p for p in geometry.central_anchorages]
    for side, tower_x in enumerate(geometry.towers_x):
        base = len(nodes)
        nodes.append((tower_x, -geometry.tower_below_deck))
        top = len(nodes)
        nodes.append((tower_x, geometry.tower_height))
        members.append(("tower", base, top))
        for k in range(n):
            anchor = len(nodes)
            nodes.append((tower_x, geometry.cable_heights[k]))
            lateral_x = left_lateral[n - 1 - k]
            central_x = left_central[k]
            if side == 1:
                lateral_x, central_x = length - lateral_x, length - central_x
            members.append(("cable", index[lateral_x], anchor))
            members.append(("cable", index[central_x], anchor))
    return nodes, members


def render_svg(designs, fixed=FixedParams()):
    """
    Overlay the elevation of several designs in one SVG.

    Every member is drawn as its own line whose SVG group id is
    ``design-<n>-<kind>-<k>``; ``fig.savefig`` runs without a date and with
    a fixed hash salt so the same designs give the same bytes.

    Args:
        designs (list[tuple[str, array-like]]): ``(label, genes)`` pairs;
            the first is drawn in black.
        fixed (FixedParams): Fixed bridge dimensions.

    Returns:
        str: The SVG document.
    """
    with plt.rc_context({"svg.hashsalt": "bridgeopt", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(12, 5))
        handles, labels = [], []
        for number, (label, genes) in enumerate(designs):
            colour = PALETTE[number % len(PALETTE)]
            nodes, members = elevation(decode(genes, fixed))
            counts = {"deck": 0, "tower": 0, "cable": 0}
            for kind, start, end in members:
                (x1, y1), (x2, y2) = nodes[start], nodes[end]
                line, = ax.plot([x1, x2], [y1, y2], color=colour, linewidth=LINE_WIDTHS[kind])
                line.set_gid(f"design-{number}-{kind}-{counts[kind]}")
                counts[kind] += 1
            handles.append(Line2D([], [], color=colour, linewidth=1.5))
            labels.append(label.replace("$", r"\$"))

        # scale bar under the left abutment
        bar_y = -fixed.tower_below_deck - 5.0
        bar, = ax.plot([0.0, SCALE_BAR], [bar_y, bar_y], color="#000000", linewidth=2.0)
        bar.set_gid("scale")
        ax.text(SCALE_BAR + 2.0, bar_y, f"{SCALE_BAR:.0f} m", va="center", fontsize=9)

        ax.legend(handles, labels, loc="upper right", fontsize=9)
        ax.set_aspect("equal")
        ax.set_axis_off()
        buffer = io.StringIO()
        fig.savefig(buffer, format="svg", metadata={"Date": None})
        plt.close(fig)
    return buffer.getvalue()


def geometry_rows(designs, fixed=FixedParams()):
    rows = []
    for label, genes in designs:
        nodes, members = elevation(decode(genes, fixed))
        for i, (x, y) in enumerate(nodes):
            rows.append((label, "node", i, "", float(x), float(y), "", ""))
        for i, (kind, start, end) in enumerate(members):
            rows.append((label, "member", i, kind, "", "", start, end))
    return rows


def export_geometry(paths, out_path, fmt="svg", domains=None, fixed=FixedParams()):
    """
    Draw the designs stored in ``paths`` into ``out_path``.

    Raises:
        InvalidGenome: if a genome is malformed or out of domain.
        IoError: if a file cannot be read or written.
    """
    if fmt not in ("svg", "csv"):
        raise ConfigError(f"unknown export format {fmt!r}")
    designs = [(path, load_genome(path, domains)) for path in paths]
    if fmt == "svg":
        write_text(out_path, render_svg(designs, fixed))
    else:
        write_csv(out_path, CSV_HEADER, geometry_rows(designs, fixed))
    logger.info(f"Exported {len(designs)} design(s) to {out_path}")
