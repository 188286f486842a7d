"""Figure specifications loaded from JSON."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

KINDS = ("sweep-comparison", "error-scan", "emission-trace", "distribution")


class FigureError(Exception):
    """Invalid figure spec or input data."""


@dataclass(frozen=True)
class FigureSpec:
    """What to render: input files, figure kind and light styling.

    ``csv`` is a single path for sweep/error-scan/emission kinds and a list
    of per-sample dump paths for the distribution kind. ``manifest`` is the
    harness manifest JSON matching the CSV; it supplies the metadata (N, m)
    from which reference lines are computed.
    """

    kind: str
    csv: tuple
    output: str
    manifest: Optional[str] = None
    title: str = ""
    labels: tuple = ()
    methods: tuple = ()  # subset of CSV methods to draw; empty = all present
    bins: int = 40
    dpi: int = 150

    def __post_init__(self):
        if self.kind not in KINDS:
            raise FigureError(f"figure kind must be one of {KINDS}, got {self.kind!r}")
        csvs = (self.csv,) if isinstance(self.csv, (str, Path)) else tuple(self.csv)
        if not csvs:
            raise FigureError("spec needs at least one input CSV")
        object.__setattr__(self, "csv", tuple(str(c) for c in csvs))
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "methods", tuple(self.methods))
        if self.kind != "distribution" and len(self.csv) != 1:
            raise FigureError(f"kind {self.kind!r} takes exactly one CSV")

    @classmethod
    def from_json(cls, path) -> "FigureSpec":
        with open(path) as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise FigureError(f"figure spec {path} is not valid JSON: {exc}")
        try:
            return cls(
                kind=data["kind"],
                csv=data.get("csv") or data.get("csvs"),
                output=data["output"],
                manifest=data.get("manifest"),
                title=data.get("title", ""),
                labels=tuple(data.get("labels", ())),
                methods=tuple(data.get("methods", ())),
                bins=int(data.get("bins", 40)),
                dpi=int(data.get("dpi", 150)),
            )
        except KeyError as exc:
            raise FigureError(f"figure spec missing required field: {exc}")
