"""Parser for the qfridge CSV format.

Layout: a ``#``-prefixed header block (version, ``kind:``, free-form
``key: value`` metadata, and the full run configuration between
``config-begin``/``config-end``), then a column-name row and data rows.
"""
from __future__ import annotations

import configparser
import csv
import io
from dataclasses import dataclass, field


class SchemaError(ValueError):
    """The CSV does not match the expected qfridge signature."""


@dataclass
class CsvTable:
    path: str
    kind: str
    meta: dict                 # header "key: value" entries (strings)
    config: configparser.ConfigParser
    columns: dict              # name -> list (floats where parseable)

    def require(self, *names):
        for name in names:
            if name not in self.columns:
                raise SchemaError(
                    f"{self.path}: missing column {name!r} "
                    f"(has: {', '.join(self.columns)})")

    def meta_float(self, key):
        if key not in self.meta:
            raise SchemaError(f"{self.path}: missing header entry {key!r}")
        return float(self.meta[key])

    def config_float(self, section, key):
        try:
            return self.config.getfloat(section, key)
        except (configparser.Error, ValueError) as exc:
            raise SchemaError(
                f"{self.path}: cannot read [{section}] {key}: {exc}") from exc


def _coerce(values):
    try:
        return [float(v) for v in values]
    except ValueError:
        return list(values)


def read_csv(path) -> CsvTable:
    kind = None
    meta = {}
    config_lines = []
    body = []
    in_config = False
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("#"):
                text = line[1:].lstrip()
                if text == "config-begin":
                    in_config = True
                elif text == "config-end":
                    in_config = False
                elif in_config:
                    config_lines.append(line[2:] if line.startswith("# ")
                                        else "")
                elif ":" in text:
                    key, _, val = text.partition(":")
                    key = key.strip()
                    val = val.strip()
                    if key == "kind":
                        kind = val
                    else:
                        meta[key] = val
            elif line.strip():
                body.append(line)
    if kind is None:
        raise SchemaError(f"{path}: no '# kind:' header — not a qfridge CSV")
    if not body:
        raise SchemaError(f"{path}: no column header row")
    rows = list(csv.reader(io.StringIO("\n".join(body))))
    names = rows[0]
    data = {n: [] for n in names}
    for row in rows[1:]:
        if len(row) != len(names):
            raise SchemaError(f"{path}: ragged row {row!r}")
        for n, v in zip(names, row):
            data[n].append(v)
    cfg = configparser.ConfigParser()
    cfg.read_string("\n".join(config_lines))
    return CsvTable(path=str(path), kind=kind, meta=meta, config=cfg,
                    columns={n: _coerce(v) for n, v in data.items()})
