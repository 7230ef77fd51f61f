import csv

import pytest

from figures import EXPECTED_COLUMNS


@pytest.fixture
def make_row():
    """Factory for one result-table row as a dict of CSV cell strings."""

    def _make(**overrides):
        row = {name: "" for name in EXPECTED_COLUMNS}
        row.update(protocol="PRA", metric="coverage_primary",
                   sweep_name="Q_target")
        row.update({key: str(value) for key, value in overrides.items()})
        return row

    return _make


@pytest.fixture
def write_table(tmp_path):
    """Factory writing a result-table CSV into tmp_path, returning its path.

    ``drop`` removes columns from the header, ``extra`` appends columns;
    both exist so tests can produce malformed or extended tables.
    """

    def _write(name, rows, *, drop=(), extra=()):
        columns = [c for c in EXPECTED_COLUMNS if c not in drop] + list(extra)
        path = tmp_path / name
        with open(path, "w", newline="") as handle:
            writer = csv.DictWriter(handle, fieldnames=columns,
                                    extrasaction="ignore")
            writer.writeheader()
            for row in rows:
                writer.writerow({c: row.get(c, "") for c in columns})
        return str(path)

    return _write
