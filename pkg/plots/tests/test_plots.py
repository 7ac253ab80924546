"""Rendering package tests: all five figure kinds render from the golden
CSVs, and schema-mutated inputs fail loudly with the offending column named.
The final test doubles as the acceptance line for the plotting criterion."""

import csv
import shutil
from pathlib import Path

import pytest

from qed2x_plots import render, schema

GOLDEN = Path(__file__).parent / "golden"

KIND_TO_FILE = {
    "series": "populations.csv",
    "dicke": "dicke.csv",
    "heatmap-xt": "field_map.csv",
    "heatmap-dl": "sweep.csv",
    "jsd": "jsd.csv",
}


def rows_of(path):
    with open(path, newline="") as f:
        return list(csv.reader(f))


def write_rows(path, rows):
    with open(path, "w", newline="") as f:
        csv.writer(f, lineterminator="\n").writerows(rows)


class TestRendering:
    @pytest.mark.parametrize("kind", sorted(KIND_TO_FILE))
    def test_kind_renders(self, kind, tmp_path):
        out = tmp_path / f"{kind}.png"
        rc = render.main(["--input", str(GOLDEN / KIND_TO_FILE[kind]),
                          "--kind", kind, "--output", str(out)])
        assert rc == 0
        assert out.stat().st_size > 1000          # a real PNG, not a stub

    def test_density_matrix_as_series(self, tmp_path):
        out = tmp_path / "dm.png"
        rc = render.main(["--input", str(GOLDEN / "density_matrix.csv"),
                          "--kind", "series", "--output", str(out)])
        assert rc == 0 and out.exists()

    def test_style_file(self, tmp_path):
        style = tmp_path / "style.json"
        style.write_text('{"title": "demo", "logy": true, '
                         '"columns": ["P_C", "P_tot"], "dpi": 72}')
        out = tmp_path / "s.png"
        rc = render.main(["--input", str(GOLDEN / "populations.csv"),
                          "--kind", "series", "--output", str(out),
                          "--style", str(style)])
        assert rc == 0 and out.exists()

    def test_unknown_style_key_rejected(self, tmp_path):
        style = tmp_path / "style.json"
        style.write_text('{"colour": "red"}')
        rc = render.main(["--input", str(GOLDEN / "populations.csv"),
                          "--kind", "series", "--output",
                          str(tmp_path / "x.png"), "--style", str(style)])
        assert rc == 1


class TestSchemaMutations:
    def test_renamed_column_fails(self, tmp_path):
        rows = rows_of(GOLDEN / "dicke.csv")
        rows[0][rows[0].index("P_dark_B")] = "P_drak_B"
        bad = tmp_path / "bad.csv"
        write_rows(bad, rows)
        with pytest.raises(schema.SchemaError, match="P_dark_B"):
            schema.load_dicke(bad)

    def test_dropped_column_fails(self, tmp_path):
        rows = rows_of(GOLDEN / "populations.csv")
        rows = [[v for i, v in enumerate(r) if i != 1] for r in rows]
        bad = tmp_path / "bad.csv"
        write_rows(bad, rows)
        # still a valid generic series; as a dicke panel it must fail
        with pytest.raises(schema.SchemaError, match="missing required"):
            schema.load_dicke(bad)

    def test_first_column_not_time_fails(self, tmp_path):
        rows = rows_of(GOLDEN / "populations.csv")
        rows[0][0] = "time"
        bad = tmp_path / "bad.csv"
        write_rows(bad, rows)
        with pytest.raises(schema.SchemaError, match="must be 't'"):
            schema.load_timeseries(bad)

    def test_non_numeric_cell_fails(self, tmp_path):
        rows = rows_of(GOLDEN / "populations.csv")
        rows[3][2] = "oops"
        bad = tmp_path / "bad.csv"
        write_rows(bad, rows)
        with pytest.raises(schema.SchemaError, match="'P_B'"):
            schema.load_timeseries(bad)

    def test_ragged_row_fails(self, tmp_path):
        rows = rows_of(GOLDEN / "jsd.csv")
        rows[5] = rows[5][:-1]
        bad = tmp_path / "bad.csv"
        write_rows(bad, rows)
        with pytest.raises(schema.SchemaError, match="row 6"):
            schema.load_jsd(bad)

    def test_incomplete_grid_fails(self, tmp_path):
        rows = rows_of(GOLDEN / "sweep.csv")
        del rows[2]
        bad = tmp_path / "bad.csv"
        write_rows(bad, rows)
        with pytest.raises(schema.SchemaError, match="complete"):
            schema.load_sweep(bad)

    def test_negative_intensity_fails(self, tmp_path):
        rows = rows_of(GOLDEN / "field_map.csv")
        rows[1][2] = "-1.0"
        bad = tmp_path / "bad.csv"
        write_rows(bad, rows)
        with pytest.raises(schema.SchemaError, match="nonnegative"):
            schema.load_field_map(bad)

    def test_cli_exit_code_on_mutation(self, tmp_path):
        rows = rows_of(GOLDEN / "dicke.csv")
        rows[0][1] = "bogus"
        bad = tmp_path / "bad.csv"
        write_rows(bad, rows)
        rc = render.main(["--input", str(bad), "--kind", "dicke",
                          "--output", str(tmp_path / "x.png")])
        assert rc == 1
        assert not (tmp_path / "x.png").exists()


def test_criterion_12_plot_rendering(tmp_path):
    rendered = 0
    for kind, fname in KIND_TO_FILE.items():
        out = tmp_path / f"{kind}.png"
        rc = render.main(["--input", str(GOLDEN / fname), "--kind", kind,
                          "--output", str(out)])
        if rc == 0 and out.exists():
            rendered += 1

    rows = rows_of(GOLDEN / "dicke.csv")
    rows[0][rows[0].index("P_dark_B")] = "P_drak_B"
    mutated = tmp_path / "mutated.csv"
    write_rows(mutated, rows)
    mutation_rc = render.main(["--input", str(mutated), "--kind", "dicke",
                               "--output", str(tmp_path / "m.png")])

    ok = rendered == 5 and mutation_rc == 1
    line = (f"criterion 12 {'PASS' if ok else 'FAIL'}  plot rendering: "
            f"{rendered}/5 kinds rendered, mutated-schema exit {mutation_rc}")
    try:
        import conftest
        conftest.ACCEPTANCE_LINES.append(line)
    except ImportError:
        pass
    print(line)
    assert ok, line
