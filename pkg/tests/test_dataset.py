"""CSV dataset loading, validation, and writing."""

import csv

import pytest

from hatescope.dataset import ColumnMap, load_dataset, write_dataset
from hatescope.errors import InvalidLevel, IoError, SchemaError
from hatescope.labels import LabeledComment, Comment, LabelVector, Target

SLUGS = ["individuals", "groups", "religion/creed", "race/ethnicity", "politics"]


def write_csv(path, rows, header=None):
    header = header or (["comment"] + SLUGS)
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        writer.writerows(rows)


def test_load_basic(tmp_path):
    path = tmp_path / "data.csv"
    write_csv(path, [["hello there", 0, 0, 0, 0, 0], ["bad words", 3, 2, 0, 0, 0]])
    items = load_dataset(path)
    assert len(items) == 2
    assert items[0].comment.text == "hello there"
    assert items[0].labels.to_codes() == (0, 0, 0, 0, 0)
    assert items[1].labels.to_codes() == (3, 2, 0, 0, 0)


def test_row_index_ids_when_no_id_column(tmp_path):
    path = tmp_path / "data.csv"
    write_csv(path, [["a", 0, 0, 0, 0, 0], ["b", 1, 0, 0, 0, 0]])
    items = load_dataset(path)
    assert [item.comment.id for item in items] == ["0", "1"]


def test_id_column_used_when_mapped(tmp_path):
    path = tmp_path / "data.csv"
    write_csv(
        path,
        [["c9", "a", 0, 0, 0, 0, 0]],
        header=["cid", "comment"] + SLUGS,
    )
    items = load_dataset(path, ColumnMap(id="cid"))
    assert items[0].comment.id == "c9"


def test_float_style_codes_accepted(tmp_path):
    path = tmp_path / "data.csv"
    write_csv(path, [["a", "1.0", "0.0", "3.0", "0.0", "2.0"]])
    items = load_dataset(path)
    assert items[0].labels.to_codes() == (1, 0, 3, 0, 2)


def test_missing_column_is_schema_error(tmp_path):
    path = tmp_path / "data.csv"
    write_csv(path, [["a", 0, 0, 0, 0]], header=["comment"] + SLUGS[:4])
    with pytest.raises(SchemaError):
        load_dataset(path)


def test_empty_text_is_schema_error(tmp_path):
    path = tmp_path / "data.csv"
    write_csv(path, [["   ", 0, 0, 0, 0, 0]])
    with pytest.raises(SchemaError):
        load_dataset(path)


def test_bad_code_names_row_and_column(tmp_path):
    path = tmp_path / "data.csv"
    write_csv(path, [["a", 0, 0, 0, 0, 0], ["b", 0, 5, 0, 0, 0]])
    with pytest.raises(InvalidLevel) as exc_info:
        load_dataset(path)
    message = str(exc_info.value)
    assert "groups" in message
    # Second data row: the error should name where to look.
    assert "2" in message or "1" in message


def test_non_numeric_code_rejected(tmp_path):
    path = tmp_path / "data.csv"
    write_csv(path, [["a", "x", 0, 0, 0, 0]])
    with pytest.raises(InvalidLevel):
        load_dataset(path)


def test_missing_file_is_io_error(tmp_path):
    with pytest.raises(IoError):
        load_dataset(tmp_path / "nope.csv")


def test_custom_column_names(tmp_path):
    path = tmp_path / "data.csv"
    header = ["text"] + [f"t{i}" for i in range(5)]
    write_csv(path, [["hi", 0, 1, 0, 0, 0]], header=header)
    column_map = ColumnMap(
        text="text",
        labels={target: f"t{target.index}" for target in Target},
    )
    items = load_dataset(path, column_map)
    assert items[0].labels.to_codes() == (0, 1, 0, 0, 0)


def test_column_map_requires_all_targets():
    with pytest.raises(SchemaError):
        ColumnMap(labels={Target.INDIVIDUALS: "a"})


def test_write_read_round_trip(tmp_path):
    path = tmp_path / "out.csv"
    items = [
        LabeledComment(
            Comment(id=str(i), text=f"comment {i}"),
            LabelVector.from_codes([i % 4, 0, (i + 1) % 4, 0, 0]),
        )
        for i in range(10)
    ]
    column_map = ColumnMap(id="id")
    write_dataset(path, items, column_map)
    loaded = load_dataset(path, column_map)
    assert len(loaded) == 10
    for original, read_back in zip(items, loaded):
        assert read_back.comment.id == original.comment.id
        assert read_back.comment.text == original.comment.text
        assert read_back.labels == original.labels
