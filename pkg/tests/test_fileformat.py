import json

import pytest

from tlcat.category_zoo import build_fibonacci, build_ising, su2, su2_level
from tlcat.fileformat import FileFormatError, dumps_system, fingerprint, load_system, loads_system, save_system
from tlcat.monoidal_system import validate_system

SYSTEMS = [build_fibonacci, build_ising, lambda: su2(1.3, 3), lambda: su2(complex(0.9, 0.4), 2), lambda: su2_level(2)]


@pytest.mark.parametrize("make", SYSTEMS)
def test_save_load_save_byte_identical(make, tmp_path):
    sys = make()
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    save_system(sys, a)
    loaded = load_system(a)
    save_system(loaded, b)
    assert a.read_bytes() == b.read_bytes()
    assert dict(loaded.f_entries()) == dict(sys.f_entries())
    assert loaded.window == sys.window
    assert fingerprint(loaded) == fingerprint(sys)


def test_digits_written():
    lines = dumps_system(build_fibonacci()).splitlines()
    row = next(l for l in lines if l.strip().startswith('["tau", "tau", "tau", "tau", "1", "1"'))
    assert "6.18033988749894792e-01" in row
    assert json.loads(row.strip().rstrip(","))[6] == 0.6180339887498948


def test_emitted_fibonacci_validates(tmp_path):
    path = tmp_path / "fib.json"
    save_system(build_fibonacci(), path)
    fusion, unit, pent = validate_system(load_system(path))
    assert fusion.ok and unit.ok and pent.max_residual < 1e-12


def _doc():
    return json.loads(dumps_system(build_fibonacci()))


def test_missing_unit_flag():
    doc = _doc()
    for lab in doc["labels"]:
        lab["is_unit"] = False
    with pytest.raises(FileFormatError, match="unit"):
        loads_system(json.dumps(doc))


def test_two_units():
    doc = _doc()
    for lab in doc["labels"]:
        lab["is_unit"] = True
    with pytest.raises(FileFormatError, match=r"labels\[1\]"):
        loads_system(json.dumps(doc))


def test_unknown_keys_ignored():
    doc = _doc()
    doc["comment"] = "extra"
    doc["labels"][0]["colour"] = "red"
    assert fingerprint(loads_system(json.dumps(doc))) == fingerprint(build_fibonacci())


@pytest.mark.parametrize("breakage,where", [
    (lambda d: d["f_symbols"][3].pop(), r"f_symbols\[3\]"),
    (lambda d: d["f_symbols"][0].__setitem__(6, "x"), r"f_symbols\[0\]"),
    (lambda d: d["fusion"].__setitem__(2, [1, 2]), r"fusion\[2\]"),
    (lambda d: d["fusion"][0].__setitem__(3, 1.5), r"fusion\[0\]"),
    (lambda d: d.pop("labels"), "labels"),
    (lambda d: d.__setitem__("version", 99), "version"),
    (lambda d: d["labels"].__setitem__(0, {"name": "x"}), r"labels\[0\]"),
])
def test_malformed_context(breakage, where):
    doc = _doc()
    breakage(doc)
    with pytest.raises(FileFormatError, match=where):
        loads_system(json.dumps(doc))


def test_bad_json_reports_position():
    text = dumps_system(build_fibonacci()).replace('"version": 1,', '"version": 1,,')
    with pytest.raises(FileFormatError, match="line 3"):
        loads_system(text)


def test_missing_file(tmp_path):
    with pytest.raises(FileFormatError, match="no such file"):
        load_system(tmp_path / "nope.json")


def test_multiplicity_rejected_at_load():
    doc = _doc()
    for row in doc["fusion"]:
        if row[:3] == ["tau", "tau", "tau"]:
            row[3] = 2
    with pytest.raises(FileFormatError, match="multiplicity"):
        loads_system(json.dumps(doc))


def test_fingerprint_sensitive():
    doc = _doc()
    doc["f_symbols"][-1][6] += 1e-15
    assert fingerprint(loads_system(json.dumps(doc))) != fingerprint(build_fibonacci())
    assert fingerprint(build_fibonacci()) == fingerprint(build_fibonacci())
