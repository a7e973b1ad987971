import json

import numpy as np
import pytest

from javelin import serialize
from javelin.cylinder import cylinder_profile
from javelin.model import ModelError
from javelin.serialize import ProfileFormatError


def test_round_trip_bitwise(solved, profile_csv):
    p = serialize.load_profile(profile_csv, lam=solved.lam)
    for col in ("s", "a", "b", "phi", "y"):
        assert np.array_equal(getattr(p, col), getattr(solved.profile, col))
    assert p.lam == solved.lam


def test_lambda_recovered_from_mode(solved, profile_csv):
    p = serialize.load_profile(profile_csv)
    assert p.lam == pytest.approx(solved.diagnostics["lambda_refined"], rel=1e-6)


def test_cylinder_rayleigh_quotient(tmp_path):
    prof = cylinder_profile(2000)
    path = tmp_path / "cyl.csv"
    serialize.save_profile(prof, path)
    assert serialize.load_profile(path).lam == pytest.approx(prof.lam, rel=1e-5)


def _rewrite(src, dst, edit):
    lines = src.read_text().splitlines()
    dst.write_text("\n".join(edit(lines)) + "\n")
    return dst


def test_header_error_names_column(profile_csv, tmp_path):
    bad = _rewrite(profile_csv, tmp_path / "h.csv",
                   lambda ls: [ls[0].replace("phi", "torque")] + ls[1:])
    with pytest.raises(ProfileFormatError, match="'phi'"):
        serialize.load_profile(bad)


def test_bad_value_names_column(profile_csv, tmp_path):
    def edit(ls):
        f = ls[5].split(",")
        f[4] = "oops"
        return ls[:5] + [",".join(f)] + ls[6:]

    with pytest.raises(ProfileFormatError, match="'y'"):
        serialize.load_profile(_rewrite(profile_csv, tmp_path / "v.csv", edit))


def test_negative_area(profile_csv, tmp_path):
    def edit(ls):
        f = ls[3].split(",")
        f[1] = "-" + f[1]
        return ls[:3] + [",".join(f)] + ls[4:]

    with pytest.raises(ModelError, match="negative"):
        serialize.load_profile(_rewrite(profile_csv, tmp_path / "n.csv", edit))


def test_non_monotone_s(profile_csv, tmp_path):
    def edit(ls):
        return [ls[0], ls[2], ls[1]] + ls[3:]

    with pytest.raises(ModelError, match="increasing"):
        serialize.load_profile(_rewrite(profile_csv, tmp_path / "m.csv", edit))


def test_empty_file(tmp_path):
    (tmp_path / "e.csv").write_text("")
    with pytest.raises(ProfileFormatError):
        serialize.load_profile(tmp_path / "e.csv")


def test_summary_record(solved, tmp_path):
    rec = serialize.summary_record(solved)
    for key in ("as_residual_max", "optimality_residual", "volume_check"):
        assert key in rec["residuals"]
    serialize.write_json(rec, tmp_path / "s.json")
    assert json.loads((tmp_path / "s.json").read_text())["lambda"] == solved.lam
