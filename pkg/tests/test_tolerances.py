"""Tolerance bundle and its environment override."""

import pytest

from aeop.tolerances import Tolerances, default_tolerances


def test_defaults():
    tol = default_tolerances()
    assert tol.quad_rtol == 1e-11
    assert tol.quad_cap == 2**20
    assert tol.quad_cap_degenerate == 2**22


def test_env_override(monkeypatch):
    monkeypatch.setenv("EOP_TOL", "quad_rtol=1e-9, gram_tol=1e-6,quad_cap=65536")
    tol = default_tolerances()
    assert tol.quad_rtol == 1e-9
    assert tol.gram_tol == 1e-6
    assert tol.quad_cap == 65536
    assert tol.cd_tol == Tolerances().cd_tol  # untouched fields keep defaults


def test_env_override_rejects_unknown(monkeypatch):
    monkeypatch.setenv("EOP_TOL", "nonsense=1")
    with pytest.raises(ValueError):
        default_tolerances()
