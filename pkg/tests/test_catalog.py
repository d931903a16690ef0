import json

import numpy as np
import pytest

from rkpp.catalog import (
    CATALOG_ENV,
    FamilyEntry,
    ParameterError,
    ParamSpec,
    CatalogError,
    UnknownFamilyError,
    free_heat_instance,
    get_family,
    instantiate_family,
    list_families,
    load_catalog,
    sample_printed,
)
from rkpp.expr import eval_expr
from rkpp.seeds import FisherId

PRINTED_VARIANTS = ["T1.09", "T1.10", "T1.11", "T1.12", "EX.2.1", "EX.3.1", "T3.09"]


def test_catalog_size_and_kinds():
    fams = list_families()
    assert len(fams) == 32
    assert len(list_families(kind="GNLH")) == 22
    assert len(list_families(kind="GBE")) == 10
    assert [e.id for e in list_families(singular=True)] == ["T2.13", "T2.14", "T2.15", "T2.16", "T2.17"]
    assert len({e.id for e in fams}) == 32
    assert [e.id for e in fams] == sorted(e.id for e in fams)


def test_route_filter():
    assert {e.id for e in list_families(route="ermakov")} == {"EX.2.1", "EX.2.2"}
    assert all(e.kind == "GBE" for e in list_families(route="burgers"))
    assert len(list_families(route="alternative")) == 20
    with pytest.raises(CatalogError):
        list_families(route="sideways")
    with pytest.raises(CatalogError):
        list_families(kind="KdV")


def test_unknown_family():
    with pytest.raises(UnknownFamilyError) as err:
        get_family("NOPE")
    assert "NOPE" in str(err.value)
    assert isinstance(err.value, KeyError)


def test_free_heat_entry_is_hidden():
    assert get_family("FREE").route == "riccati"
    assert "FREE" not in {e.id for e in list_families()}


def test_entries_are_well_formed():
    for e in list_families():
        assert e.paper_row
        assert e.notes, e.id
        assert e.window.t_max > e.window.t_min >= e.window.anchor
        assert e.window.x_max > e.window.x_min
        assert e.kind == ("GBE" if e.route == "burgers" else "GNLH")
        assert set(e.coefficients) >= set("abcdfg") | {"c0"}
        back = FamilyEntry.from_dict(json.loads(json.dumps(e.to_dict())))
        assert back == e


def test_param_spec_coercion():
    assert ParamSpec("m", 1, {"min": 1, "integer": True}).coerce("3") == 3.0
    with pytest.raises(ParameterError):
        ParamSpec("m", 1, {"min": 1, "integer": True}).coerce(1.5)
    with pytest.raises(ParameterError):
        ParamSpec("m", 1, {"min": 1, "integer": True}).coerce(0)
    with pytest.raises(ParameterError):
        ParamSpec("mu0", 1.0, {"min": 0.0, "open_min": True}).coerce(0.0)
    with pytest.raises(ParameterError):
        ParamSpec("a0", 1.0, {"exclude": [0.0]}).coerce("0")
    with pytest.raises(ParameterError):
        ParamSpec("x", 1.0, {}).coerce("nan")
    with pytest.raises(ParameterError):
        ParamSpec("x", 1.0, {}).coerce("abc")
    assert ParamSpec("seed", "U1", {"choices": ["U1", "U2"]}).coerce(" U2") == "U2"
    with pytest.raises(ParameterError):
        ParamSpec("seed", "U1", {"choices": ["U1", "U2"]}).coerce("U3")
    assert ParamSpec("seed_params", "0.5,1,0", {}).coerce("0.5, 1;0") == (0.5, 1.0, 0.0)


def test_instantiate_defaults_and_overrides():
    inst = instantiate_family("T1.01")
    assert inst.values["a"] == 1.0 and inst.values["seed"] == "U1"
    assert inst.seed.id is FisherId.U1
    assert (inst.coeffs.r0, inst.coeffs.h0, inst.coeffs.p) == (1.0, -1.0, 1.0)
    inst = instantiate_family("T1.01", {"seed": "U4", "k1": "2"})
    assert inst.seed.id is FisherId.U4 and inst.seed.k1 == 2.0
    assert (inst.coeffs.r0, inst.coeffs.h0, inst.coeffs.p) == (-1.0, -1.0, 2.0)


def test_instantiate_by_binding():
    inst = instantiate_family("T1.02", {"r0": 0, "h0": 1, "p": 2})
    assert inst.seed.id is FisherId.U3
    with pytest.raises(ParameterError):
        instantiate_family("T1.02", {"r0": 7})
    with pytest.raises(ParameterError):
        instantiate_family("EX.2.1", {"r0": 1})


def test_instantiate_rejects_bad_params():
    with pytest.raises(ParameterError):
        instantiate_family("T1.01", {"zz": 1})
    with pytest.raises(ParameterError):
        instantiate_family("EX.2.1", {"mu0": -1})
    with pytest.raises(ParameterError):
        instantiate_family("T3.01", {"a0": 0})


def test_catalog_override_path(tmp_path, monkeypatch):
    entry = get_family("T1.01").to_dict()
    entry["id"] = "MINE.1"
    path = tmp_path / "cat.json"
    path.write_text(json.dumps({"version": 1, "families": [entry]}))
    assert [e.id for e in load_catalog(str(path))] == ["MINE.1"]
    monkeypatch.setenv(CATALOG_ENV, str(path))
    assert [e.id for e in list_families()] == ["MINE.1"]
    assert instantiate_family("MINE.1").verify(order=False).passes()


def test_malformed_catalog(tmp_path):
    bad = get_family("T1.01").to_dict()
    bad["route"] = "sideways"
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"version": 1, "families": [bad]}))
    with pytest.raises(CatalogError):
        load_catalog(str(path))
    dup = tmp_path / "dup.json"
    good = get_family("T1.01").to_dict()
    dup.write_text(json.dumps({"version": 1, "families": [good, good]}))
    with pytest.raises(CatalogError):
        load_catalog(str(dup))


@pytest.mark.parametrize("fid", ["T1.01", "T2.15", "EX.2.1", "EX.3.2", "T3.01", "T3.06"])
def test_defaults_verify(fid):
    rep = instantiate_family(fid).verify()
    assert rep.passes(1e-3)
    assert 1.7 <= rep.convergence_order <= 2.3


@pytest.mark.parametrize("fid", PRINTED_VARIANTS)
def test_printed_variants_fail(fid):
    corrected = instantiate_family(fid).verify(order=False)
    printed = instantiate_family(fid, printed=True).verify(order=False)
    assert corrected.passes(1e-3)
    assert not printed.passes(1e-3)


def test_printed_functions_match_construction():
    inst = instantiate_family("EX.3.3")
    t = np.linspace(0.1, 2, 12)
    got = sample_printed(inst, t)
    p = inst.construct().params
    for name, vals in got.items():
        np.testing.assert_allclose(getattr(p, name)(t), vals, atol=1e-8)


def test_displayed_coth_misprint():
    inst = instantiate_family("T3.10")
    t = 0.5
    shown = eval_expr(inst.printed_function("alpha", as_displayed=True), t)
    used = eval_expr(inst.printed_function("alpha"), t)
    assert abs(shown - used) > 1e-1
    assert inst.construct().params.alpha(t) == pytest.approx(used, abs=1e-8)


def test_free_heat_instance():
    inst = free_heat_instance(alpha0=0.25)
    k = inst.kernels()
    assert k.gamma0(1.0) == pytest.approx(-0.25)
    with pytest.raises(ParameterError):
        instantiate_family("T1.01").kernels()
