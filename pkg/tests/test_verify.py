from __future__ import annotations

import pytest

from hardychain import verify


def test_index_tuples():
    assert list(verify.index_tuples("Xij", 4)) == [(1, 2), (1, 3), (2, 3)]
    assert list(verify.index_tuples("X", 4)) == [()]


def test_chain_members_respect_minimum_n():
    kinds = {m.kind for m in verify.chain_members(4)}
    assert kinds == {"X", "Xij", "Xijk"}
    assert not list(verify.chain_members(1))


@pytest.mark.slow
def test_full_suite_n6():
    results = verify.run(verify.VerifyConfig(n_max=6, samples=20))
    assert [r.name for r in results] == list(verify.PROPERTIES)
    failed = [r.to_dict() for r in results if not r.passed]
    assert not failed


def test_unknown_property():
    with pytest.raises(KeyError):
        verify.run(verify.VerifyConfig(), ["missing"])


def test_single_property_detail():
    (res,) = verify.run(verify.VerifyConfig(n_max=3, samples=5), ["op-prob-consistency"])
    assert res.passed and res.detail["max_abs_diff"] < 1e-10 and res.checked > 0
