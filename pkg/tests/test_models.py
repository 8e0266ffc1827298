from math import comb

import numpy as np
import pytest

from oracles import op_matrix
from liereach.closure import close_algebra, dense_closure_oracle
from liereach.models import (
    XXZ_EDGES,
    HamiltonianSpec,
    calibration_scan,
    exact_ground_energy,
    two_qubit_pauli_set,
    xxz_2x2,
)
from liereach.pauli import CapacityError, PauliOperator, to_dense


def test_two_qubit_set():
    s = two_qubit_pauli_set()
    assert len(s) == 16 and s[0].label == "II"
    assert len({p.label for p in s}) == 16
    assert sum(comb(16, m) for m in range(1, 17)) == 65535


@pytest.mark.parametrize("variant", ["constant", "field"])
def test_xxz_has_13_terms(variant):
    spec = xxz_2x2(0.1, -2.0, 0.3 if variant == "field" else 0.0, variant=variant)
    assert len(spec) == 13
    assert len(set(spec.labels)) == 13


def test_xxz_couplings_and_labels():
    spec = xxz_2x2(0.5, -3.0, 0.0)
    terms = dict(zip(spec.labels, spec.terms))
    assert terms["XX(0,1)"] == PauliOperator.from_label("XXII", -0.5)
    assert terms["ZZ(1,3)"] == PauliOperator.from_label("IZIZ", 3.0)
    assert terms["I(const)"] == PauliOperator.from_label("IIII", 1.0)
    assert len(XXZ_EDGES) == 4


def test_xxz_constant_variant_adds_field_when_nonzero():
    spec = xxz_2x2(0.1, -2.0, 0.5)
    assert len(spec) == 14 and spec.labels[-1] == "Z(field)"


def test_field_only_ground_energy():
    spec = xxz_2x2(0.0, 0.0, 1.0, variant="field")
    assert exact_ground_energy(spec) == pytest.approx(-4.0, abs=1e-12)


def test_single_z_ground_energy():
    assert exact_ground_energy(PauliOperator.from_label("Z")) == pytest.approx(-1.0)


def test_ground_energy_matches_kron_oracle():
    spec = xxz_2x2(0.3, -1.1, 0.2, variant="field")
    terms = {}
    for t in spec.terms:
        for s, c in t.terms.items():
            terms[s.label] = terms.get(s.label, 0.0) + c
    assert exact_ground_energy(spec) == pytest.approx(np.linalg.eigvalsh(op_matrix(terms))[0], abs=1e-12)


def test_dense_is_hermitian():
    h = xxz_2x2(0.7, -1.3, 0.4, variant="field").dense()
    assert np.max(np.abs(h - h.conj().T)) <= 1e-14


def test_site_relabeling_symmetry():
    # reflections of the square map the term set onto itself
    spec = xxz_2x2(0.2, -1.0, 0.5, variant="field")
    base = {frozenset(t.terms.items()) for t in spec.terms}
    for perm in ([1, 0, 3, 2], [2, 3, 0, 1], [0, 2, 1, 3]):
        mapped = set()
        for t in spec.terms:
            new = {}
            for s, c in t.terms.items():
                lab = s.label
                new_lab = "".join(lab[perm.index(q)] for q in range(4))
                new[new_lab] = c
            mapped.add(frozenset(PauliOperator(4, new).terms.items()))
        assert mapped == base


def test_singleton_closure_rank_61_for_constant_variant():
    spec = xxz_2x2()
    assert close_algebra(spec.operators()).final_rank == 61
    assert dense_closure_oracle(spec.operators()) == 61


@pytest.mark.parametrize("J,delta,offset", [(1.0, -20.0, 1.0), (0.3, 0.7, -2.5)])
def test_singleton_rank_independent_of_couplings(J, delta, offset):
    assert close_algebra(xxz_2x2(J, delta, 0.0, offset=offset).operators()).final_rank == 61


def test_field_variant_closes_to_126():
    assert close_algebra(xxz_2x2(0.1, -2.0, 1.0, variant="field").operators()).final_rank == 126


def test_json_roundtrip():
    spec = xxz_2x2(0.1, -2.0, 0.7, variant="field")
    back = HamiltonianSpec.from_json(spec.to_json())
    assert back.labels == spec.labels
    assert all(a == b for a, b in zip(back.terms, spec.terms))


def test_json_keeps_zero_terms():
    spec = xxz_2x2(0.1, -2.0, 0.0, variant="field")
    back = HamiltonianSpec.from_json(spec.to_json())
    assert len(back) == 13 and back.terms[-1].is_zero()


def test_duplicate_terms_rejected():
    x = PauliOperator.from_label("XX")
    with pytest.raises(ValueError):
        HamiltonianSpec(2, (x, x), ("a", "b"))


def test_capacity():
    with pytest.raises(CapacityError):
        exact_ground_energy(PauliOperator.from_label("Z" * 7))


def test_calibration_scan_reports_grid():
    scan = calibration_scan(-1.9794)
    assert len(scan["grid"]) == 24
    assert scan["best"] in scan["grid"]
    assert scan["matched"] == (abs(scan["best"]["error"]) <= 5e-4)
