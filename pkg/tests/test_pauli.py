import itertools
import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import labels, operators
from oracles import decompose, op_matrix, pauli_matrix
from liereach.pauli import (
    CapacityError,
    PauliOperator,
    PauliString,
    SizeMismatchError,
    all_strings,
    commutator,
    from_dense,
    hs_inner,
    multiply,
    to_dense,
)


def P(label):
    return PauliString.from_label(label)


def O(*pairs):
    n = len(pairs[0][0])
    return PauliOperator(n, list(pairs))


class TestPauliString:
    def test_bits_follow_qubit_order(self):
        s = P("XZIY")
        assert s.x_bits == 0b1001
        assert s.z_bits == 0b1010
        assert s.label == "XZIY"

    def test_identity_has_no_bits(self):
        s = PauliString.identity(3)
        assert (s.x_bits, s.z_bits, s.phase_exp) == (0, 0, 0)

    def test_phase_reduced_mod_4(self):
        assert PauliString(1, 1, 0, 7).phase_exp == 3

    def test_rejects_high_bits(self):
        with pytest.raises(ValueError):
            PauliString(2, 0b100, 0)

    def test_label_prefixes(self):
        assert P("-iXY").phase_exp == 3
        assert P("iZ").phase_exp == 1
        assert P("-Z").phase_exp == 2

    def test_bad_letter(self):
        with pytest.raises(ValueError):
            P("XQ")

    @given(labels(3))
    def test_index_roundtrip(self, lab):
        s = P(lab)
        assert PauliString.from_index(3, s.index) == s

    def test_index_order_is_lexicographic(self):
        labs = [s.label for s in all_strings(2)]
        assert labs == sorted(labs, key=lambda L: ["IXYZ".index(c) for c in L])


class TestMultiply:
    def test_x_times_y(self):
        r = multiply(P("X"), P("Y"))
        assert r.label == "Z" and r.phase_exp == 1

    def test_identity_is_neutral(self):
        for s in all_strings(2):
            assert multiply(PauliString.identity(2), s) == s

    def test_square_is_identity(self):
        r = multiply(P("XZ"), P("XZ"))
        assert r.label == "II" and r.phase_exp == 0

    def test_all_single_qubit_pairs_match_dense(self):
        for a, b in itertools.product("IXYZ", repeat=2):
            r = multiply(P(a), P(b))
            np.testing.assert_array_equal(1j ** r.phase_exp * pauli_matrix(r.label),
                                          pauli_matrix(a) @ pauli_matrix(b))

    @given(labels(3), labels(3))
    def test_product_matches_kron(self, a, b):
        r = multiply(P(a), P(b))
        np.testing.assert_allclose(1j ** r.phase_exp * pauli_matrix(r.label),
                                   pauli_matrix(a) @ pauli_matrix(b), atol=1e-15)

    def test_size_mismatch(self):
        with pytest.raises(SizeMismatchError):
            multiply(P("X"), P("XX"))


class TestOperator:
    def test_drops_tiny_coefficients(self):
        op = O(("X", 1.0), ("Z", 1e-13))
        assert list(op.terms) == [P("X")]

    def test_phase_folded(self):
        op = PauliOperator(1, [(P("-X"), 1.5)])
        assert op.terms[P("X")] == -1.5

    def test_odd_phase_rejected(self):
        with pytest.raises(ValueError):
            PauliOperator(1, [(P("iX"), 1.0)])

    def test_mixed_sizes_rejected(self):
        with pytest.raises(SizeMismatchError):
            PauliOperator(1, [("X", 1.0), ("XX", 1.0)])

    def test_json_roundtrip(self):
        op = O(("XY", 0.5), ("ZZ", -1.25))
        back = PauliOperator.from_json(op.to_json())
        assert back == op
        assert json.loads(op.to_json())[0] == {"string": "XY", "coeff": 0.5}

    def test_vector_roundtrip(self):
        op = O(("XY", 0.5), ("ZI", -2.0))
        assert PauliOperator.from_vector(2, op.to_vector()) == op

    def test_arithmetic(self):
        a = O(("X", 1.0))
        b = O(("X", 1.0), ("Z", 2.0))
        assert (b - a) == O(("Z", 2.0))
        assert (2 * a).terms[P("X")] == 2.0
        assert (a - a).is_zero()


class TestCommutator:
    def test_x_y_gives_z(self):
        c = commutator(O(("X", 1.0)), O(("Y", 1.0)))
        assert list(c.terms) == [P("Z")]

    def test_commuting_strings(self):
        assert commutator(O(("XX", 1.0)), O(("ZZ", 1.0))).is_zero()

    def test_x_with_x_plus_z(self):
        c = commutator(O(("X", 1.0)), O(("X", 1.0), ("Z", 1.0)))
        # -i [X, Z] = -i (-2i Y) = -2 Y, cross-checked with dense matrices
        dense = -1j * (pauli_matrix("X") @ op_matrix({"X": 1, "Z": 1})
                       - op_matrix({"X": 1, "Z": 1}) @ pauli_matrix("X"))
        assert decompose(dense, 1) == pytest.approx({"Y": -2.0})
        assert c == O(("Y", -2.0))

    def test_size_mismatch(self):
        with pytest.raises(SizeMismatchError):
            commutator(O(("X", 1.0)), O(("XX", 1.0)))

    @given(st.data())
    def test_antisymmetry(self, data):
        n = data.draw(st.integers(1, 3))
        a, b = data.draw(operators(n=n)), data.draw(operators(n=n))
        assert commutator(a, b).allclose(-commutator(b, a), atol=1e-12)

    @given(st.data())
    def test_jacobi(self, data):
        n = data.draw(st.integers(1, 3))
        a, b, c = (data.draw(operators(n=n)) for _ in range(3))
        total = commutator(a, commutator(b, c)) + commutator(b, commutator(c, a)) + commutator(c, commutator(a, b))
        assert all(abs(v) <= 1e-9 for v in total.terms.values())

    @given(st.data())
    def test_dense_equivalence(self, data):
        n = data.draw(st.integers(1, 3))
        a, b = data.draw(operators(n=n)), data.draw(operators(n=n))
        ma, mb = to_dense(a), to_dense(b)
        np.testing.assert_allclose(to_dense(commutator(a, b)), -1j * (ma @ mb - mb @ ma), atol=1e-12)


class TestInnerAndDense:
    def test_hs_examples(self):
        assert hs_inner(O(("X", 1.0)), O(("X", 1.0))) == 1.0
        assert hs_inner(O(("X", 1.0)), O(("Z", 1.0))) == 0.0
        assert hs_inner(O(("X", 0.5), ("Z", 0.5)), O(("X", 1.0))) == 0.5

    @given(st.data())
    def test_hs_matches_trace(self, data):
        n = data.draw(st.integers(1, 3))
        a, b = data.draw(operators(n=n)), data.draw(operators(n=n))
        tr = np.trace(to_dense(a).conj().T @ to_dense(b)).real / 2**n
        assert hs_inner(a, b) == pytest.approx(tr, abs=1e-12)

    def test_dense_examples(self):
        np.testing.assert_array_equal(to_dense(O(("X", 1.0))), [[0, 1], [1, 0]])
        np.testing.assert_array_equal(to_dense(O(("II", 1.0))), np.eye(4))
        np.testing.assert_allclose(to_dense(O(("Z", 0.3))), np.diag([0.3, -0.3]))

    @given(labels(3))
    def test_dense_matches_kron(self, lab):
        np.testing.assert_array_equal(to_dense(O((lab, 1.0))), pauli_matrix(lab))

    @given(operators())
    def test_dense_roundtrip(self, op):
        assert from_dense(to_dense(op), op.n_qubits).allclose(op, atol=1e-12)

    def test_capacity(self):
        with pytest.raises(CapacityError):
            to_dense(PauliOperator.from_label("X" * 7))

    def test_non_hermitian_rejected(self):
        with pytest.raises(ValueError):
            from_dense(np.array([[0, 1], [0, 0]], dtype=complex), 1)
