import pytest
from hypothesis import given, strategies as st

from spingrover.spin_model import (
    BasisState,
    SpinSystem,
    TransitionLabel,
    diagonal_energy,
    first_neighbors,
    second_neighbors,
    transition_context,
    transition_frequency,
    valid_contexts,
    validate_label,
    validate_spectrum,
)

REF4 = SpinSystem(4, (50.0, 200.0, 350.0, 500.0), 10.0, 0.4)
REF5 = SpinSystem(5, (50.0, 200.0, 350.0, 500.0, 650.0), 10.0, 0.4)


class TestSpinSystemValidation:
    def test_reference_systems_construct(self):
        assert REF4.dim == 16
        assert REF5.dim == 32
        assert REF4.min_larmor_gap() == 150.0

    def test_too_few_spins(self):
        with pytest.raises(ValueError, match="n_spins"):
            SpinSystem(2, (50.0, 200.0), 10.0, 0.4)

    def test_larmor_count_mismatch(self):
        with pytest.raises(ValueError, match="Larmor"):
            SpinSystem(4, (50.0, 200.0, 350.0), 10.0, 0.4)

    def test_duplicate_larmor(self):
        with pytest.raises(ValueError, match="distinct"):
            SpinSystem(4, (50.0, 200.0, 200.0, 500.0), 10.0, 0.4)

    def test_nonpositive_larmor(self):
        with pytest.raises(ValueError, match="positive"):
            SpinSystem(4, (-50.0, 200.0, 350.0, 500.0), 10.0, 0.4)

    def test_coupling_ordering(self):
        with pytest.raises(ValueError, match="Jp < J"):
            SpinSystem(4, (50.0, 200.0, 350.0, 500.0), 0.4, 10.0)

    def test_larmor_gap_too_small(self):
        with pytest.raises(ValueError, match="spacing"):
            SpinSystem(4, (50.0, 60.0, 350.0, 500.0), 10.0, 0.4)


class TestNeighbors:
    def test_open_chain_ends(self):
        assert first_neighbors(4, 0) == (1,)
        assert first_neighbors(4, 3) == (2,)
        assert first_neighbors(4, 1) == (0, 2)
        assert second_neighbors(4, 0) == (2,)
        assert second_neighbors(4, 1) == (3,)
        assert second_neighbors(5, 2) == (0, 4)


class TestTransitionContext:
    def test_interior_qubit_context(self):
        # |1000>: qubit 1 has neighbors 0 (up), 2 (up) and second neighbor 3 (down)
        lab = transition_context(REF4, BasisState(8), 1)
        assert (lab.mu, lab.nu) == (2, -1)

    def test_five_spin_center_context(self):
        # index 27 = 11011: qubit 2's neighbors 1,3 are down; 0,4 are (down, up)
        lab = transition_context(REF5, BasisState(27), 2)
        assert (lab.mu, lab.nu) == (-2, -2)

    def test_context_shared_by_pair(self):
        for a in range(REF4.dim):
            for k in range(4):
                b = a ^ (1 << k)
                assert transition_context(REF4, BasisState(a), k) == transition_context(
                    REF4, BasisState(b), k
                )

    def test_index_out_of_range(self):
        with pytest.raises(ValueError, match="out of range"):
            transition_context(REF4, BasisState(16), 0)


class TestTransitionFrequency:
    def test_matches_energy_difference(self):
        # the conditional frequency is exactly the diagonal energy gap of the pair
        for a in range(REF4.dim):
            for k in range(4):
                if (a >> k) & 1:
                    continue
                b = a | (1 << k)
                lab = transition_context(REF4, BasisState(a), k)
                gap = diagonal_energy(REF4, BasisState(b)) - diagonal_energy(
                    REF4, BasisState(a)
                )
                assert transition_frequency(REF4, lab) == pytest.approx(gap, abs=1e-9)

    @given(st.integers(0, 31), st.integers(0, 4))
    def test_energy_gap_property_five_spins(self, a, k):
        a &= ~(1 << k)
        lab = transition_context(REF5, BasisState(a), k)
        gap = diagonal_energy(REF5, BasisState(a | (1 << k))) - diagonal_energy(
            REF5, BasisState(a)
        )
        assert transition_frequency(REF5, lab) == pytest.approx(gap, abs=1e-9)

    def test_label_parity_validation(self):
        validate_label(REF4, TransitionLabel(1, 2, 1))
        with pytest.raises(ValueError):
            validate_label(REF4, TransitionLabel(1, 1, 1))   # mu parity wrong
        with pytest.raises(ValueError):
            validate_label(REF4, TransitionLabel(0, 2, 1))   # |mu| too large at the end
        with pytest.raises(ValueError):
            validate_label(REF4, TransitionLabel(4, 1, 1))   # qubit out of range


class TestValidContexts:
    def test_counts(self):
        assert len(valid_contexts(REF4, 0)) == 4   # one first, one second neighbor
        assert len(valid_contexts(REF4, 1)) == 6   # two first, one second
        assert len(valid_contexts(REF5, 2)) == 9   # two first, two second

    def test_ordering_mu_then_nu_descending(self):
        labs = valid_contexts(REF4, 1)
        assert [(l.mu, l.nu) for l in labs] == [
            (2, 1), (2, -1), (0, 1), (0, -1), (-2, 1), (-2, -1)
        ]

    def test_every_context_is_realized(self):
        for k in range(4):
            realized = {
                (lab.mu, lab.nu)
                for a in range(REF4.dim)
                for lab in [transition_context(REF4, BasisState(a), k)]
            }
            assert realized == {(l.mu, l.nu) for l in valid_contexts(REF4, k)}


class TestValidateSpectrum:
    def test_reference_system_is_collision_free(self):
        assert validate_spectrum(REF4) == []
        assert validate_spectrum(REF5) == []

    def test_wide_tolerance_reports_cross_qubit_pairs(self):
        collisions = validate_spectrum(REF4, tolerance=140.0)
        assert collisions
        assert all(a.qubit != b.qubit for a, b in collisions)

    def test_nonpositive_tolerance_rejected(self):
        with pytest.raises(ValueError, match="tolerance"):
            validate_spectrum(REF4, tolerance=0.0)
