# test_matrix.py
import itertools

import numpy as np
import pytest

from models.errors import InvalidParameterError
from models.schemas import CircularMapping
from services.automaton_service import apply_word, letters_synchronize, make_circular
from services.matrix_service import (
    analyze_matrix, build_matrix, certificate_mask, certificate_to_reset_word, cyclic_abs,
    distance_graph_synchronizes, distance_table, in_events, matrix_sync_certificate, pigeonhole_condition,
    row_offsets,
)


def _shift(n):
    return tuple((q + 1) % n for q in range(n))


def test_cyclic_abs():
    assert cyclic_abs(3, 8) == 3
    assert cyclic_abs(5, 8) == 3
    assert cyclic_abs(-1, 8) == 1
    assert cyclic_abs(4, 8) == 4
    assert cyclic_abs(0, 5) == 0


def test_row_offsets():
    offsets = row_offsets(5)
    assert offsets.shape == (2, 5)
    assert list(offsets[0]) == [1, 2, 3, 4, 0]
    assert list(offsets[1]) == [2, 3, 4, 0, 1]


class TestWitnessMatrix:
    def test_entries(self, witness):
        T = build_matrix(witness)
        assert T.rows == 2
        assert list(T.row(1)) == [0, 2, 0, 2]
        assert list(T.row(2)) == [2, 2, 2, 2]
        assert T.entry(1, 1) == 2

    def test_statistics(self, witness):
        stats = analyze_matrix(build_matrix(witness))
        assert stats.R == (2, 1)
        assert stats.z == (2, 0)
        assert stats.Dflags == (1, 0)
        assert (stats.D, stats.Z0, stats.Z1, stats.max_excess) == (1, 2, 1, 1)
        assert stats.min_R == 1

    def test_no_certificate(self, witness):
        T = build_matrix(witness)
        assert matrix_sync_certificate(T) is None
        assert not distance_graph_synchronizes(T)
        assert not pigeonhole_condition(T)

    def test_entries_read_only(self, witness):
        T = build_matrix(witness)
        with pytest.raises(ValueError):
            T.entries[0, 0] = 1


def test_build_matrix_needs_two_states():
    with pytest.raises(InvalidParameterError):
        build_matrix(CircularMapping.of((0,)))


def test_in_events():
    stats = analyze_matrix(build_matrix(CircularMapping.of((0, 1, 1, 3, 2, 0))))
    in_row, in_zero = in_events(stats, 6, 0.5, 0.5)
    assert in_row == (stats.min_R >= 1.5)
    assert in_zero == (stats.D >= 1.5)
    with pytest.raises(InvalidParameterError):
        in_events(stats, 6, 0.0, 0.5)


def test_in_events_constant_and_identity():
    constant = analyze_matrix(build_matrix(CircularMapping.of((0, 0, 0, 0, 0))))
    assert constant.R == (1, 1)
    assert constant.D == 2
    assert in_events(constant, 5, 0.582, 0.45) == (False, True)

    identity = analyze_matrix(build_matrix(CircularMapping.of((0, 1, 2, 3))))
    assert identity.D == 0
    for alpha in (0.1, 0.5):
        assert in_events(identity, 4, alpha, 0.45) == (True, False)
    assert in_events(identity, 4, 0.51, 0.45) == (False, False)


def test_structural_identities(seeded_mappings):
    for mapping in seeded_mappings(17, 200):
        stats = analyze_matrix(build_matrix(mapping))
        assert stats.D == stats.Z0 - stats.max_excess
        assert stats.D >= stats.Z0 - stats.Z1
        assert all(1 <= r <= 17 // 2 + 1 for r in stats.R)


def test_distance_table_batch_matches_single(seeded_mappings):
    mappings = seeded_mappings(12, 20)
    batch = distance_table(np.stack([m.as_array() for m in mappings]), 12)
    for k, mapping in enumerate(mappings):
        assert np.array_equal(batch[k], build_matrix(mapping).entries)


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_distance_graph_matches_pair_bfs_exhaustively(n):
    shift = _shift(n)
    for b in itertools.product(range(n), repeat=n):
        T = build_matrix(CircularMapping.of(b))
        assert distance_graph_synchronizes(T) == letters_synchronize((shift, b), n), b


def test_distance_graph_matches_pair_bfs_sampled(seeded_mappings):
    for n in (12, 16, 21, 30):
        for mapping in seeded_mappings(n, 40, seed=n):
            T = build_matrix(mapping)
            assert distance_graph_synchronizes(T) == letters_synchronize((_shift(n), mapping.b), n)


def test_certificate_mask_matches_certificate(seeded_mappings):
    mappings = seeded_mappings(9, 300)
    batch = distance_table(np.stack([m.as_array() for m in mappings]), 9)
    mask = certificate_mask(batch)
    for k, mapping in enumerate(mappings):
        assert bool(mask[k]) == (matrix_sync_certificate(build_matrix(mapping)) is not None)


def test_pigeonhole_implies_certificate(seeded_mappings):
    for n in (7, 10, 15):
        for mapping in seeded_mappings(n, 200, seed=3):
            T = build_matrix(mapping)
            if pigeonhole_condition(T):
                assert matrix_sync_certificate(T) is not None


def _check_certificates(mappings):
    checked = 0
    for mapping in mappings:
        T = build_matrix(mapping)
        certificate = matrix_sync_certificate(T)
        if certificate is None:
            continue
        n = mapping.n
        assert letters_synchronize((_shift(n), mapping.b), n)
        word = certificate_to_reset_word(mapping, certificate)
        dfa = make_circular(mapping)
        assert len(apply_word(dfa, dfa.states, word)) == 1
        checked += 1
    return checked


def test_certificate_words_reset(seeded_mappings):
    assert _check_certificates(seeded_mappings(31, 60)) > 0


def test_depth2_certificate():
    # row 1 에 0 이 없고 row 2 에 0 이 있다
    mapping = CircularMapping.of((0, 1, 0, 1, 3))
    certificate = matrix_sync_certificate(build_matrix(mapping))
    assert certificate is not None
    assert certificate.depth2_count == 1
    assert certificate.plan_for(1).value == 2
    word = certificate_to_reset_word(mapping, certificate)
    dfa = make_circular(mapping)
    assert len(apply_word(dfa, dfa.states, word)) == 1


@pytest.mark.slow
def test_certificate_soundness_n101(seeded_mappings):
    assert _check_certificates(seeded_mappings(101, 1000, seed=2024)) > 0
