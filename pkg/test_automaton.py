# test_automaton.py
import pytest

from models.errors import CapacityExceededError, InvalidParameterError
from models.schemas import CircularMapping, Dfa
from services.automaton_service import (
    apply_word, greedy_reset_word, is_permutation, is_synchronizing, letters_synchronize, make_cerny, make_circular,
    make_random_dfa, pair_merging_word, parse_dfa, parse_mapping, rank, shortest_reset_word, subset_reset_exists,
)


class TestWordAction:
    def test_apply_word_left_to_right(self, cerny4):
        # a: +1, b: 3 -> 0
        assert apply_word(cerny4, {3}, (1,)) == frozenset({0})
        assert apply_word(cerny4, {2}, (0, 1)) == frozenset({0})
        assert apply_word(cerny4, {0, 1, 2, 3}, ()) == frozenset({0, 1, 2, 3})

    def test_rank(self, cerny4):
        assert rank(cerny4, ()) == 4
        assert rank(cerny4, (1,)) == 3

    def test_empty_set_rejected(self, cerny4):
        with pytest.raises(InvalidParameterError):
            apply_word(cerny4, set(), (0,))

    def test_bad_letter_rejected(self, cerny4):
        with pytest.raises(InvalidParameterError):
            apply_word(cerny4, {0}, (2,))

    def test_state_outside_range_rejected(self, cerny4):
        with pytest.raises(InvalidParameterError):
            apply_word(cerny4, {0, 4}, (0,))
        with pytest.raises(InvalidParameterError):
            apply_word(cerny4, {-1}, ())

    def test_is_permutation(self):
        assert is_permutation((1, 2, 0))
        assert not is_permutation((0, 0, 2))


class TestParsing:
    def test_parse_mapping_out_of_range(self):
        with pytest.raises(InvalidParameterError):
            parse_mapping([0, 3, 1])

    def test_parse_dfa_wrong_length(self):
        with pytest.raises(InvalidParameterError):
            parse_dfa(3, [(1, 2, 0), (0, 0)])

    def test_cerny_needs_two_states(self):
        with pytest.raises(InvalidParameterError):
            make_cerny(1)


class TestSynchronization:
    def test_cerny_synchronizes(self):
        for n in range(2, 10):
            assert is_synchronizing(make_cerny(n))

    def test_witness_does_not_synchronize(self, witness, witness_dfa):
        assert not witness.is_permutation()
        assert not is_synchronizing(witness_dfa)

    def test_permutation_circular_does_not_synchronize(self):
        assert not is_synchronizing(make_circular(CircularMapping.of((2, 0, 1))))

    def test_single_state(self):
        assert letters_synchronize(((0,),), 1)
        assert shortest_reset_word(Dfa(n=1, letters=((0,),))) == ()

    def test_pair_merging_word(self, cerny4):
        word = pair_merging_word(cerny4, 0, 3)
        assert word == (1,)
        assert len(apply_word(cerny4, {0, 3}, word)) == 1
        assert pair_merging_word(cerny4, 2, 2) == ()

    def test_pair_merging_word_unmergeable(self, witness_dfa):
        # 거리 2 쌍은 a 와 b 아래에서 계속 거리 2 로 남는다
        assert pair_merging_word(witness_dfa, 0, 2) is None

    def test_pair_reduction_matches_subset_search(self, rng):
        for _ in range(200):
            n = int(rng.integers(2, 8))
            dfa = make_random_dfa(rng, n, k=2)
            assert is_synchronizing(dfa) == subset_reset_exists(dfa)


class TestResetWords:
    @pytest.mark.parametrize("n", range(3, 9))
    def test_cerny_extremal_length(self, n):
        word = shortest_reset_word(make_cerny(n))
        assert len(word) == (n - 1) ** 2

    def test_shortest_is_none_when_not_synchronizing(self, witness_dfa):
        assert shortest_reset_word(witness_dfa) is None

    def test_capacity(self):
        with pytest.raises(CapacityExceededError):
            shortest_reset_word(make_cerny(21))
        with pytest.raises(CapacityExceededError):
            shortest_reset_word(make_cerny(6), max_n=5)

    def test_greedy_resets(self):
        for n in range(2, 12):
            dfa = make_cerny(n)
            word = greedy_reset_word(dfa)
            assert len(apply_word(dfa, dfa.states, word)) == 1
            assert len(word) >= (n - 1) ** 2

    def test_greedy_none_when_not_synchronizing(self, witness_dfa):
        assert greedy_reset_word(witness_dfa) is None

    def test_greedy_not_shorter_than_shortest(self, rng):
        for _ in range(50):
            dfa = make_random_dfa(rng, int(rng.integers(2, 8)))
            shortest = shortest_reset_word(dfa)
            greedy = greedy_reset_word(dfa)
            assert (shortest is None) == (greedy is None)
            if shortest is not None:
                assert len(greedy) >= len(shortest)
