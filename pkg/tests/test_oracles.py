"""The reference implementations themselves, on hand-worked cases."""

from oracles import (
    bins_oracle,
    count_matrix,
    kmer_bits,
    motif_counts,
    motif_scores,
    population_stats,
    pwm_score,
    quantize_oracle,
)


def test_quantize_oracle_hand_cases():
    # M=4, r=1, mu=0: bins (-inf,-1) [-1,0) [0,1) [1,inf)
    assert [quantize_oracle(x, 4, 1.0, 0.0) for x in (-5, -1, -0.5, 0, 0.99, 1, 7)] == [1, 2, 2, 3, 3, 4, 4]
    assert bins_oracle(4, 1.0, 0.0)[1:3] == [(-1.0, 0.0), (0.0, 1.0)]


def test_population_stats():
    assert population_stats([1, 3]) == (2.0, 1.0)


def test_count_matrix_hand_case():
    assert count_matrix([[1, 2], [1, 1]], 2) == [[2, 0], [1, 1]]
    assert pwm_score([1, 2], [[2, 0], [1, 1]], 2) == 1.5


def test_kmer_bits_and_counts():
    assert kmer_bits([1, 1, 3], (1, 3)) == [0, 1]
    assert kmer_bits([1, 1, 1], (2,)) == [0, 0, 0]
    assert motif_counts([[1, 2]], (1,), count_absence=False) == [1, 0]
    assert motif_counts([[1, 2]], (1,), count_absence=True) == [0, 1]


def test_motif_scores_zero_mass():
    assert motif_scores([1, 2], (3,), [0, 0], [0, 0]) == (0.0, 0.0)
