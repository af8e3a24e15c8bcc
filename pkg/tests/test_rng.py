import numpy as np

from codeword_transfer.rng import chunks, parallel_map, resolve_threads, stream


def test_stream_is_keyed():
    a = stream(1, 2, 3).random(4)
    assert np.array_equal(a, stream(1, 2, 3).random(4))
    assert not np.array_equal(a, stream(1, 3, 2).random(4))
    assert not np.array_equal(a, stream(2, 2, 3).random(4))


def test_large_and_negative_seeds_are_masked():
    assert np.array_equal(stream(-1).random(2), stream(2 ** 64 - 1).random(2))


def test_chunks_cover_range():
    parts = chunks(10, 4)
    assert [len(p) for p in parts] == [4, 4, 2]
    assert [i for p in parts for i in p] == list(range(10))
    assert chunks(0, 3) == []


def test_parallel_map_preserves_order():
    assert parallel_map(lambda x: x * x, range(50), threads=7) == [x * x for x in range(50)]


def test_resolve_threads():
    assert resolve_threads(3) == 3
    assert 1 <= resolve_threads(None) <= 8
    assert resolve_threads(0) == resolve_threads(None)
