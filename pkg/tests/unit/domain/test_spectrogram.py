# tests/unit/domain/test_spectrogram.py
import numpy as np
import pytest

from src.domain.entities.spectrogram import (
    Alignment, FrameOrigin, ProtectedSet, ProvenanceMask, Spectrogram, delete_column, insert_column,
    insert_columns, protected_from_alignment, upsample_prior,
)
from src.domain.exceptions import ValidationError

A, B, C, V = [1.0, 2.0], [3.0, 4.0], [5.0, 6.0], [9.0, 9.5]


def _grid(*columns):
    return Spectrogram(np.array(columns, dtype=np.float64).T)


def test_protected_set_holds_first_frame_of_every_phone():
    a = Alignment(phones=(0, 1, 2), spans=((0, 3), (3, 2), (5, 4)))
    assert protected_from_alignment(a).indices == (0, 3, 5)
    assert protected_from_alignment(Alignment((4,), ((0, 7),))).indices == (0,)


def test_protected_set_on_random_alignments():
    rng = np.random.default_rng(0)
    for _ in range(100):
        durations = rng.integers(1, 10, size=int(rng.integers(1, 12)))
        a = Alignment.from_durations(range(len(durations)), durations)
        p = protected_from_alignment(a)
        starts = np.concatenate(([0], np.cumsum(durations)[:-1]))
        assert len(p) == len(durations)
        assert list(p) == starts.tolist()
        assert all(0 <= i < a.num_frames for i in p)


def test_alignment_rejects_gaps_and_empty_spans():
    with pytest.raises(ValidationError):
        Alignment(phones=(0, 1), spans=((0, 2), (3, 1)))
    with pytest.raises(ValidationError):
        Alignment(phones=(0,), spans=((0, 0),))


def test_protected_set_requires_frame_zero():
    with pytest.raises(ValidationError):
        ProtectedSet((1, 2))


def test_delete_column():
    x = _grid(A, B, C)
    assert delete_column(x, 1).bit_equal(_grid(A, C))
    assert delete_column(_grid(A), 0).L == 0
    with pytest.raises(IndexError):
        delete_column(x, 3)


def test_insert_column_slots():
    x = _grid(A, B, C)
    assert insert_column(x, np.array(V), 1).bit_equal(_grid(A, V, B, C))
    assert insert_column(x, np.array(V), 3).bit_equal(_grid(A, B, C, V))
    with pytest.raises(IndexError):
        insert_column(x, np.array(V), 0)
    with pytest.raises(IndexError):
        insert_column(x, np.array(V), 4)


def test_delete_then_insert_restores_the_grid():
    rng = np.random.default_rng(3)
    x = Spectrogram(rng.normal(size=(5, 9)))
    for k in range(1, 9):
        assert insert_column(delete_column(x, k), x.column(k), k).bit_equal(x)


def test_insert_columns_matches_descending_single_insertions():
    x = _grid(A, B, C)
    out = insert_columns(x, [np.array(V), np.array(C)], [1, 3])
    assert out.bit_equal(_grid(A, V, B, C, C))
    assert x.L == 3


def test_upsample_prior():
    means = np.array([[1.0, -1.0], [2.0, 0.5]])
    assert upsample_prior(means[:, :1], [4]).bit_equal(Spectrogram(np.repeat(means[:, :1], 4, axis=1)))
    assert upsample_prior(means, [1, 1]).bit_equal(Spectrogram(means))
    with pytest.raises(ValidationError):
        upsample_prior(means, [2, 0])


def test_spectrogram_is_immutable_and_finite():
    x = _grid(A, B)
    with pytest.raises(ValueError):
        x.data[0, 0] = 5.0
    with pytest.raises(ValidationError):
        Spectrogram(np.array([[np.nan]]))


def test_provenance_mask_tracks_insertions():
    mask = ProvenanceMask.all_original(3).insert(1).insert(3)
    assert mask.original_indices() == [0, 2, 4]
    assert mask.flags[1] is FrameOrigin.INSERTED
    assert mask.promote_all().count_original() == 5


def _insert_one_at_a_time(x, cols, slots):
    frames = [x.data[:, j] for j in range(x.L)]
    inserted = 0
    for i in sorted(range(len(slots)), key=lambda i: slots[i]):
        frames.insert(slots[i] + inserted, np.asarray(cols[i], dtype=np.float64))
        inserted += 1
    return Spectrogram(np.stack(frames, axis=1))


def test_insert_columns_matches_one_at_a_time_insertion_on_random_grids():
    rng = np.random.default_rng(21)
    for _ in range(200):
        x = Spectrogram(rng.normal(size=(int(rng.integers(1, 5)), int(rng.integers(1, 9)))))
        n = int(rng.integers(1, 6))
        slots = [int(s) for s in rng.integers(1, x.L + 1, size=n)]
        cols = [rng.normal(size=x.D) for _ in range(n)]
        out = insert_columns(x, cols, slots)
        assert out.L == x.L + n
        assert out.bit_equal(_insert_one_at_a_time(x, cols, slots))


def test_upsample_prior_matches_repeat_by_duration_on_random_inputs():
    rng = np.random.default_rng(22)
    for _ in range(200):
        num_phones = int(rng.integers(1, 8))
        means = rng.normal(size=(int(rng.integers(1, 6)), num_phones))
        durations = [int(d) for d in rng.integers(1, 12, size=num_phones)]
        reference = [means[:, i] for i, d in enumerate(durations) for _ in range(d)]
        out = upsample_prior(means, durations)
        assert out.L == sum(durations)
        np.testing.assert_array_equal(out.data, np.stack(reference, axis=1))
