import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from homcodes import automata as ca
from homcodes import complexes as cx
from homcodes import gf2
from homcodes.css import from_complex

ONE = np.uint64(1)


def empty(L, W=1):
    return np.zeros((6, L, L, L, L, W), dtype=np.uint64)


def random_faces(rng, L, W, p):
    return ca.inject(rng, (6, L, L, L, L, W), p)


def coins_from(array, L):
    """Numpy-path coin callable that replays a compiled-path coin array."""
    it = iter(array.reshape(-1, *array.shape[2:]))
    return lambda shape: next(it).reshape(shape)


@pytest.mark.parametrize("L", [3, 4, 5])
def test_compiled_kernels_match_reference(L):
    rng = np.random.default_rng(L)
    W = 2
    eng = ca.Engine(L, W)
    faces = random_faces(rng, L, W, 0.05)
    s_ref = ca.syndrome(faces)
    s = eng.syndrome(faces)
    np.testing.assert_array_equal(s, s_ref)
    np.testing.assert_array_equal(eng.weights(s), ca.syndrome_weight(s_ref))

    f1, s1 = faces.copy(), s_ref.copy()
    f2, s2 = faces.copy(), s_ref.copy()
    ca.toom_sweep(f1, s1)
    eng.toom_sweep(f2, s2)
    np.testing.assert_array_equal(f1, f2)
    np.testing.assert_array_equal(s1, s2)

    draw = rng.integers(0, 2**64, size=(6, eng.ncol, L**4, W), dtype=np.uint64)
    f1, s1 = faces.copy(), s_ref.copy()
    f2, s2 = faces.copy(), s_ref.copy()
    ca.dklp_sweep(f1, s1, coins_from(draw, L))
    eng.dklp_sweep(f2, s2, lambda shape: draw)
    np.testing.assert_array_equal(f1, f2)
    np.testing.assert_array_equal(s1, s2)


@pytest.mark.parametrize("L", [2, 3, 4, 5, 6, 7])
def test_colouring_separates_neighbours(L):
    col, ncol = ca.plane_colouring(L)
    assert col.max() < ncol
    assert np.all(col != np.roll(col, 1, axis=0))
    assert np.all(col != np.roll(col, 1, axis=1))


def test_empty_syndrome_does_nothing():
    f = empty(4)
    s = ca.syndrome(f)
    ca.toom_sweep(f, s)
    ca.dklp_sweep(f, s, lambda shape: np.full(shape, ~np.uint64(0)))
    assert not f.any() and not s.any()


@pytest.mark.parametrize("rule", ["toom", "dklp"])
def test_single_face_removed_in_one_sweep(rule):
    f = empty(4)
    f[3, 1, 2, 0, 3, 0] = ONE
    s = ca.syndrome(f)
    assert ca.syndrome_weight(s)[0] == 4
    if rule == "toom":
        ca.toom_sweep(f, s)
    else:  # an all-heads coin: ties always flip
        ca.dklp_sweep(f, s, lambda shape: np.full(shape, ~np.uint64(0)))
    assert not f.any() and not s.any()


def test_dklp_minority_edge_is_ignored():
    f = empty(4)
    s = np.zeros((4, 4, 4, 4, 4, 1), dtype=np.uint64)
    s[2, 0, 0, 0, 0, 0] = ONE
    ca.dklp_sweep(f, s, lambda shape: np.full(shape, ~np.uint64(0)))
    assert not f.any()


def test_toom_erases_square_island():
    L = 4
    f = empty(L)
    f[0, 1:3, 1:3, 0, 0, 0] = ONE
    s = ca.syndrome(f)
    for sweep in range(4):
        ca.toom_sweep(f, s)
        if not s.any():
            break
    assert not s.any() and not f.any()


@given(st.integers(1, 3), st.integers(1, 3), st.integers(0, 5), st.integers(0, 4), st.integers(0, 4))
@settings(max_examples=40, deadline=None)
def test_toom_erases_rectangles(a, b, plane, x0, y0):
    L = 5
    i, j = ca.PLANES[plane]
    f = empty(L)
    xs = [(x0 + t) % L for t in range(a)]
    ys = [(y0 + t) % L for t in range(b)]
    for x in xs:
        for y in ys:
            idx = [plane, 0, 0, 0, 0, 0]
            idx[1 + i] = x
            idx[1 + j] = y
            f[tuple(idx)] = ONE
    res = ca.verify_correctable(f, "toom", v_max=50)
    assert res.success[0]


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=25, deadline=None)
def test_dklp_never_increases_syndrome_weight(seed):
    L = 4
    rng = np.random.default_rng(seed)
    f = random_faces(rng, L, 1, 0.05)
    s = ca.syndrome(f)
    masks = ca._colour_masks(L, 1)
    coins = lambda shape: rng.integers(0, 2**64, size=shape, dtype=np.uint64)
    w = ca.syndrome_weight(s)
    for p in range(6):
        ca.dklp_group(f, s, p, coins, masks)
        w2 = ca.syndrome_weight(s)
        assert np.all(w2 <= w)
        w = w2
    np.testing.assert_array_equal(s, ca.syndrome(f))


def test_verify_classes():
    L = 4
    f = empty(L, 1)
    # trial 1: a full xy sheet, zero syndrome but nontrivial
    f[0, :, :, 0, 0, 0] |= ONE << np.uint64(1)
    # trial 2: a strip of width two wrapping the y direction; Toom cannot touch it
    f[0, 0:2, :, 0, 0, 0] |= ONE << np.uint64(2)
    # trial 3: a single face
    f[1, 0, 0, 0, 0, 0] |= ONE << np.uint64(3)
    res = ca.verify_correctable(f, "toom", v_max=40)
    assert res.success[0] and res.success[3]
    assert res.logical[1] and not res.success[1]
    assert res.stuck[2]
    eng = ca.Engine(L, 1)
    res2 = ca.verify_correctable(f, "toom", v_max=40, engine=eng)
    for name in ("success", "logical", "stuck"):
        np.testing.assert_array_equal(getattr(res, name), getattr(res2, name))


def test_zero_state_succeeds_without_sweeps():
    res = ca.verify_correctable(empty(3), "dklp", v_max=30, coins=lambda shape: np.zeros(shape, np.uint64))
    assert res.success.all() and res.sweeps == 0


def test_inactive_trials_are_unclassified():
    f = empty(4)
    active = np.zeros(64, dtype=bool)
    active[:10] = True
    res = ca.verify_correctable(f, "toom", v_max=10, active=active)
    assert res.success.sum() == 10
    assert not (res.logical | res.stuck)[10:].any()


@pytest.mark.parametrize("L", [3, 4])
def test_compiled_verify_matches_reference_for_toom(L):
    rng = np.random.default_rng(7)
    f = random_faces(rng, L, 2, 0.03)
    a = ca.verify_correctable(f, "toom", v_max=10 * L)
    b = ca.verify_correctable(f, "toom", v_max=10 * L, engine=ca.Engine(L, 2))
    for name in ("success", "logical", "stuck"):
        np.testing.assert_array_equal(getattr(a, name), getattr(b, name))


def test_success_means_residual_is_a_stabilizer():
    L = 3
    c = cx.toric_4d(L)
    code = from_complex(c, 2)
    fmap = ca.face_index_map(c)
    rng = np.random.default_rng(3)
    grid = ca.CaGrid4D(L, 1)
    grid.faces[:] = random_faces(rng, L, 1, 0.02)
    s = ca.syndrome(grid.faces)
    for _ in range(30):
        ca.toom_sweep(grid.faces, s)
    done = ~ca._word_bits(np.bitwise_or.reduce(s.reshape(-1, 1), axis=0))
    logical = ca._word_bits(ca.logical_parity(grid.faces))
    for t in range(64):
        residual = grid.get_trial(t, fmap)
        if not done[t]:
            continue
        assert not code.syndrome(residual, "Z").any()
        # residual lies in the row space of the stabilizers exactly when it is not logical
        solvable = gf2.solve(code.h_z.T.tocsr(), residual) is not None
        assert solvable == (not logical[t])


def test_grid_round_trip_and_syndrome():
    L = 2
    c = cx.toric_4d(L)
    code = from_complex(c, 2)
    fmap, emap = ca.face_index_map(c), ca.edge_index_map(c)
    rng = np.random.default_rng(0)
    grid = ca.CaGrid4D(L, 1)
    vecs = (rng.random((5, code.n)) < 0.2).astype(np.uint8)
    for t, v in enumerate(vecs):
        grid.set_trial(t, v, fmap)
    for t, v in enumerate(vecs):
        np.testing.assert_array_equal(grid.get_trial(t, fmap), v)
        s = grid.syndrome()
        bits = ((s[..., 0] >> np.uint64(t)) & ONE).astype(np.uint8)
        expect = code.syndrome(v, "Z")
        np.testing.assert_array_equal(bits.reshape(-1), expect[emap.reshape(-1)])
    with pytest.raises(ValueError):
        ca.face_index_map(cx.tesseract(2))


def test_inject_rate():
    rng = np.random.default_rng(11)
    bits = ca._word_bits(ca.inject(rng, (4000,), 0.01))
    assert abs(bits.mean() - 0.01) < 0.001
    assert not ca.inject(rng, (3,), 0.0).any()
    assert ca._word_bits(ca.inject(rng, (3,), 1.0)).all()


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=20, deadline=None)
def test_repair_returns_a_cycle(seed):
    c = cx.toric_4d(2)
    rng = np.random.default_rng(seed)
    measured = (rng.random(c.sizes[1]) < 0.1).astype(np.uint8)
    out = ca.repair_syndrome_4d(c, measured)
    assert not gf2.matmul(c.boundary(1), out).any()


def test_repair_examples():
    c = cx.toric_4d(3)
    code = from_complex(c, 2)
    e = np.zeros(code.n, dtype=np.uint8)
    e[5] = 1
    truth = code.syndrome(e, "Z")
    np.testing.assert_array_equal(ca.repair_syndrome_4d(c, truth), truth)
    noisy = truth.copy()
    noisy[np.flatnonzero(truth)[0]] ^= 1
    np.testing.assert_array_equal(ca.repair_syndrome_4d(c, noisy), truth)
    # a spurious bit on an unviolated edge touching the face's boundary
    d1 = c.boundary(1).tocsc()
    u = d1.indices[d1.indptr[np.flatnonzero(truth)[0]]]
    at_u = np.flatnonzero(d1.toarray()[u])
    near = [e for e in at_u if not truth[e]]
    other = truth.copy()
    other[near[0]] ^= 1
    np.testing.assert_array_equal(ca.repair_syndrome_4d(c, other), truth)
    with pytest.raises(ValueError):
        ca.repair_syndrome_4d(c, np.zeros(3))


def test_bad_arguments():
    with pytest.raises(ValueError):
        ca.verify_correctable(empty(3), "toom", v_max=0)
    with pytest.raises(ValueError):
        ca.verify_correctable(empty(3), "majority", v_max=5)
