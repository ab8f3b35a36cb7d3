from fractions import Fraction as F
from itertools import combinations

import numpy as np
import pytest

from cantorfree.dyadic import (
    Address,
    DyadicMetric,
    all_addresses,
    cylinder_spread,
    cylinder_stats,
    disconnection_constant,
    first_difference_level,
    generate,
    net_density,
    representatives,
    spread_threshold,
    sup_distance,
    validate_metric,
)
from cantorfree.dyadic import bottleneck_matrix
from cantorfree.errors import (
    DegenerateMetricError,
    DepthLimitError,
    InvalidParameterError,
)
from cantorfree.lipfn import LipFn, lip_const

from oracles import brute_cylinder_minmax, brute_spread, minimax_closure, scatter_spread_float


# ---------------------------------------------------------------------------
# addresses


def test_address_ordering_and_blocks():
    a = Address.parse("01")
    assert a.length == 2 and str(a) == "01"
    assert a.index_at(4) == 0b0100
    assert list(a.block_at(4)) == [4, 5, 6, 7]
    assert Address.parse("1") < Address.parse("00")  # length first
    assert Address.parse("01") < Address.parse("10")
    with pytest.raises(InvalidParameterError):
        Address((0, 2))


def test_all_addresses_and_representatives():
    assert [str(a) for a in all_addresses(2)] == ["00", "01", "10", "11"]
    assert representatives(4, 2).tolist() == [0, 4, 8, 12]
    assert representatives(3, 0).tolist() == [0]


def test_first_difference_level():
    assert first_difference_level(0b00, 0b01, 2) == 2
    assert first_difference_level(0b00, 0b10, 2) == 1
    with pytest.raises(InvalidParameterError):
        first_difference_level(3, 3, 2)


# ---------------------------------------------------------------------------
# generators


def test_mu_values():
    mu = generate("mu", 2)
    assert mu.entry(0, 1) == F(1, 4)
    assert mu.entry(0, 2) == F(1, 2)
    assert all(mu.entry(i, i) == 0 for i in range(4))


def test_mu_is_ultrametric_every_triple():
    mu = generate("mu", 4)
    for x, y, z in combinations(range(16), 3):
        assert mu.entry(x, z) <= max(mu.entry(x, y), mu.entry(y, z))


def test_middle_lambda_endpoints_match_ternary():
    d = generate("middle_lambda", 2, lam=F(1, 3))
    assert d.line_points == (F(0), F(2, 9), F(2, 3), F(8, 9))
    # classical ternary form: sum of 2 a_i 3^-i
    d3 = generate("middle_lambda", 3, lam=F(1, 3))
    for v in range(8):
        bits = [(v >> (2 - k)) & 1 for k in range(3)]
        expected = sum(2 * b * F(1, 3) ** (k + 1) for k, b in enumerate(bits))
        assert d3.line_points[v] == expected


def test_generator_outputs_are_valid_metrics():
    cases = [
        generate("mu", 3),
        generate("middle_lambda", 3, lam=F(2, 5)),
        generate("fat_cantor", 3, removal_fractions=[F(1, 4), F(1, 16), F(1, 64)]),
        generate("ultrametric", 3, seed=5),
        generate("random", 3, seed=5),
    ]
    for d in cases:
        diag = validate_metric(d)
        assert diag.accepted and diag.max_triangle_defect == 0


def test_generator_outputs_valid_in_double_mode():
    for kind, kw in [("mu", {}), ("middle_lambda", {"lam": F(1, 3)}),
                     ("random", {"seed": 3})]:
        d = generate(kind, 9, mode="double", **kw)
        diag = validate_metric(d)
        assert diag.accepted
        assert diag.max_triangle_defect <= 1e-12


def test_generate_parameter_errors():
    with pytest.raises(DepthLimitError):
        generate("mu", 13)
    with pytest.raises(InvalidParameterError):
        generate("middle_lambda", 2, lam=F(7, 5))
    with pytest.raises(InvalidParameterError):
        generate("middle_lambda", 2)
    with pytest.raises(InvalidParameterError):
        generate("random", 2)  # seed required
    with pytest.raises(InvalidParameterError):
        generate("fat_cantor", 3, removal_fractions=[F(1, 4)])
    with pytest.raises(InvalidParameterError):
        generate("ultrametric", 2, level_scales=[F(1, 2), F(1, 2)])
    with pytest.raises(InvalidParameterError):
        generate("nonsense", 2)


def test_random_generator_deterministic_and_above_mu():
    a = generate("random", 4, seed=11)
    b = generate("random", 4, seed=11)
    mu = generate("mu", 4)
    assert a == b
    assert a != generate("random", 4, seed=12)
    for i in range(16):
        for j in range(16):
            assert a.entry(i, j) >= mu.entry(i, j)


def test_ultrametric_generator_is_ultrametric():
    d = generate("ultrametric", 3, level_scales=[F(1, 2), F(1, 5), F(1, 11)])
    for x, y, z in combinations(range(8), 3):
        assert d.entry(x, z) <= max(d.entry(x, y), d.entry(y, z))


def test_from_matrix_rejects_non_metric():
    with pytest.raises(InvalidParameterError):
        DyadicMetric.from_matrix([[0, 1], [1, 1]])
    with pytest.raises(InvalidParameterError):
        DyadicMetric.from_matrix([[0, 1, 2], [1, 0, 1], [2, 1, 0]])  # size 3


def test_degenerate_output_rejected():
    with pytest.raises(DegenerateMetricError):
        generate("ultrametric", 2, level_scales=[F(1, 2), F(0)])


# ---------------------------------------------------------------------------
# validation


def test_validate_metric_defect_example():
    diag = validate_metric([[0, 1, 3], [1, 0, 1], [3, 1, 0]])
    assert diag.max_triangle_defect == 1
    assert not diag.accepted


def test_validate_metric_symmetry_and_diagonal():
    diag = validate_metric([[0, 1], [2, 0]])
    assert diag.max_symmetry_defect == 1
    assert not diag.accepted
    diag2 = validate_metric([[1, 1], [1, 0]])
    assert diag2.max_diagonal_defect == 1
    assert not diag2.accepted


def test_validate_metric_positivity_scale_report():
    mu = generate("mu", 3)
    diag = validate_metric(mu)
    # pairs first differing within the top n levels sit at distance >= 2^-n
    assert diag.positivity_scale_report == {1: F(1, 2), 2: F(1, 4), 3: F(1, 8)}
    d = generate("random", 3, seed=9)
    rep = validate_metric(d).positivity_scale_report
    assert rep[1] >= rep[2] >= rep[3] > 0


def test_validate_metric_double_tolerance():
    d = generate("mu", 3, mode="double")
    arr = np.array(d.as_float())
    arr[0, 1] += 1e-13
    arr[1, 0] += 1e-13
    assert validate_metric(arr).accepted
    arr[0, 1] += 1.0
    assert not validate_metric(arr).accepted


# ---------------------------------------------------------------------------
# sup distance


def test_sup_distance_examples():
    mu = generate("mu", 3)
    assert sup_distance(mu, mu) == 0
    assert sup_distance(mu, mu.scaled(2)) == F(1, 2)
    with pytest.raises(InvalidParameterError):
        sup_distance(mu, generate("mu", 2))


# ---------------------------------------------------------------------------
# cylinder statistics and spread


def test_cylinder_stats_mu_depth2():
    st = cylinder_stats(generate("mu", 2), 1)
    assert st.inf(0, 1) == st.sup(0, 1) == F(1, 2)
    assert st.diams() == [F(1, 4), F(1, 4)]
    assert st.inf(0, 0) == 0


def test_cylinder_stats_middle_lambda():
    st = cylinder_stats(generate("middle_lambda", 2, lam=F(1, 3)), 1)
    assert st.inf(0, 1) == F(4, 9)
    assert st.sup(0, 1) == F(8, 9)


def test_cylinder_stats_full_level_is_singletons():
    d = generate("random", 3, seed=2)
    st = cylinder_stats(d, 3)
    assert all(v == 0 for v in st.diams())
    for i in range(8):
        for j in range(8):
            assert st.inf(i, j) == st.sup(i, j) == d.entry(i, j)


def test_cylinder_stats_match_bruteforce():
    for seed in (1, 2):
        d = generate("random", 4, seed=seed)
        for level in (1, 2, 3):
            st = cylinder_stats(d, level)
            inf, sup = brute_cylinder_minmax(d, level)
            B = 1 << level
            for a in range(B):
                for b in range(B):
                    assert st.inf(a, b) == inf[a][b]
                    assert st.sup(a, b) == sup[a][b]


def test_spread_examples_and_threshold():
    ml = generate("middle_lambda", 2, lam=F(1, 3))
    s = cylinder_spread(ml, 1)
    assert s.value == 2 and not s.within_threshold  # 2 is not < 2
    assert s.threshold == 2
    mu = generate("mu", 6)
    for n in range(1, 6):
        sp = cylinder_spread(mu, n)
        assert sp.value == 1 and sp.within_threshold
    assert spread_threshold(3) == F(4, 3)


def test_spread_rejects_full_level():
    d = generate("mu", 3)
    with pytest.raises(InvalidParameterError):
        cylinder_spread(d, 3)
    with pytest.raises(InvalidParameterError):
        cylinder_spread(d, 0)


def test_spread_scale_invariant_and_matches_bruteforce():
    for seed in (3, 4):
        d = generate("random", 4, seed=seed)
        for level in (1, 2, 3):
            got = cylinder_spread(d, level).value
            assert got == brute_spread(d, level)
            assert cylinder_spread(d.scaled(F(7, 3)), level).value == got


def test_spread_continuity_along_uniform_limits():
    # convex mixtures of two metrics converge uniformly; spreads converge too
    d = generate("random", 4, seed=8)
    e = generate("mu", 4)
    base = cylinder_spread(d, 2).value
    prev_gap = None
    for k in (4, 16, 64, 256):
        t = F(1, k)
        mixed = DyadicMetric.from_matrix(
            [[(1 - t) * d.entry(i, j) + t * e.entry(i, j) for j in range(16)]
             for i in range(16)], mode="rational", validate=False)
        assert sup_distance(mixed, d) <= t
        gap = abs(cylinder_spread(mixed, 2).value - base)
        if prev_gap is not None:
            assert gap <= prev_gap
        prev_gap = gap
    assert prev_gap <= F(1, 50)


def test_scatter_oracle_agrees_in_double_mode():
    d = generate("mu", 9)
    for level in (1, 4, 8):
        assert cylinder_spread(d, level).value == \
            scatter_spread_float(d.as_float(), 9, level) == 1.0


# ---------------------------------------------------------------------------
# density, disconnection


def test_net_density_examples():
    d = generate("mu", 3)
    assert net_density(d, range(8)) == 0
    assert net_density(d, representatives(3, 1)) == F(1, 4)
    x = 5
    assert net_density(d, [x]) == max(d.entry(x, y) for y in range(8))
    with pytest.raises(InvalidParameterError):
        net_density(d, [])


def test_disconnection_constant_examples():
    two = DyadicMetric.from_matrix([[0, F(3, 7)], [F(3, 7), 0]])
    assert disconnection_constant(two) == 1
    mu = generate("mu", 5)
    assert disconnection_constant(mu) == 1
    path3 = DyadicMetric.from_matrix(
        [[0, 1, 2, 2], [1, 0, 1, 2], [2, 1, 0, 2], [2, 2, 2, 0]])
    assert disconnection_constant(path3) == F(1, 2)


def test_disconnection_scale_invariant_and_le_one():
    for seed in (5, 6):
        d = generate("random", 4, seed=seed)
        c = disconnection_constant(d)
        assert 0 < c <= 1
        assert disconnection_constant(d.scaled(F(9, 4))) == c


def test_bottleneck_matches_minimax_closure():
    for seed in (7, 8):
        d = generate("random", 3, seed=seed)
        bn = bottleneck_matrix(d.data.num)
        oracle = minimax_closure(d.data.num.astype(object))
        np.fill_diagonal(oracle, 0)
        assert np.array_equal(bn.astype(object), oracle)


def test_lipschitz_constant_survives_uniform_limits():
    # if two metrics are uniformly close, Lipschitz constants transfer with
    # factor 1 + delta / min-offdiagonal
    rng = np.random.default_rng(0)
    for seed in (1, 2, 3):
        d = generate("random", 3, seed=seed)
        dk = generate("random", 3, seed=seed + 100)
        f = LipFn(tuple(F(int(v), 8) for v in rng.integers(-8, 9, 8)), 0)
        delta = sup_distance(d, dk)
        lhs = lip_const(f, d)
        rhs = lip_const(f, dk) * (1 + delta / d.min_offdiagonal())
        assert lhs <= rhs
