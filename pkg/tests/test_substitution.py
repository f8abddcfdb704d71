import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import column_number_bruteforce, expand, fixed_point_string, height_bruteforce
from scaling_entropy.substitution import (
    CYCLIC3,
    PERIOD_DOUBLING,
    THUE_MORSE,
    ColumnMap,
    SubstitutionError,
    analyze,
    classify_spectrum,
    column_maps,
    column_number,
    column_semigroup,
    fixed_point_prefix,
    from_json_dict,
    height,
    height_details,
    incidence_and_primitivity,
    predicted_scaling_sequence,
    validate_substitution,
)


def test_validate_thue_morse():
    sub = validate_substitution([[0, 1], [1, 0]])
    assert sub.seed_letter == 0
    assert sub.length == 2 and sub.alphabet_size == 2


@pytest.mark.parametrize(
    "rules, reason",
    [
        ([[0, 1], [0, 1]], "non-injective"),
        ([[0, 1], [1, 0, 0]], "length-mismatch"),
        ([[1, 0], [0, 0]], "no-seed-letter"),
        ([[0, 0]], "alphabet-too-small"),
        ([[0], [1]], "length-too-short"),
    ],
)
def test_validate_rejections(rules, reason):
    with pytest.raises(SubstitutionError) as info:
        validate_substitution(rules)
    assert info.value.reason == reason


def test_json_mapping_uses_alphabet_order():
    sub = from_json_dict({"alphabet": ["b", "a"], "rules": {"a": "ab", "b": "ba"}})
    # b -> index 0, a -> index 1
    assert sub.rules == ((0, 1), (1, 0))
    assert sub.letters == ("b", "a")


def test_json_rejects_multichar_letters():
    with pytest.raises(SubstitutionError, match="malformed"):
        from_json_dict({"alphabet": ["ab", "c"], "rules": {"ab": "cc", "c": "ab"}})


def test_explicit_seed_letter():
    sub = from_json_dict({"alphabet": ["0", "1"], "rules": {"0": "01", "1": "10"}, "seed_letter": "1"})
    assert sub.seed_letter == 1


def test_incidence():
    m, prim = incidence_and_primitivity(THUE_MORSE)
    assert m.tolist() == [[1, 1], [1, 1]] and prim
    m, prim = incidence_and_primitivity(validate_substitution([[0, 1], [1, 1]]))
    assert m.tolist() == [[1, 1], [0, 2]] and not prim
    _, prim = incidence_and_primitivity(validate_substitution([[0, 0], [1, 1]]))
    assert not prim


def test_incidence_rows_sum_to_length():
    m, _ = incidence_and_primitivity(CYCLIC3)
    assert (m.sum(axis=1) == 3).all()


def test_fixed_point_prefix():
    assert "".join(map(str, fixed_point_prefix(THUE_MORSE, 8)[:8])) == "01101001"
    assert "".join(map(str, fixed_point_prefix(PERIOD_DOUBLING, 8)[:8])) == "01000101"
    assert fixed_point_prefix(CYCLIC3, 1)[0] == 0


def test_fixed_point_is_fixed():
    u = fixed_point_prefix(CYCLIC3, 500)
    image = np.asarray(CYCLIC3.image(u.tolist()))
    assert (image[: len(u)] == u).all()


def test_column_maps_thue_morse():
    assert [f.table for f in column_maps(THUE_MORSE)] == [(0, 1), (1, 0)]
    assert {f.table for f in column_semigroup(THUE_MORSE)} == {(0, 1), (1, 0)}


@pytest.mark.parametrize("sub, c", [(THUE_MORSE, 2), (PERIOD_DOUBLING, 1), (CYCLIC3, 3)])
def test_column_number(sub, c):
    assert column_number(sub) == c
    assert column_number_bruteforce([list(r) for r in sub.rules]) == c


@pytest.mark.parametrize("sub", [THUE_MORSE, PERIOD_DOUBLING, CYCLIC3])
def test_height(sub):
    h, used = height_details(sub)
    assert h == 1
    assert h == height_bruteforce([list(r) for r in sub.rules], sub.seed_letter)
    assert used >= sub.length ** 4 * sub.alphabet_size


def test_height_above_one():
    # 0 -> 010, 1 -> 201, 2 -> 102: the letter 0 only recurs at even positions
    sub = validate_substitution([[0, 1, 0], [2, 0, 1], [1, 0, 2]])
    expected = height_bruteforce([list(r) for r in sub.rules], 0)
    assert expected == 2  # cross-check the oracle on a nontrivial case
    assert height(sub) == 2
    assert classify_spectrum(sub) == ("PurePoint" if column_number(sub) == 2 else "NotPurePoint")


def test_non_primitive_rejected():
    with pytest.raises(SubstitutionError, match="not-primitive"):
        column_number(validate_substitution([[0, 0], [1, 1]]))


def test_spectrum():
    assert classify_spectrum(PERIOD_DOUBLING) == "PurePoint"
    assert classify_spectrum(THUE_MORSE) == "NotPurePoint"
    assert classify_spectrum(CYCLIC3) == "NotPurePoint"


def test_predicted_scaling():
    assert predicted_scaling_sequence(PERIOD_DOUBLING, [1, 7, 1000]) == [1.0, 1.0, 1.0]
    assert predicted_scaling_sequence(THUE_MORSE, [1, 8]) == [1.0, 4.0]
    assert analyze(THUE_MORSE).predicted_scaling == "h_n = 1 + 1·log n"
    assert analyze(PERIOD_DOUBLING).predicted_scaling == "h_n = 1"


def _all_substitutions(s, q):
    words = list(itertools.product(range(s), repeat=q))
    for rules in itertools.product(words, repeat=s):
        try:
            sub = validate_substitution(rules)
        except SubstitutionError:
            continue
        if incidence_and_primitivity(sub)[1]:
            yield sub


def _closure_generations(sub):
    gens = column_maps(sub)
    seen, frontier, gen = set(gens), list(gens), 1
    while frontier:
        frontier = [h for f in frontier for g in gens if (h := f.then(g)) not in seen and not seen.add(h)]
        gen += 1
    return gen - 1


def test_column_number_matches_bruteforce_on_small_corpus():
    checked = 0
    for s in (2, 3):
        for q in (2, 3):
            for sub in _all_substitutions(s, q):
                if _closure_generations(sub) <= 3:
                    assert column_number(sub) == column_number_bruteforce([list(r) for r in sub.rules])
                    checked += 1
    assert checked > 100


def test_height_invariants_on_corpus():
    for sub in itertools.islice(_all_substitutions(3, 2), 60):
        h, _ = height_details(sub)
        assert math.gcd(h, sub.length) == 1
        u = fixed_point_prefix(sub, 4096)[:4096]
        pos = np.flatnonzero(u[1:] == u[0]) + 1
        assert all(p % h == 0 for p in pos)
        assert h == height_bruteforce([list(r) for r in sub.rules], sub.seed_letter, 4096)


def test_seed_choice_does_not_change_invariants():
    for sub in itertools.islice(_all_substitutions(3, 2), 200):
        seeds = [a for a in range(sub.alphabet_size) if sub.rules[a][0] == a]
        results = {(column_number(alt), height(alt)) for alt in
                   (validate_substitution(sub.rules, a) for a in seeds)}
        assert len(results) == 1


@settings(max_examples=40, deadline=None)
@given(st.sampled_from([THUE_MORSE, PERIOD_DOUBLING, CYCLIC3]), st.data())
def test_relabeling_invariance(sub, data):
    perm = data.draw(st.permutations(range(sub.alphabet_size)))
    alt = sub.relabel(perm)
    assert column_number(alt) == column_number(sub)
    assert height(alt) == height(sub)
    assert classify_spectrum(alt) == classify_spectrum(sub)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([THUE_MORSE, PERIOD_DOUBLING, CYCLIC3]), st.integers(1, 3), st.data())
def test_column_map_composition(sub, n, data):
    a = data.draw(st.integers(0, sub.alphabet_size - 1))
    k = data.draw(st.integers(0, sub.length ** n - 1))
    maps = column_maps(sub)
    digits = []
    for _ in range(n):
        k, r = divmod(k, sub.length)
        digits.append(r)
    # most significant digit is applied first
    composed = ColumnMap(tuple(range(sub.alphabet_size)))
    for j in reversed(digits):
        composed = composed.then(maps[j])
    k_orig = sum(d * sub.length ** i for i, d in enumerate(digits))
    assert expand([list(r) for r in sub.rules], a, n)[k_orig] == composed.table[a]
