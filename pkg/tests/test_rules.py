import random

import pytest

from ecatest.core import Configuration
from ecatest.rules import (
    META_NAMES,
    MetaError,
    PatternDomainError,
    UnknownRule,
    builtin_meta,
    h_table_from_callable,
    pattern_str,
    resolve_rule_name,
    transport_meta,
    trivial_rule,
    window_pattern,
)


def test_classify_examples():
    maj = builtin_meta("maj")
    assert maj.classify("101") == "nonfinal"
    assert maj.classify("110") == "final"
    orr = builtin_meta("or")
    assert orr.classify("1") == "final"
    assert orr.classify("0") == "nonfinal"
    with pytest.raises(PatternDomainError):
        maj.classify("11")


def test_final_sets_match_catalog():
    assert builtin_meta("maj").final_patterns == {0b111, 0b110, 0b011,
                                                  0b000, 0b001, 0b100}
    assert builtin_meta("fih").nonfinal_patterns == {0b000, 0b111}
    assert builtin_meta("fuh").nonfinal_patterns == {0b000, 0b111}
    assert builtin_meta("or").final_patterns == {1}
    assert builtin_meta("and").final_patterns == {0}


def test_partition_sizes():
    for name in META_NAMES:
        meta = builtin_meta(name)
        total = 1 << meta.width
        assert len(meta.final_patterns) + len(meta.nonfinal_patterns) == total
        assert not (meta.final_patterns & meta.nonfinal_patterns)


def test_f_involution_and_composition():
    for name in META_NAMES:
        meta = builtin_meta(name)
        for b in (0, 1):
            for p in (0, 1):
                for q in (0, 1):
                    assert meta.f_fwd(meta.f_fwd(b, p, q), p, q) == b
                    for p2 in (0, 1):
                        for q2 in (0, 1):
                            assert (meta.f_fwd(meta.f_fwd(b, p, q), p2, q2)
                                    == meta.f_fwd(b, p ^ p2, q ^ q2))


def test_f_examples():
    maj, mno, fuh = builtin_meta("maj"), builtin_meta("min"), builtin_meta("fuh")
    for b in (0, 1):
        for p in (0, 1):
            for q in (0, 1):
                assert maj.f_fwd(b, p, q) == b
                assert mno.f_fwd(b, p, q) == b ^ p
                assert fuh.f_fwd(b, p, q) == b ^ p ^ q


def test_h_bijective_per_parity():
    for name in META_NAMES:
        meta = builtin_meta(name)
        bf = meta.nonfinal_patterns
        for p in (0, 1):
            for q in (0, 1):
                image = {meta.h_fwd(t, p, q) for t in bf}
                assert image == bf


def test_h_examples():
    maj = builtin_meta("maj")
    for p in (0, 1):
        for x in (0, 1, 2, 3):
            expect = 0b010 if (p ^ (x & 1)) == 0 else 0b101
            assert maj.h_fwd(0b010, p, x) == expect
    fih = builtin_meta("fih")
    for tau in (0b000, 0b111):
        assert fih.h_fwd(tau, 0, 5) == tau
        assert fih.h_fwd(tau, 1, 5) == tau ^ 0b111
    fuh = builtin_meta("fuh")
    for tau in (0b000, 0b111):
        for p in (0, 1):
            assert fuh.h_fwd(tau, p, 3) == tau


def test_h_bwd():
    assert builtin_meta("maj").h_bwd(0b101, 1, 0) == 0b010
    for name in META_NAMES:
        meta = builtin_meta(name)
        for tau in meta.nonfinal_patterns:
            for p in (0, 1):
                for q in (0, 1):
                    assert meta.h_bwd(meta.h_fwd(tau, p, q), p, q) == tau
                    assert meta.h_fwd(meta.h_bwd(tau, p, q), p, q) == tau
    with pytest.raises(PatternDomainError):
        builtin_meta("maj").h_fwd(0b111, 0, 0)


def test_h_callable_guard_rejects_distance_dependence():
    with pytest.raises(MetaError):
        h_table_from_callable(lambda tau, p, ell: tau if ell < 4 else tau ^ 0b111,
                              {0b000, 0b111}, 3)


def test_finalize_interval_or():
    orr = builtin_meta("or")
    sigma = Configuration.from_string("10000001000")
    out = orr.finalize_interval(sigma, 0, 7)
    assert out.to_string() == "11111111000"
    # whole-ring case
    out = orr.finalize_interval(sigma, 7, 7)
    assert out.to_string() == "1" * 11
    with pytest.raises(MetaError):
        orr.finalize_interval(sigma, 1, 7)  # sigma(1) is not final


def test_finalize_interval_maj_copies_nearest_final():
    maj = builtin_meta("maj")
    sigma = Configuration.from_string("11010011")
    out = maj.finalize_interval(sigma, 1, 6)
    for i in range(1, 7):
        assert window_pattern(out.bits, i, 1) in maj.final_patterns
    # locations already final keep their value
    for i in range(1, 7):
        if window_pattern(sigma.bits, i, 1) in maj.final_patterns:
            assert out[i] == sigma[i]
    assert out[0] == sigma[0] and out[7] == sigma[7]


def test_finalize_interval_fih_parity():
    fih = builtin_meta("fih")
    sigma = Configuration.from_string("01000010")
    assert window_pattern(sigma.bits, 1, 1) in fih.final_patterns
    out = fih.finalize_interval(sigma, 1, 6)
    for i in range(1, 7):
        assert window_pattern(out.bits, i, 1) in fih.final_patterns


def test_plant_final_or():
    orr = builtin_meta("or")
    sigma = Configuration.zeros(8)
    out, zp = orr.plant_final(sigma, 3, 1, 0, 0)
    assert zp == 4 and out[4] == 1
    out, zp = orr.plant_final(sigma, 3, 1, 0, 0, side="left")
    assert zp == 2 and out[2] == 1


def test_plant_final_maj_example():
    maj = builtin_meta("maj")
    sigma = Configuration.from_string("00101000")
    assert window_pattern(sigma.bits, 3, 1) == 0b101
    out, zp = maj.plant_final(sigma, 3, 1, 0, 0)
    assert zp == 4
    assert window_pattern(out.bits, zp, 1) == 0b011


def test_plant_final_min_gamma_dependence():
    mno = builtin_meta("min")
    sigma = Configuration.from_string("00101000")
    out, zp = mno.plant_final(sigma, 3, 0, 1, 0)
    assert zp == 4
    assert window_pattern(out.bits, zp, 1) == 0b011
    assert mno.f_fwd(out[zp], 1, ((zp - 3) & 1) ^ 0) == 0


def test_plant_final_rejects_bad_args():
    maj = builtin_meta("maj")
    with pytest.raises(MetaError):
        maj.plant_final(Configuration.from_string("11100111"), 1, 1, 0, 0)
    orr = builtin_meta("or")
    with pytest.raises(MetaError):
        orr.plant_final(Configuration.zeros(8), 3, 0, 0, 0)  # nu=0 not a center


def test_and_is_transport_of_or():
    orr, andm = builtin_meta("or"), builtin_meta("and")
    regen = transport_meta(orr, "and2")
    assert regen.final_patterns == andm.final_patterns
    assert regen.rule == andm.rule
    assert (regen.h_table == andm.h_table).all()
    # nand is the table transport of nor
    assert trivial_rule("nand") == trivial_rule("nor").complement()


def test_builtin_meta_catalog():
    maj = builtin_meta("maj")
    assert maj.k == 1 and maj.rule.wolfram_code == 232
    orr = builtin_meta("or")
    assert orr.k == 0 and orr.rule.wolfram_code == 254
    assert builtin_meta("fih").rule.wolfram_code == 77
    assert builtin_meta("fuh").rule.wolfram_code == 178
    assert builtin_meta("min").rule.wolfram_code == 23
    with pytest.raises(UnknownRule):
        builtin_meta("xor")


def test_resolve_rule_name():
    assert resolve_rule_name("maj") == ("meta", "maj")
    assert resolve_rule_name("NAND") == ("trivial", "nand")
    assert resolve_rule_name("wolfram:232") == ("meta", "maj")
    assert resolve_rule_name("wolfram:255") == ("trivial", "all1")
    for bad in ("wolfram:110", "rule30", "xor"):
        with pytest.raises(UnknownRule):
            resolve_rule_name(bad)


def test_final_centers():
    assert builtin_meta("or").final_centers() == {1}
    assert builtin_meta("and").final_centers() == {0}
    assert builtin_meta("maj").final_centers() == {0, 1}
    assert builtin_meta("fih").final_centers() == {0, 1}


def test_pattern_str():
    assert pattern_str(0b110, 3) == "110"
    assert pattern_str(1, 1) == "1"
