"""Demo-network tests: coefficient bookkeeping, decoding, failure rates."""

import pytest

from mmtsim import butterfly
from mmtsim.errors import InvalidParameterError
from mmtsim.gf import Field
from mmtsim.topology import max_flow

GF256 = Field(8)
GF2 = Field(1)


def test_network_shape():
    assert len(butterfly.DEMO_NODES) == 7
    assert len(butterfly.DEMO_EDGES) == 8
    assert max_flow(butterfly.DEMO_EDGES, {"P1"}, "P3") == 2
    assert max_flow(butterfly.DEMO_EDGES, {"P1"}, "P7") == 1


def test_gf2_all_ones_merged_vector_is_zero():
    rep = butterfly.run_trials(GF2, seed=0, trials=1, coeff_mode="ones")
    res = rep.results[0]
    for use in res.uses:
        assert use.injection_left == (1, 1)
        assert use.merge == (1, 1)
        # (1*1 + 1*1, 1*1 + 1*1) = (0, 0) in characteristic 2
        assert use.merged_vector == (0, 0)
        # the direct edge into P3 carries the xor combination d1+d2
        assert use.sink_vectors["P3"][0] == (1, 1)
    # P3 sees (1,1) and (0,0): rank 1, so it cannot decode; P7 sees only
    # zero vectors
    assert res.sink_rank["P3"] == 1
    assert res.sink_rank["P7"] == 0
    assert not res.success


def test_merged_vector_matches_recode_formula_every_trial():
    rep = butterfly.run_trials(GF256, seed=5, trials=50)
    f = GF256
    for res in rep.results:
        for use in res.uses:
            c1, c2 = use.injection_left
            c3, c4 = use.injection_right
            c5, c6 = use.merge
            assert use.merged_vector == (
                f.mul(c5, c1) ^ f.mul(c6, c3),
                f.mul(c5, c2) ^ f.mul(c6, c4),
            )


def test_sinks_decode_iff_rank_two():
    rep = butterfly.run_trials(GF256, seed=1, trials=200)
    for res in rep.results:
        for sink in butterfly.DEMO_SINKS:
            assert res.sink_decoded[sink] == (res.sink_rank[sink] == 2)
            if res.sink_decoded[sink]:
                assert res.sink_messages[sink] is not None
            else:
                assert res.sink_messages[sink] is None


def test_p3_receives_direct_and_merged_vectors():
    rep = butterfly.run_trials(GF256, seed=2, trials=5)
    for res in rep.results:
        use = res.uses[0]
        vectors = use.sink_vectors["P3"]
        assert vectors[0] == use.injection_left      # via the direct edge
        assert vectors[1] == use.merged_vector       # via the merge node
        assert use.sink_vectors["P7"] == [use.merged_vector]


def test_failure_rate_under_5_percent_1000_seeds():
    rep = butterfly.run_trials(GF256, seed=42, trials=1000)
    assert rep.failure_rate <= 0.05


def test_single_use_cannot_serve_p7():
    # with one use the P7 cut carries one packet: never rank 2
    rep = butterfly.run_trials(GF256, seed=3, trials=20, uses_per_trial=1)
    for res in rep.results:
        assert res.sink_rank["P7"] <= 1
        assert not res.sink_decoded["P7"]


def test_rank_audit_no_violations_1000_seeds():
    rep = butterfly.run_trials(GF256, seed=42, trials=1000)
    assert butterfly.audit_rank_bounds(rep) == []


def test_nonzero_mode_improves_reliability():
    uniform = butterfly.run_trials(GF256, seed=4, trials=300, coeff_mode="uniform")
    nonzero = butterfly.run_trials(GF256, seed=4, trials=300, coeff_mode="nonzero")
    assert nonzero.failure_rate <= uniform.failure_rate + 0.02


def test_invalid_arguments():
    with pytest.raises(InvalidParameterError):
        butterfly.run_trials(GF256, trials=0)
    with pytest.raises(InvalidParameterError):
        butterfly.run_trials(GF256, trials=1, uses_per_trial=0)
    with pytest.raises(InvalidParameterError):
        butterfly.run_trials(GF256, trials=1, coeff_mode="bogus")


def test_deterministic_given_seed():
    a = butterfly.run_trials(GF256, seed=9, trials=10)
    b = butterfly.run_trials(GF256, seed=9, trials=10)
    assert [r.sink_rank for r in a.results] == [r.sink_rank for r in b.results]
    assert [r.uses[0].merge for r in a.results] == [r.uses[0].merge for r in b.results]
