import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from emdtex.exceptions import GroupOutOfRange, ShapeMismatch
from emdtex.losses import (
    LossWeights,
    age_code,
    age_loss,
    build_loss_report,
    cycle_loss,
    identity_loss,
    l1_mean,
    reconstruction_loss,
    refactor_with_imf,
    shape_branch_loss,
    texture_branch_loss,
    total_loss,
)
from oracles import loop_l1_mean

finite = st.floats(-1e3, 1e3, allow_nan=False)


def test_default_weights():
    w = LossWeights()
    assert (w.lambda_rec, w.lambda_cyc, w.lambda_id, w.lambda_age, w.lambda_emd, w.lambda_s) == (
        10, 10, 1, 1, 0.3, 0.3
    )


def test_weights_validation():
    with pytest.raises(ValueError):
        LossWeights(lambda_rec=-1)
    with pytest.raises(ValueError):
        LossWeights.from_dict({"lambda_foo": 1})
    assert LossWeights.from_dict({"lambda_s": 2}).lambda_s == 2.0


class TestL1:
    def test_equal(self, rng):
        a = rng.random((4, 4))
        assert l1_mean(a, a) == 0.0

    def test_arithmetic(self):
        assert l1_mean([1, 2], [1, 0]) == 1.0

    def test_loop_oracle(self, rng):
        a, b = rng.standard_normal((2, 8, 8))
        assert l1_mean(a, b) == pytest.approx(loop_l1_mean(a, b), rel=1e-13)

    def test_mask(self):
        a = np.zeros((2, 2, 3))
        b = np.zeros((2, 2, 3))
        b[0, 0] = 9.0
        b[1, 1] = 3.0
        mask = np.array([[False, True], [True, True]])
        assert l1_mean(a, b, mask) == pytest.approx(3.0 * 3 / 9)

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatch):
            l1_mean(np.zeros(3), np.zeros(4))

    @settings(max_examples=100, deadline=None)
    @given(arrays(float, 6, elements=finite), arrays(float, 6, elements=finite), arrays(float, 6, elements=finite))
    def test_metric(self, a, b, c):
        assert l1_mean(a, b) == l1_mean(b, a) >= 0
        assert l1_mean(a, c) <= l1_mean(a, b) + l1_mean(b, c) + 1e-9

    def test_aliases(self, rng):
        a, b = rng.random((2, 3, 3))
        assert reconstruction_loss(a, b) == cycle_loss(a, b) == identity_loss(a, b) == l1_mean(a, b)


class TestAge:
    def test_first_group(self):
        z = age_code(1, 6).vector
        assert z.shape == (300,)
        assert np.all(z[:50] == 1) and np.all(z[50:] == 0)

    def test_last_group(self):
        z = age_code(6, 6).vector
        assert np.all(z[250:] == 1) and np.all(z[:250] == 0)

    @pytest.mark.parametrize("g", range(1, 7))
    def test_fifty_ones(self, g):
        z = age_code(g, 6).vector
        assert np.count_nonzero(z) == 50 and z.sum() == 50

    def test_orthogonal(self):
        codes = [age_code(g, 6).vector for g in range(1, 7)]
        gram = np.array([[a @ b for b in codes] for a in codes])
        np.testing.assert_array_equal(gram, 50 * np.eye(6))

    def test_out_of_range(self):
        with pytest.raises(GroupOutOfRange):
            age_code(0, 6)
        with pytest.raises(GroupOutOfRange):
            age_code(7, 6)

    def test_age_loss_zero(self):
        zt, zs = age_code(6), age_code(2)
        assert age_loss(zt.vector, zt, zs.vector, zs) == 0.0

    def test_age_loss_locality(self):
        zt, zs = age_code(6), age_code(2)
        e_gen = zt.vector.copy()
        e_gen[17] += 0.6
        assert age_loss(e_gen, zt, zs.vector, zs) == pytest.approx(0.6 / 300, rel=1e-12)

    def test_age_loss_oracle(self, rng):
        zt, zs = age_code(3), age_code(5)
        e_gen, e_real = rng.random((2, 300))
        expect = loop_l1_mean(e_gen, zt.vector) + loop_l1_mean(e_real, zs.vector)
        assert age_loss(e_gen, zt, e_real, zs) == pytest.approx(expect, rel=1e-13)

    def test_age_loss_length_mismatch(self):
        with pytest.raises(ShapeMismatch):
            age_loss(np.zeros(299), age_code(1), np.zeros(300), age_code(1))


class TestComposition:
    def test_refactor(self):
        w = LossWeights()
        assert refactor_with_imf(0.7, 0.0, w) == 0.7
        assert refactor_with_imf(1.0, 2.0, w) == pytest.approx(1.6, abs=1e-15)
        w0 = LossWeights(lambda_emd=0)
        assert refactor_with_imf(1.25, 99.0, w0) == 1.25

    def test_shape_branch(self):
        w = LossWeights()
        assert shape_branch_loss(0, 0, 0, w) == 0
        assert shape_branch_loss(0.1, 0.2, 0.5, w) == 3.5
        assert shape_branch_loss(0.3, 0.6, 1.5, w) == pytest.approx(3 * 3.5, rel=1e-15)

    def test_texture_branch(self):
        w = LossWeights()
        assert texture_branch_loss(0, 0, 0, 0, 0, w) == 0
        # 10*0.1 + 10*0.2 + 0.5 + 1*0.25 + 1*0.125
        assert texture_branch_loss(0.1, 0.2, 0.5, 0.25, 0.125, w) == 3.875

    def test_total(self):
        w = LossWeights()
        assert total_loss(2, 1, w) == 1.6
        assert total_loss(0, 1.25, w) == 1.25
        assert total_loss(123.0, 1.25, LossWeights(lambda_s=0)) == 1.25

    def test_report_consistent(self, rng):
        for _ in range(20):
            terms = dict(zip(
                ["rec_s", "cyc_s", "adv_s", "rec_t", "cyc_t", "adv_t", "rec_imf", "cyc_imf", "adv_imf", "age", "id"],
                rng.random(11),
            ))
            report = build_loss_report(**terms)
            assert report.total == LossWeights().lambda_s * report.shape_total + report.texture_total
            assert report.total >= 0

    def test_report_zero(self):
        assert build_loss_report().total == 0.0

    def test_report_check_detects_tampering(self):
        import dataclasses

        r = build_loss_report(rec_s=0.5)
        with pytest.raises(AssertionError):
            dataclasses.replace(r, total=r.total + 1).check()
