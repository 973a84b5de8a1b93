import numpy as np
import pytest

from cmispread.analytics import (
    DecayProfile,
    analytic_cmi_norm,
    analytic_rescaled,
    analytic_xdec,
    analytic_xdec_rescaled,
    critical_time,
    extract_xdec,
    k1k2_model,
    rescale,
    unrescale,
)


def test_analytic_cmi_norm_values():
    assert analytic_cmi_norm(10, 5, 0.0) == 10
    # 2*100*(1 - 100*1.5*2^-9) = 200 * (1 - 0.29296875)
    assert abs(analytic_cmi_norm(100, 0, 1.5 * 2**-9) - 141.40625) < 1e-12
    p = 0.01
    assert analytic_cmi_norm(60, 3, p) == 0.0  # t > t_c = 50
    with pytest.raises(ValueError):
        analytic_cmi_norm(1, 1, 0.5)
    with pytest.raises(ValueError):
        analytic_cmi_norm(-1, 0, 0.1)


def test_analytic_xdec_values():
    assert analytic_xdec(7, 0.0) == 7.0
    assert abs(analytic_xdec(49, 0.01) - 1249.5) < 1e-9
    with pytest.raises(ValueError):
        analytic_xdec(50, 0.01)  # t = t_c
    # monotone divergence towards t_c
    p = 0.02
    prev = 0.0
    for t in np.linspace(0, critical_time(p) * 0.999, 50):
        value = analytic_xdec(float(t), p)
        assert value >= prev
        prev = value
    assert analytic_xdec(critical_time(p) * 0.9999, p) > 1e3


def test_xdec_is_root_of_cmi():
    rng = np.random.default_rng(0)
    for _ in range(100):
        p = float(rng.uniform(1e-3, 0.49))
        t = float(rng.uniform(0.0, 0.99 * critical_time(p)))
        xd = analytic_xdec(t, p)
        assert analytic_cmi_norm(t, xd, p) == pytest.approx(0.0, abs=1e-9)
        if xd > 1e-6:
            assert analytic_cmi_norm(t, xd * 0.9, p) > 0


def test_rescaled_forms():
    assert analytic_xdec_rescaled(0.0) == 0.0
    assert abs(analytic_xdec_rescaled(0.5) - 0.75) < 1e-15
    with pytest.raises(ValueError):
        analytic_xdec_rescaled(1.0)
    with pytest.raises(ValueError):
        analytic_rescaled(1.2, 0.0)


def test_rescale_p_independence():
    # rescale(analytic) equals the p-free form exactly, for any p
    rng = np.random.default_rng(1)
    for _ in range(100):
        p = float(rng.uniform(1e-4, 0.49))
        t_tilde = float(rng.uniform(0.0, 0.99))
        x_tilde = float(rng.uniform(0.0, 3.0))
        t, x = t_tilde / (2 * p), x_tilde / (2 * p)
        tt, xx, ii = rescale(t, x, analytic_cmi_norm(t, x, p), p)
        assert abs(float(tt) - t_tilde) < 1e-12
        assert abs(float(xx) - x_tilde) < 1e-12
        assert abs(float(ii) - analytic_rescaled(t_tilde, x_tilde)) < 1e-12


def test_rescale_roundtrip_and_domain():
    t, x, i = rescale(10.0, 4.0, 2.5, 0.01)
    tb, xb, ib = unrescale(t, x, i, 0.01)
    assert (float(tb), float(xb), float(ib)) == (10.0, 4.0, 2.5)
    with pytest.raises(ValueError):
        rescale(1, 1, 1, 0.0)


def test_k1k2_model():
    assert k1k2_model(0, 5, 0.01) == (10.0, 0.0)
    assert k1k2_model(7, 5, 0.0) == (10.0, 70.0)
    m, p = 3, 0.02
    tc = critical_time(p)
    k1, k2 = k1k2_model(tc, m, p)
    assert k1 == 0.0
    assert abs(k2 - m / (2 * p)) < 1e-9
    k1b, k2b = k1k2_model(tc + 5, m, p)
    assert k1b == 0.0 and k2b == k2


def test_k1k2_reproduces_cmi():
    rng = np.random.default_rng(2)
    for _ in range(200):
        m = int(rng.integers(1, 10))
        p = float(rng.uniform(1e-3, 0.4))
        t = float(rng.uniform(0, critical_time(p)))
        x = float(rng.uniform(0, 3 * t + 1))
        k1, k2 = k1k2_model(t, m, p)
        cmi = max(k2 - min(k1 * x, k2), 0.0)
        assert abs(cmi - m * analytic_cmi_norm(t, x, p)) < 1e-8


def test_k1_is_derivative_of_k2():
    m, p = 4, 0.015
    h = 1e-6
    for t in (0.5, 3.0, 10.0, 25.0):
        if t + h >= critical_time(p):
            continue
        k2p = k1k2_model(t + h, m, p)[1]
        k2m = k1k2_model(t - h, m, p)[1]
        k1, _ = k1k2_model(t, m, p)
        assert abs((k2p - k2m) / (2 * h) - k1) < 1e-4


def _line_profile(step=0.5):
    x = np.arange(0.0, 6.0, step)
    return DecayProfile(x=x, values=np.maximum(10 - 2 * x, 0.0), n_blocks=64, t=5)


def test_extract_xdec_exact_line():
    res = extract_xdec(_line_profile())
    assert not res.rejected
    assert abs(res.x_dec - 5.0) < 1e-9


def test_extract_xdec_matches_analytic_front():
    # profiles generated from the closed form must return its exact root
    for t, p in ((20, 0.01), (60, 0.005), (15, 0.02)):
        x = np.arange(1.0, 1.6 * analytic_xdec(t, p), 1.0)
        v = np.array([analytic_cmi_norm(t, float(xx), p) for xx in x])
        prof = DecayProfile(x=x, values=v, n_blocks=10_000, t=t)
        res = extract_xdec(prof)
        assert not res.rejected
        assert abs(res.x_dec - analytic_xdec(t, p)) < 1e-6


def test_extract_xdec_line_plus_tail():
    # linear decay handing over to an exponential tail, as in mean profiles
    x = np.arange(1.0, 12.5, 0.5)
    v = np.maximum(10 - 2 * x, 0.5 * 2.0 ** (-(x - 5)))
    prof = DecayProfile(x=x, values=v, n_blocks=64, t=5)
    res = extract_xdec(prof)
    assert not res.rejected
    # independent least-squares oracle on the same window
    ref = v[0]
    sel = (v >= 0.2 * ref) & (v <= 0.8 * ref)
    coef, *_ = np.linalg.lstsq(
        np.vstack([x[sel], np.ones(sel.sum())]).T, v[sel], rcond=None
    )
    oracle = -coef[1] / coef[0]
    assert abs(res.x_dec - oracle) < 1e-9
    assert abs(res.x_dec - 5.0) < 0.3


def test_extract_xdec_scaling_invariance():
    # the intercept depends only on the profile's shape
    prof = _line_profile()
    res1 = extract_xdec(prof)
    scaled = DecayProfile(x=prof.x, values=prof.values * 37.5, n_blocks=64, t=5)
    res2 = extract_xdec(scaled)
    assert abs(res1.x_dec - res2.x_dec) < 1e-12


def test_extract_xdec_rejections():
    x = np.arange(1.0, 9.0)
    flat = DecayProfile(x=x, values=np.full(8, 3.0), n_blocks=16, t=1)
    res = extract_xdec(flat)
    assert res.rejected and "boundary" in res.rejected_reason

    rising = DecayProfile(x=x, values=np.linspace(0.1, 3.0, 8), n_blocks=16, t=1)
    res = extract_xdec(rising)
    assert res.rejected

    zero = DecayProfile(x=x, values=np.zeros(8), n_blocks=16, t=1)
    assert extract_xdec(zero).rejected

    narrow = DecayProfile(
        x=np.array([1.0, 2.0, 3.0, 4.0]),
        values=np.array([8.0, 0.01, 0.005, 0.0]),
        n_blocks=16,
        t=1,
    )
    res = extract_xdec(narrow)
    assert res.rejected and "fewer than 2" in res.rejected_reason

    with pytest.raises(ValueError):
        extract_xdec(DecayProfile(x=x[:3], values=np.zeros(3), n_blocks=16, t=1))


def test_extract_xdec_rejects_staircase_extrapolation():
    # two window points on a flat step would extrapolate past the support
    x = np.arange(1.0, 20.0)
    v = np.zeros_like(x)
    v[:5] = [5.5, 2.5, 2.3, 0.1, 0.05]
    res = extract_xdec(DecayProfile(x=x, values=v, n_blocks=64, t=5))
    assert res.rejected and "support" in res.rejected_reason


def test_decay_profile_validation():
    with pytest.raises(ValueError):
        DecayProfile(x=np.array([1.0, 1.0, 2.0]), values=np.zeros(3), n_blocks=8, t=1)
    with pytest.raises(ValueError):
        DecayProfile(x=np.array([1.0, 2.0]), values=np.zeros(3), n_blocks=8, t=1)


def test_collapse_curve_validation():
    from cmispread.analytics import CollapseCurve

    good = CollapseCurve(
        t_tilde=np.array([0.1, 0.3, 0.6]),
        x_dec_tilde=np.array([0.1, 0.35, 0.9]),
        p=0.01,
        m=4,
    )
    assert good.t_tilde.size == 3
    with pytest.raises(ValueError):
        CollapseCurve(np.array([0.1, 1.0]), np.array([0.1, 0.2]), 0.01, 4)
    with pytest.raises(ValueError):
        CollapseCurve(np.array([0.1, 0.2]), np.array([0.3, 0.2]), 0.01, 4)
    with pytest.raises(ValueError):
        CollapseCurve(np.array([0.1]), np.array([-0.2]), 0.01, 4)
