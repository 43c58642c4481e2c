import numpy as np
import pytest

from syncdet import rng as rngmod
from syncdet.channels import (BurstChannelParams, ChannelParams, id_awgn_transmit,
                              ids_transmit, perturb_csi, snr_to_sigma2, wb_transmit)


def test_clean_channel_is_identity():
    y = rngmod.stream(301, 0).integers(0, 2, size=200, dtype=np.uint8)
    r, log = ids_transmit(y, ChannelParams(pi=0, pd=0, ps=0), rngmod.stream(301, 1))
    assert (r == y).all() and log.insertions() == 0 and log.deletions() == 0


def test_forced_substitution_complements():
    y = rngmod.stream(302, 0).integers(0, 2, size=200, dtype=np.uint8)
    r, _ = ids_transmit(y, ChannelParams(pi=0, pd=0, ps=0.999999999),
                        rngmod.stream(302, 1))
    assert (r == 1 - y).all()


def test_event_rates_within_4_sigma():
    """10^6 symbols at pi=pd=0.02: counts match the channel law."""
    pi = pd = 0.02
    n = 1_000_000
    y = rngmod.stream(303, 0).integers(0, 2, size=n, dtype=np.uint8)
    _, log = ids_transmit(y, ChannelParams(pi=pi, pd=pd, ps=0.0), rngmod.stream(303, 1))
    # deletions: Binomial(n, pd / (1 - pi)); insertions: sum of geometric runs
    d_rate = pd / (1.0 - pi)
    d_mean, d_sd = n * d_rate, np.sqrt(n * d_rate * (1 - d_rate))
    assert abs(log.deletions() - d_mean) < 4 * d_sd
    i_mean = n * pi / (1.0 - pi)
    i_sd = np.sqrt(n * pi / (1.0 - pi) ** 2)
    assert abs(log.insertions() - i_mean) < 4 * i_sd


def test_soft_channel_sign_recovery():
    y = rngmod.stream(304, 0).integers(0, 2, size=300, dtype=np.uint8)
    params = ChannelParams(pi=0, pd=0, ps=0, sigma2=1e-12)
    r, _ = id_awgn_transmit(y, params, rngmod.stream(304, 1))
    assert (np.sign(r) == 1.0 - 2.0 * y).all()


def test_soft_channel_sample_mean():
    rng = rngmod.stream(305, 0)
    y = rng.integers(0, 2, size=50_000, dtype=np.uint8)
    sigma2 = 0.5
    r, _ = id_awgn_transmit(y, ChannelParams(pi=0, pd=0, ps=0, sigma2=sigma2),
                            rngmod.stream(305, 1))
    expect = (1.0 - 2.0 * y).mean()
    tol = 4 * np.sqrt(sigma2 / len(y))
    assert abs(r.mean() - expect) < tol


def test_soft_channel_rejects_substitution():
    with pytest.raises(ValueError):
        id_awgn_transmit(np.zeros(4, dtype=np.uint8),
                         ChannelParams(pi=0, pd=0, ps=0.1, sigma2=0.2),
                         rngmod.stream(306, 0))


@pytest.mark.parametrize("kind", ["ids", "idawgn", "wbids", "wbidawgn"])
def test_length_law_and_replay(kind):
    rng_y = rngmod.stream(307, 0)
    for trial in range(30):
        y = rng_y.integers(0, 2, size=int(rng_y.integers(1, 120)), dtype=np.uint8)
        rng = rngmod.stream(307, 1, trial)
        soft = kind.endswith("awgn")
        if kind in ("ids", "idawgn"):
            params = ChannelParams(pi=0.06, pd=0.05, ps=0.0 if soft else 0.1,
                                   sigma2=0.3 if soft else None)
            r, log = (id_awgn_transmit if soft else ids_transmit)(y, params, rng)
        else:
            params = BurstChannelParams(pbi=0.02, pbd=0.02, ps=0.0 if soft else 0.1,
                                        sigma2=0.3 if soft else None)
            r, log = wb_transmit(y, params, rng, soft=soft)
        assert len(r) == len(y) + log.insertions() - log.deletions()
        clean = log.replay(y, soft=soft)
        if soft:
            assert np.allclose(r - log.noise, clean, atol=1e-12)
        else:
            assert (r == clean).all()


def test_determinism():
    y = rngmod.stream(308, 0).integers(0, 2, size=500, dtype=np.uint8)
    params = ChannelParams(pi=0.03, pd=0.03, ps=0.0, sigma2=0.25)
    r1, _ = id_awgn_transmit(y, params, rngmod.stream(308, 7))
    r2, _ = id_awgn_transmit(y, params, rngmod.stream(308, 7))
    assert (r1 == r2).all()


def test_wb_degenerates_without_bursts():
    y = rngmod.stream(309, 0).integers(0, 2, size=200, dtype=np.uint8)
    r, log = wb_transmit(y, BurstChannelParams(pbi=0, pbd=0, ps=0.0),
                         rngmod.stream(309, 1), soft=False)
    assert (r == y).all()


def test_wb_mean_burst_length_is_3():
    """Mean inserted symbols per insertion event over >= 1e5 events."""
    y = np.zeros(1_000_000, dtype=np.uint8)
    params = BurstChannelParams(pbi=0.1, pbd=0.0, ps=0.0)
    _, log = wb_transmit(y, params, rngmod.stream(310, 0), soft=False)
    bursts = np.array(log.ins_bursts)
    assert len(bursts) >= 100_000
    se = bursts.std() / np.sqrt(len(bursts))
    assert abs(bursts.mean() - 3.0) < 4 * se
    assert set(np.unique(bursts)) == {2, 3, 4}


def test_wb_tail_deletion_truncates():
    y = np.zeros(2, dtype=np.uint8)
    params = BurstChannelParams(pbi=0.0, pbd=0.9, ps=0.0)
    for t in range(20):
        r, log = wb_transmit(y, params, rngmod.stream(311, t), soft=False)
        if log.deletions():
            assert log.deletions() == 2 and len(r) == 0
            return
    raise AssertionError("no deletion burst drawn in 20 streams")


def test_perturb_csi_identity_when_zero():
    p = ChannelParams(pi=0.02, pd=0.02, ps=0.0)
    assert perturb_csi(p, rngmod.stream(312, 0), delta_e=0.0) == p


def test_perturb_csi_default_scale():
    """Default jitter scale is 0.4 * pd; empirical std within 2%."""
    p = ChannelParams(pi=0.02, pd=0.02, ps=0.0)
    draws = np.array([perturb_csi(p, rngmod.stream(313, i)).pd for i in range(100_000)])
    assert abs(draws.std() - 0.008) < 0.02 * 0.008
    assert draws.min() >= 1e-6 and draws.max() <= 0.3


def test_perturb_keeps_other_fields():
    p = ChannelParams(pi=0.02, pd=0.02, ps=0.05, sigma2=0.3)
    q = perturb_csi(p, rngmod.stream(314, 0))
    assert q.ps == p.ps and q.sigma2 == p.sigma2
    assert q.pi != p.pi and q.pd != p.pd


def test_param_validation():
    with pytest.raises(ValueError):
        ChannelParams(pi=0.6, pd=0.5)
    with pytest.raises(ValueError):
        ChannelParams(pi=-0.1, pd=0.1)
    with pytest.raises(ValueError):
        ChannelParams(pi=0.1, pd=0.1, sigma2=0.0)
    with pytest.raises(ValueError):
        BurstChannelParams(pbi=0.5, pbd=0.5)
    assert snr_to_sigma2(7.0) == pytest.approx(10 ** -0.7)
