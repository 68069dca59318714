import math

import numpy as np
import pytest
import torch

from jetssm.errors import InvalidArgumentError, ShapeError
from jetssm.ssm import (
    DiagonalSSM,
    DiscreteSSM,
    Kernel,
    causal_conv,
    continuous_kernel,
    discretize,
    discretize_bilinear,
    discretize_zoh,
    recurrent_step,
    vandermonde_kernel,
    zero_state,
)
from jetssm.ssm.vandermonde import vandermonde


def random_discrete(rng, n, conj_pairs):
    radius = rng.uniform(0.3, 0.98, n)
    theta = rng.uniform(-math.pi, math.pi, n)
    a_bar = torch.as_tensor(radius * np.exp(1j * theta))
    b_bar = torch.as_tensor(rng.normal(size=n) + 1j * rng.normal(size=n))
    c = torch.as_tensor(rng.normal(size=n) + 1j * rng.normal(size=n))
    return DiscreteSSM(a_bar, b_bar, c, conj_pairs=conj_pairs)


def random_continuous(rng, n, conj_pairs=True):
    a = -np.exp(rng.uniform(-2, 1, n)) + 1j * rng.uniform(-8, 8, n)
    b = rng.normal(size=n) + 1j * rng.normal(size=n)
    c = rng.normal(size=n) + 1j * rng.normal(size=n)
    return DiagonalSSM.from_a(a, b, c, float(np.exp(rng.uniform(np.log(1e-3), np.log(1e-1)))), conj_pairs)


def naive_kernel(dssm: DiscreteSSM, length: int) -> np.ndarray:
    a_bar, b_bar, c = (x.numpy() for x in (dssm.a_bar, dssm.b_bar, dssm.c))
    scale = 2.0 if dssm.conj_pairs else 1.0
    x = np.zeros_like(a_bar)
    out = []
    for step in range(length):
        x = a_bar * x + b_bar * (1.0 if step == 0 else 0.0)
        out.append(scale * (c * x).sum().real)
    return np.array(out)


def test_zoh_closed_form():
    ssm = DiagonalSSM.from_a([-1.0], [1.0], [1.0], math.log(2.0), conj_pairs=False)
    d = discretize_zoh(ssm)
    assert d.a_bar.real.item() == pytest.approx(0.5, abs=1e-15)
    assert d.b_bar.real.item() == pytest.approx(0.5, abs=1e-15)
    assert d.a_bar.imag.item() == 0.0


def test_zoh_tiny_step_uses_series():
    ssm = DiagonalSSM.from_a([-0.5 + 3j, -2.0 - 1j], [1.0 + 1j, 2.0], [1.0, 1.0], 1e-12)
    d = discretize_zoh(ssm)
    assert torch.allclose(d.a_bar, torch.ones(2, dtype=torch.complex128), atol=1e-11)
    assert torch.allclose(d.b_bar, 1e-12 * ssm.b, rtol=1e-10, atol=0)


def test_bilinear_closed_form():
    ssm = DiagonalSSM.from_a([-1.0], [1.0], [1.0], 2.0, conj_pairs=False)
    d = discretize_bilinear(ssm)
    assert abs(d.a_bar.item()) == pytest.approx(0.0, abs=1e-15)
    assert d.b_bar.real.item() == pytest.approx(1.0)


def test_bilinear_zero_pole_is_identity():
    ssm = DiagonalSSM.from_a([0.0], [2.0], [1.0], 0.1, conj_pairs=False, validate=False)
    d = discretize_bilinear(ssm)
    assert d.a_bar.real.item() == pytest.approx(1.0)
    assert d.b_bar.real.item() == pytest.approx(0.2)


@pytest.mark.parametrize("method", ["zoh", "bilinear"])
def test_discretization_matches_extended_precision(method):
    mpmath = pytest.importorskip("mpmath")
    mpmath.mp.dps = 50
    rng = np.random.default_rng(7)
    for _ in range(20):
        ssm = random_continuous(rng, 6)
        d = discretize(ssm, method)
        dt = mpmath.mpf(float(ssm.dt))
        for n in range(6):
            a = mpmath.mpc(complex(ssm.a[n]))
            b = mpmath.mpc(complex(ssm.b[n]))
            if method == "zoh":
                a_bar = mpmath.exp(dt * a)
                b_bar = (a_bar - 1) / a * b
            else:
                a_bar = (1 + dt / 2 * a) / (1 - dt / 2 * a)
                b_bar = dt * b / (1 - dt / 2 * a)
            for got, want in ((d.a_bar[n], a_bar), (d.b_bar[n], b_bar)):
                err = abs(mpmath.mpc(complex(got)) - want) / abs(want)
                assert float(err) <= 1e-12


def test_continuous_kernel_examples():
    ssm = DiagonalSSM.from_a([-1.0], [1.0], [1.0], 0.1, conj_pairs=False)
    assert continuous_kernel(ssm, 1.0).item() == pytest.approx(math.exp(-1.0), abs=1e-15)
    pairs = DiagonalSSM.from_a([-0.5 + 1j, -1.0], [1.0, 2.0], [0.5 - 1j, 1.0], 0.1)
    assert continuous_kernel(pairs, 0.0).item() == pytest.approx(2 * (0.5 + 2.0))


def test_continuous_kernel_matches_rk4_impulse_response():
    rng = np.random.default_rng(3)
    ssm = random_continuous(rng, 4)
    a, b, c = ssm.a.numpy(), ssm.b.numpy(), ssm.c.numpy()
    h, x, t = 1e-3, b.copy(), 0.0
    grid = {round(k * 0.25, 6): None for k in range(1, 9)}
    for step in range(1, 2001):
        k1 = a * x
        k2 = a * (x + h / 2 * k1)
        k3 = a * (x + h / 2 * k2)
        k4 = a * (x + h * k3)
        x = x + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        t = round(step * h, 6)
        if t in grid:
            grid[t] = 2 * (c * x).sum().real
    for t, want in grid.items():
        assert continuous_kernel(ssm, t).item() == pytest.approx(want, abs=1e-6)


def test_kernel_geometric_series():
    d = DiscreteSSM(torch.tensor([0.5 + 0j], dtype=torch.complex128), torch.tensor([1 + 0j], dtype=torch.complex128),
                    torch.tensor([1 + 0j], dtype=torch.complex128), conj_pairs=False)
    k = vandermonde_kernel(d, 4)
    assert k.length == 4
    assert k.k.tolist() == pytest.approx([1.0, 0.5, 0.25, 0.125])


def test_kernel_length_one_is_cb():
    rng = np.random.default_rng(0)
    d = random_discrete(rng, 5, conj_pairs=True)
    k = vandermonde_kernel(d, 1)
    assert k.k.item() == pytest.approx(2 * (d.c * d.b_bar).sum().real.item())


def test_kernel_rejects_zero_length():
    d = random_discrete(np.random.default_rng(0), 3, conj_pairs=True)
    with pytest.raises(InvalidArgumentError):
        vandermonde_kernel(d, 0)
    with pytest.raises(InvalidArgumentError):
        Kernel(torch.zeros(0))


def test_kernel_matches_naive_recurrence():
    rng = np.random.default_rng(2024)
    worst = 0.0
    for case in range(200):
        n = int(rng.integers(1, 17))
        length = int(rng.integers(1, 257))
        d = random_discrete(rng, n, conj_pairs=bool(case % 2))
        # every third case forces the chunked path with an awkward chunk size
        threshold, chunk = (0, int(rng.integers(1, 40))) if case % 3 == 0 else (1 << 16, 1024)
        k = vandermonde_kernel(d, length, chunk_size=chunk, materialize_threshold=threshold).k.numpy()
        worst = max(worst, np.abs(k - naive_kernel(d, length)).max())
    assert worst <= 1e-10


def test_chunked_and_materialized_kernels_agree():
    d = random_discrete(np.random.default_rng(5), 16, conj_pairs=True)
    full = vandermonde_kernel(d, 3000).k
    chunked = vandermonde_kernel(d, 3000, chunk_size=97, materialize_threshold=0).k
    assert torch.allclose(full, chunked, atol=1e-12, rtol=0)


def test_kernel_broadcasts_over_channels():
    rng = np.random.default_rng(11)
    ssms = [random_discrete(rng, 4, conj_pairs=True) for _ in range(3)]
    stacked = DiscreteSSM(*(torch.stack([getattr(s, f) for s in ssms]) for f in ("a_bar", "b_bar", "c")))
    k = vandermonde_kernel(stacked, 32).k
    assert k.shape == (3, 32)
    for h, s in enumerate(ssms):
        assert torch.allclose(k[h], vandermonde_kernel(s, 32).k, atol=1e-12)


def test_kernel_decays_geometrically():
    rng = np.random.default_rng(9)
    for _ in range(10):
        d = random_discrete(rng, 8, conj_pairs=True)
        k = vandermonde_kernel(d, 200).k.abs()
        rho = d.a_bar.abs().max().item()
        bound = 2 * (d.c * d.b_bar).abs().sum().item() * rho ** torch.arange(200, dtype=torch.float64)
        assert (k <= bound + 1e-12).all()


def test_causal_conv_identity_and_shift():
    u = torch.arange(1.0, 9.0, dtype=torch.float64)
    impulse = torch.zeros(8, dtype=torch.float64)
    impulse[0] = 1.0
    assert torch.allclose(causal_conv(u, impulse), u, atol=1e-12)
    delayed = torch.zeros(8, dtype=torch.float64)
    delayed[1] = 1.0
    assert causal_conv(u, delayed).tolist() == pytest.approx([0, 1, 2, 3, 4, 5, 6, 7], abs=1e-12)


def test_causal_conv_matches_direct_sum():
    rng = np.random.default_rng(1)
    u, k = rng.normal(size=257), rng.normal(size=257)
    direct = np.array([sum(k[j] * u[t - j] for j in range(t + 1)) for t in range(257)])
    y = causal_conv(torch.as_tensor(u), torch.as_tensor(k)).numpy()
    assert np.abs(y - direct).max() <= 1e-9


def test_causal_conv_is_causal():
    rng = np.random.default_rng(4)
    u = torch.as_tensor(rng.normal(size=64))
    k = torch.as_tensor(rng.normal(size=64))
    v = u.clone()
    v[40:] += 10.0
    assert torch.allclose(causal_conv(u, k)[:40], causal_conv(v, k)[:40], atol=1e-12)


def test_causal_conv_is_linear():
    rng = np.random.default_rng(6)
    u, v, k = (torch.as_tensor(rng.normal(size=257)) for _ in range(3))
    lhs = causal_conv(2.5 * u - 0.75 * v, k)
    rhs = 2.5 * causal_conv(u, k) - 0.75 * causal_conv(v, k)
    assert (lhs - rhs).abs().max().item() <= 1e-9


def test_causal_conv_rejects_length_mismatch():
    with pytest.raises(InvalidArgumentError):
        causal_conv(torch.zeros(8, dtype=torch.float64), torch.zeros(7, dtype=torch.float64))


def test_recurrent_step_examples():
    d = random_discrete(np.random.default_rng(8), 6, conj_pairs=True)
    state, y = recurrent_step(d, zero_state(d), 0.0)
    assert torch.count_nonzero(state) == 0
    assert y.item() == 0.0
    _, y0 = recurrent_step(d, zero_state(d), 1.0)
    assert y0.item() == pytest.approx(vandermonde_kernel(d, 1).k.item(), abs=1e-12)


@pytest.mark.parametrize("seed", range(100))
def test_recurrence_matches_convolution(seed):
    rng = np.random.default_rng(seed)
    channels, length = 3, 128
    ssm = DiagonalSSM.s4d_init(8, channels=(channels,), generator=torch.Generator().manual_seed(seed))
    d = discretize(ssm, "zoh" if seed % 2 else "bilinear")
    u = torch.as_tensor(rng.normal(size=(channels, length)))
    conv = causal_conv(u, vandermonde_kernel(d, length))
    state = zero_state(d)
    streamed = []
    for t in range(length):
        state, y = recurrent_step(d, state, u[:, t])
        streamed.append(y)
    assert (torch.stack(streamed, dim=-1) - conv).abs().max().item() <= 1e-8


@pytest.mark.parametrize("seed", range(20))
def test_discrete_systems_are_stable(seed):
    rng = np.random.default_rng(seed)
    n = 8
    ssm = DiagonalSSM(
        torch.as_tensor(rng.uniform(-5, 3, n)),
        torch.as_tensor(rng.uniform(-100, 100, n)),
        torch.ones(n, dtype=torch.complex128),
        torch.ones(n, dtype=torch.complex128),
        torch.as_tensor(rng.uniform(np.log(1e-4), np.log(1.0))),
    )
    for method in ("zoh", "bilinear"):
        assert (discretize(ssm, method).a_bar.abs() < 1).all()


def _kernel_errors(ssm, method, levels=5):
    grid = torch.arange(1, 9, dtype=torch.float64) / 8
    truth = continuous_kernel(ssm, grid)
    errors = []
    for level in range(levels):
        dt = 1.0 / (16 * 2**level)
        fine = DiagonalSSM(ssm.log_neg_real, ssm.imag, ssm.b, ssm.c, torch.tensor(math.log(dt)), ssm.conj_pairs)
        k = vandermonde_kernel(discretize(fine, method), int(round(1 / dt)) + 1).k
        idx = torch.round(grid / dt).long()
        estimate = k[idx] / dt if method == "zoh" else (k[idx - 1] + k[idx]) / (2 * dt)
        errors.append((estimate - truth).abs().max().item())
    return errors


def test_discretization_converges():
    ssm = DiagonalSSM.from_a([-0.5, -0.5 + 1j * math.pi], [1.0, 1.0], [0.3 + 0.1j, 0.2 - 0.4j], 0.1)
    zoh = _kernel_errors(ssm, "zoh")
    bilinear = _kernel_errors(ssm, "bilinear")
    for errors in (zoh, bilinear):
        assert all(a > b for a, b in zip(errors, errors[1:]))
    assert bilinear[-1] <= zoh[-1]
    assert 0.8 <= math.log2(zoh[-2] / zoh[-1]) <= 1.2
    assert 1.7 <= math.log2(bilinear[-2] / bilinear[-1]) <= 2.3


def test_s4d_init_layout():
    ssm = DiagonalSSM.s4d_init(8, channels=(3,), dt_min=1e-3, dt_max=1e-1, generator=torch.Generator().manual_seed(0))
    assert ssm.n_stored == 4
    assert ssm.n_state == 8
    assert torch.allclose(ssm.a[0].real, torch.full((4,), -0.5, dtype=torch.float64))
    assert torch.allclose(ssm.a[0].imag, math.pi * torch.arange(4, dtype=torch.float64))
    assert ((ssm.dt >= 1e-3) & (ssm.dt <= 1e-1)).all()


def test_invalid_ssms_are_rejected():
    with pytest.raises(InvalidArgumentError):
        DiagonalSSM.s4d_init(7)
    with pytest.raises(InvalidArgumentError):
        DiagonalSSM.from_a([0.1], [1.0], [1.0], 0.1)
    with pytest.raises(ShapeError):
        DiagonalSSM.from_a([-1.0, -2.0], [1.0], [1.0, 1.0], 0.1)


@pytest.mark.parametrize("chunk", [64, 5])
def test_vandermonde_adjoint_matches_finite_differences(chunk):
    rng = np.random.default_rng(12)
    a_bar = torch.as_tensor(0.9 * np.exp(1j * rng.uniform(-3, 3, 4)), dtype=torch.complex128).requires_grad_()
    w = torch.as_tensor(rng.normal(size=4) + 1j * rng.normal(size=4), dtype=torch.complex128).requires_grad_()
    assert torch.autograd.gradcheck(lambda a, b: vandermonde(a, b, 24, chunk, 2.0), (a_bar, w))
