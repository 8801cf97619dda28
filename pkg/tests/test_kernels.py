import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rasec.domain import AcquisitionDomain
from rasec.errors import ConfigError, DomainError
from rasec.kernels import (KernelFamily, KernelSpec, export_covariance_contour, gram_matrix,
                           kernel_eval, kernel_from_dict)

SE = KernelSpec("SE", sigma_f=1.0, l=4.0)
OU = KernelSpec("OU", l=3.5)
SEOU = KernelSpec("SE_OU", sigma_f=1.0, l1=4.0, l2=3.5, alpha=1.0, beta=1.0)

coords = st.floats(-25, 25, allow_nan=False)
points = st.tuples(coords, coords)


def test_scalar_values():
    assert kernel_eval(SE, (1.0, 2.0), (1.0, 2.0)) == 1.0
    assert kernel_eval(SE, (0, 0), (4, 0)) == pytest.approx(0.6065306597126334, abs=1e-12)
    assert kernel_eval(OU, (0, 0), (0, 3.5)) == pytest.approx(0.36787944117144233, abs=1e-12)
    assert kernel_eval(SEOU, (0, 0), (4, 0)) == pytest.approx(0.19342660460039252, abs=1e-12)


@pytest.mark.parametrize("R", [1.0, 7.3, 50.0, 70.71])
def test_thin_plate_zero_at_radius(R):
    tp = KernelSpec("TP", R=R)
    assert abs(kernel_eval(tp, (0, 0), (R, 0))) < 1e-9 * max(1.0, R**2)
    assert kernel_eval(tp, (3, 3), (3, 3)) == pytest.approx(R**2)


def test_thin_plate_beyond_radius_raises():
    with pytest.raises(DomainError):
        kernel_eval(KernelSpec("TP", R=5.0), (0, 0), (6, 0))


def test_thin_plate_needs_radius():
    with pytest.raises(ConfigError):
        kernel_eval(KernelSpec("TP"), (0, 0), (1, 0))


@pytest.mark.parametrize("kwargs", [
    {"family": "SE", "l": 0.0},
    {"family": "SE", "sigma_f": -1.0},
    {"family": "SE_OU", "alpha": 0.0, "beta": 0.0},
    {"family": "SE_OU", "alpha": -1.0},
    {"family": "TP", "R": 0.0},
    {"family": "Matern"},
])
def test_invalid_specs(kwargs):
    with pytest.raises(ConfigError):
        KernelSpec(**kwargs)


def test_family_parsing():
    assert KernelSpec("se-ou").family is KernelFamily.SE_OU
    assert kernel_from_dict({"name": "x", "family": "OU", "l": 2}).l == 2.0


@settings(max_examples=100, deadline=None)
@given(points, points)
def test_symmetry(a, b):
    tp = KernelSpec("TP", R=80.0)
    for spec in (SE, OU, SEOU, tp):
        assert kernel_eval(spec, a, b) == kernel_eval(spec, b, a)


@settings(max_examples=100, deadline=None)
@given(points, points, points)
def test_stationarity(a, b, shift):
    for spec in (SE, OU, SEOU):
        a2 = (a[0] + shift[0], a[1] + shift[1])
        b2 = (b[0] + shift[0], b[1] + shift[1])
        assert kernel_eval(spec, a2, b2) == pytest.approx(kernel_eval(spec, a, b), abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(points, points)
def test_reduction_to_se_and_ou(a, b):
    se_like = KernelSpec("SE_OU", sigma_f=1.3, l1=4.0, alpha=1.0, beta=0.0)
    se = KernelSpec("SE", sigma_f=1.3, l=4.0)
    assert kernel_eval(se_like, a, b) == pytest.approx(kernel_eval(se, a, b), abs=1e-12)
    ou_like = KernelSpec("SE_OU", sigma_f=1.0, l2=3.5, alpha=0.0, beta=1.0)
    assert kernel_eval(ou_like, a, b) == pytest.approx(kernel_eval(OU, a, b), abs=1e-12)


def test_monotone_decay():
    r = np.linspace(0, 60, 601)
    for spec in (SE, OU, SEOU):
        k = spec.of_distance(r)
        assert np.all(np.diff(k) < 0)


def test_gram_single_point():
    assert gram_matrix(SE, [(3.0, 4.0)]).tolist() == [[1.0]]


@pytest.mark.parametrize("seed", range(10))
def test_gram_psd(seed):
    rng = np.random.default_rng(seed)
    pts = rng.uniform(-25, 25, size=(rng.integers(2, 30), 2))
    for spec in (SE, OU, SEOU, KernelSpec("SE_OU", alpha=0.75, beta=0.25)):
        K = gram_matrix(spec, pts)
        assert np.array_equal(K, K.T)
        eig = np.linalg.eigvalsh(K)
        assert eig.min() >= -1e-8 * eig.max()


def test_gram_psd_five_points_se():
    pts = np.random.default_rng(5).uniform(-25, 25, size=(5, 2))
    assert np.linalg.eigvalsh(gram_matrix(SE, pts)).min() >= -1e-10


def test_gram_thin_plate_radius_from_points():
    pts = [(0.0, 0.0), (3.0, 4.0), (1.0, 1.0)]
    K = gram_matrix(KernelSpec("TP"), pts)
    assert K[0, 1] == pytest.approx(0.0, abs=1e-9)
    assert K[0, 0] == pytest.approx(25.0)


def test_contour_export(tmp_path):
    dom = AcquisitionDomain(25.0, 1.0)
    K_se = export_covariance_contour(KernelSpec("SE", l=4.0), dom, tmp_path / "se.csv")
    rows = (tmp_path / "se.csv").read_text().splitlines()
    assert len(rows) == 51 and all(len(r.split(",")) == 51 for r in rows)
    assert np.all(np.diag(K_se) == 1.0)
    assert "\r" not in (tmp_path / "se.csv").read_text()

    K_tp = export_covariance_contour(KernelSpec("TP"), dom, tmp_path / "tp.csv")
    assert abs(K_tp[0, -1]) < 1e-9 * K_tp[0, 0]
    assert abs(K_tp[-1, 0]) < 1e-9 * K_tp[0, 0]

    K_seou = export_covariance_contour(SEOU, dom, tmp_path / "seou.csv")
    assert np.all(K_seou <= K_se + 1e-15)


def test_contour_band_widths(tmp_path):
    # off-diagonal reach at 6 mm: SE narrowest, TP widest (relative to its diagonal)
    dom = AcquisitionDomain(25.0, 1.0)
    rel = {}
    for name, spec in {"SE": KernelSpec("SE", l=4.0), "OU": KernelSpec("OU", l=4.0),
                       "TP": KernelSpec("TP")}.items():
        K = export_covariance_contour(spec, dom, tmp_path / f"{name}.csv")
        rel[name] = K[25, 37] / K[25, 25]
    assert rel["SE"] < rel["OU"] < rel["TP"]
    assert math.isfinite(rel["TP"])
