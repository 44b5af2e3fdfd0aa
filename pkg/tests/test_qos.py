import math

import numpy as np
import pytest

from qcells.mathfn import NO_FADING, OPTIMISTIC, PESSIMISTIC, RAYLEIGH, DomainError, FadingModel, imh, mh
from qcells.qos import (
    QosSpec, Regime, UnsupportedFormula, classify, mean_boundary_reliability_estimate, nu_heuristic,
    regularity_of_perturbed_lattice, select_nu, stringency, stringency_value, u_hat, u_hat_rayleigh,
)


def test_rayleigh_fig_parameters():
    rep = stringency(QosSpec(1.0, 0.8, 4.0))
    assert rep.sigma == pytest.approx(4.0, rel=1e-14)
    assert rep.rho == pytest.approx(math.sqrt(2), rel=1e-14)
    assert rep.regime is Regime.STRINGENT


def test_no_fading_is_theta():
    for u in (0.1, 0.5, 0.9):
        rep = stringency(QosSpec(0.5, u, 4.0, NO_FADING))
        assert rep.sigma == 0.5
        assert rep.regime is Regime.LAX


def test_rho_star():
    rep = stringency(QosSpec(1.0, 0.9, 4.0))
    assert rep.rho == pytest.approx(math.sqrt(3), rel=1e-14)
    assert rep.rho_star == pytest.approx(2.0736, abs=1e-4)
    assert rep.rho_star ** 4 == pytest.approx(imh(math.sqrt(0.9)), rel=1e-12)


@pytest.mark.parametrize("u", [0.05, 0.3, 0.8, 0.97])
def test_special_case_closed_forms(u):
    th = 1.7
    assert stringency_value(th, u, RAYLEIGH) == pytest.approx(th * imh(u), rel=1e-12)
    assert stringency_value(th, u, FadingModel(0.5, 0.5)) == pytest.approx(th * math.tan(math.pi * u / 2) ** 2, rel=1e-10)
    assert stringency_value(th, u, PESSIMISTIC) == pytest.approx(th / -math.log(u), rel=1e-12)
    assert stringency_value(th, u, OPTIMISTIC) == pytest.approx(-th * math.log1p(-u), rel=1e-12)


def test_pessimistic_over_optimistic_exceeds_two():
    for u in np.arange(1, 100) / 100:
        assert stringency_value(1, u, PESSIMISTIC) / stringency_value(1, u, OPTIMISTIC) > 2


@pytest.mark.parametrize("model", [RAYLEIGH, FadingModel(0.5, 0.5), FadingModel(2, 3), FadingModel(3, 0.7)])
def test_rho_star_exceeds_rho(model):
    for u in (0.05, 0.5, 0.95):
        rep = stringency(QosSpec(1.0, u, 3.5, model))
        assert rep.rho_star > rep.rho


def test_sigma_monotone():
    us = np.linspace(0.01, 0.99, 50)
    s = [stringency_value(1, u, FadingModel(2, 3)) for u in us]
    assert np.all(np.diff(s) > 0)
    ths = np.linspace(0.1, 10, 50)
    assert np.all(np.diff([stringency_value(t, 0.7, RAYLEIGH) for t in ths]) > 0)


@pytest.mark.parametrize("t,u", [(0.3, 0.8), (0.55, 0.2), (0.9, 0.6)])
def test_sf_symmetry(t, u):
    a = stringency(QosSpec(imh(t), u, 4.0)).rho ** 4
    b = stringency(QosSpec(imh(u), t, 4.0)).rho ** 4
    assert a == pytest.approx(imh(t) * imh(u), rel=1e-12)
    assert a == pytest.approx(b, rel=1e-12)


def test_classify_band():
    assert classify(1.0 + 5e-13) is Regime.BALANCED
    assert classify(1.0 + 1e-9) is Regime.STRINGENT
    assert classify(0.99) is Regime.LAX


def test_spec_validation():
    with pytest.raises(DomainError):
        QosSpec(0.0, 0.5)
    with pytest.raises(DomainError):
        QosSpec(1.0, 1.0)
    with pytest.raises(DomainError):
        QosSpec(1.0, 0.5, alpha=2.0)
    assert QosSpec(1, 0.5, 4).delta == 0.5


def test_nu_heuristic():
    assert nu_heuristic(0.0, 0.3) == 1.0
    assert nu_heuristic(0.5, 0.3) == pytest.approx((2 / math.pi) ** 0.85, rel=1e-14)
    assert nu_heuristic(0.5, 0.3) == pytest.approx(0.681, abs=1e-3)
    assert nu_heuristic(0.5, 1.0) == pytest.approx(0.798, abs=1e-3)
    d = np.linspace(0.05, 0.95, 30)
    assert np.all(np.diff([nu_heuristic(x, 0.6) for x in d]) < 0)
    with pytest.raises(DomainError):
        nu_heuristic(0.5, 0.1)


def test_regularity():
    assert regularity_of_perturbed_lattice(0) == 1
    assert regularity_of_perturbed_lattice(0.2) == 0.3
    assert regularity_of_perturbed_lattice(1 / 16) == pytest.approx(0.78125)


def test_u_hat():
    spec = QosSpec(1.0, 0.8, 4.0)
    rho = stringency(spec).rho
    assert u_hat(spec, rho, 1.0) == pytest.approx(0.8, rel=1e-12)
    assert u_hat(spec, rho, 0.676) == pytest.approx(0.898, abs=1e-3)
    assert u_hat(spec, rho, 0.676) == pytest.approx(u_hat_rayleigh(0.8, 0.676, 0.5), rel=1e-12)
    spec9 = QosSpec(1.0, 0.9, 4.0)
    assert u_hat(spec9, stringency(spec9).rho, 0.817) == pytest.approx(mh(9 / 0.817**2), rel=1e-12)


def test_mean_boundary_estimate():
    assert mean_boundary_reliability_estimate(0.8, 1.0, 0.5) == pytest.approx(0.8)
    assert mean_boundary_reliability_estimate(0.8, 0.676, 0.5) == pytest.approx(0.646, abs=1e-3)
    assert mean_boundary_reliability_estimate(0.8, 0.817, 0.5) == pytest.approx(0.7275, abs=1e-4)
    with pytest.raises(UnsupportedFormula):
        mean_boundary_reliability_estimate(0.8, 0.7, 0.5, FadingModel(2, 2))


def test_select_nu_priority():
    assert select_nu(0.5, explicit=0.9, eta_c=0.3, eta_qstar=0.5, g=0.3) == (0.9, "explicit")
    nu, src = select_nu(0.5, eta_c=0.3, eta_qstar=0.5, g=0.3)
    assert src == "measured_md" and nu == pytest.approx(0.6)
    assert select_nu(0.5, g=0.3)[1] == "heuristic"
    with pytest.raises(DomainError):
        select_nu(0.5)
