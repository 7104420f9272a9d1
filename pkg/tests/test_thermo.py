from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given

from qreset.qmath import LN2, bloch_to_density, relative_entropy, von_neumann_entropy
from qreset.swapreset import gibbs_qubit, swap_entropy_production, swap_heat
from qreset.thermo import (
    ThermoReport,
    entropy_flow_single_bath,
    entropy_production,
    landauer_bound,
    mismatch_residual,
    report,
    second_law_check,
)
from strategies import bloch_vectors, random_bloch

GROUND = bloch_to_density([0, 0, 1])
MIXED = np.eye(2, dtype=complex) / 2


def test_entropy_flow_single_bath():
    assert entropy_flow_single_bath(2.0, 4.0) == 0.5
    with pytest.raises(ValueError):
        entropy_flow_single_bath(1.0, 0.0)
    with pytest.raises(ValueError):
        entropy_flow_single_bath(1.0, -1.0)


def test_landauer_bound_examples():
    assert landauer_bound(LN2, 0.0) == pytest.approx(LN2)
    assert landauer_bound(LN2, 0.0, T=2.0) == pytest.approx(2 * LN2)
    assert landauer_bound(0.3, 0.3) == 0.0
    with pytest.raises(ValueError):
        landauer_bound(LN2, 0.0, T=0.0)


def test_entropy_production_example():
    # Erasing I/2 to a pure state with ln 2 of heat is exactly reversible.
    assert entropy_production(LN2, LN2, 0.0) == pytest.approx(0.0)
    assert entropy_production(1.0, LN2, 0.0) == pytest.approx(1.0 - LN2)


def test_mismatch_residual():
    assert mismatch_residual(1.0, 0.25, 0.75, 0.0) == 0.0
    assert mismatch_residual(1.0, 0.25, 0.5, 0.1) == pytest.approx(0.35)


def test_second_law_check():
    assert second_law_check([0.0, 0.3, -5e-7])
    assert not second_law_check([0.0, -1e-5])
    assert second_law_check(-1e-3, tol=1e-2)


def test_report_of_an_exact_swap():
    # Reset by swap with a Gibbs qubit: alpha0 = alpha_tau = gamma and D[rho_tau || alpha_tau] = 0.
    bath = gibbs_qubit(2.0)
    g = bath.gamma
    rng = np.random.default_rng(2)
    ep_alpha = swap_entropy_production(g, bath)
    for a in random_bloch(rng, 10):
        rho = bloch_to_density(a)
        rep = report(rho, g, swap_heat(rho, bath), g, g, g)
        assert isinstance(rep, ThermoReport)
        assert rep.EP == pytest.approx(swap_entropy_production(rho, bath), abs=1e-12)
        assert rep.Dtau == 0.0 and rep.eps_final == 0.0
        assert mismatch_residual(rep.EP, ep_alpha, rep.D0, rep.Dtau) == pytest.approx(0.0, abs=1e-12)
        assert rep.Q - landauer_bound(rep.S0, rep.Stau) == pytest.approx(rep.D0, abs=1e-12)


@given(bloch_vectors(max_norm=0.999), bloch_vectors(max_norm=0.9))
def test_report_fields_are_consistent(a, b):
    rho, alpha = bloch_to_density(a), bloch_to_density(b)
    rep = report(rho, GROUND, 1.5, alpha, GROUND, GROUND, work=0.7)
    assert rep.S0 == pytest.approx(von_neumann_entropy(rho))
    assert rep.Stau == pytest.approx(0.0, abs=1e-12)
    assert rep.EP == pytest.approx(1.5 - rep.S0, abs=1e-12)
    assert rep.D0 == pytest.approx(relative_entropy(rho, alpha), abs=1e-12)
    assert rep.kl + rep.coherence == pytest.approx(rep.D0, abs=1e-10)
    assert 0.0 <= rep.coherence <= LN2
    d = rep.as_dict()
    assert d["W"] == 0.7 and d["Q"] == 1.5 and len(d) == 11


def test_report_eps_final():
    rep = report(MIXED, MIXED, 0.0, MIXED, MIXED, GROUND)
    assert rep.eps_final == pytest.approx(0.5)
