#!/usr/bin/env python3
"""Regenerate data/gagg.csv and data/bgo.csv.

Photoelectric coefficients come from the Elam et al. tabulation shipped with
xraydb (reliable up to 800 keV, extended above that by a log-log power law
fitted to the 700-800 keV segment). Compton coefficients are the free-electron
Klein-Nishina total cross-section times the material electron density, which
is the same scattering model the transport code samples from.

    pip install xraydb
    python3 tools/make_material_tables.py data/
"""
import math
import sys
import warnings
from pathlib import Path

import numpy as np
import xraydb

AVOGADRO = 6.02214076e23
R_E_CM = 2.8179403262e-13
ME_KEV = 510.99895

MATERIALS = {
    "gagg": ("Gd3Al2Ga3O12", 6.63),
    "bgo": ("Bi4Ge3O12", 7.13),
}

E_MIN_KEV = 10.0
E_MAX_KEV = 3500.0
N_LOG = 40
ELAM_MAX_KEV = 800.0
EDGE_HALF_GAP_KEV = 0.01


def kn_sigma_cm2(e_kev):
    k = e_kev / ME_KEV
    a = (1 + k) / k**2 * (2 * (1 + k) / (1 + 2 * k) - math.log(1 + 2 * k) / k)
    b = math.log(1 + 2 * k) / (2 * k)
    c = (1 + 3 * k) / (1 + 2 * k) ** 2
    return 2 * math.pi * R_E_CM**2 * (a + b - c)


def electron_density_per_cm3(formula, density):
    comp = xraydb.chemparse(formula)
    mass = sum(n * xraydb.atomic_mass(el) for el, n in comp.items())
    electrons = sum(n * xraydb.atomic_number(el) for el, n in comp.items())
    return density * AVOGADRO * electrons / mass


def photo_per_cm(formula, density, e_kev):
    if e_kev <= ELAM_MAX_KEV:
        return xraydb.material_mu(formula, e_kev * 1e3, density, kind="photo")
    lo = xraydb.material_mu(formula, 700e3, density, kind="photo")
    hi = xraydb.material_mu(formula, ELAM_MAX_KEV * 1e3, density, kind="photo")
    slope = math.log(hi / lo) / math.log(ELAM_MAX_KEV / 700.0)
    return hi * (e_kev / ELAM_MAX_KEV) ** slope


def energy_grid(formula):
    grid = set(np.geomspace(E_MIN_KEV, E_MAX_KEV, N_LOG).round(6).tolist())
    for el in xraydb.chemparse(formula):
        for edge in xraydb.xray_edges(el).values():
            e = edge.energy / 1e3
            if E_MIN_KEV < e - EDGE_HALF_GAP_KEV and e + EDGE_HALF_GAP_KEV < E_MAX_KEV:
                grid.add(round(e - EDGE_HALF_GAP_KEV, 6))
                grid.add(round(e + EDGE_HALF_GAP_KEV, 6))
    return sorted(grid)


def main(out_dir):
    warnings.simplefilter("ignore")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name, (formula, density) in MATERIALS.items():
        n_e = electron_density_per_cm3(formula, density)
        lines = ["energy_keV,mu_pe_per_mm,mu_compton_per_mm"]
        for e in energy_grid(formula):
            mu_pe = photo_per_cm(formula, density, e) / 10.0
            mu_c = kn_sigma_cm2(e) * n_e / 10.0
            lines.append(f"{e:.6f},{mu_pe:.6e},{mu_c:.6e}")
        (out / f"{name}.csv").write_text("\n".join(lines) + "\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "data")
