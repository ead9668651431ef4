"""Physical constants and named resonance presets.

Internally hbar = c = 1.  HBAR converts widths in eV to lifetimes in s.
"""
from __future__ import annotations

from dataclasses import dataclass

from .spectral import ResonanceLine

HBAR = 6.582119569e-16  # eV s (CODATA 2018)
NS = 1e-9


@dataclass(frozen=True)
class Preset:
    name: str
    e_r: float          # eV
    gamma: float        # eV, from the measured linewidth
    gamma_err: float    # eV, 1 sigma
    tau: float | None   # s, independent lifetime measurement
    tau_err: float
    note: str

    def line(self) -> ResonanceLine:
        return ResonanceLine(self.e_r, self.gamma)


PRESETS = {
    "sodium-3p": Preset(
        "sodium-3p", e_r=2.104429, gamma=4.0538e-8, gamma_err=0.0091e-8,
        tau=16.254e-9, tau_err=0.022e-9,
        note="Na 3p 2P3/2: linewidth 9.802(22) MHz, i.e. Gamma = 4.0538(91)e-8 eV, "
             "tau = hbar/Gamma = 16.237(35) ns; direct lifetime 16.254(22) ns. "
             "E_R is the D2 photon energy."),
    "fe57": Preset(
        "fe57", e_r=14.4125e3, gamma=4.7e-9, gamma_err=0.0,
        tau=1.4e-7, tau_err=0.0,
        note="57Fe first excited state (14.4 keV Moessbauer line): Gamma = 4.7e-9 eV, "
             "tau = 1.4e-7 s; width and lifetime agree within 10 percent."),
    "pi0": Preset(
        "pi0", e_r=134.9768e6, gamma=HBAR / 8.97e-17, gamma_err=0.0,
        tau=8.97e-17, tau_err=2.78e-18,
        note="neutral pion: direct lifetime (8.97 +- 0.22 +- 0.17)e-17 s (width from hbar/tau); "
             "E_R is the pi0 rest energy."),
}


def preset(name: str) -> Preset:
    try:
        return PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
