"""Retrieval fidelity against efficiency and against added noise."""

from qmemtwin.experiments import FidelityConfig, run_fidelity_sweep

grid = (0.0, 0.25, 0.5, 0.75, 1.0)
for kind in ("single_photon", "coherent"):
    recs = run_fidelity_sweep([FidelityConfig("efficiency", kind, grid=grid)])
    print(kind, [round(r.observables["fidelity"], 4) for r in recs])

# noise at unit efficiency: the SNR falls steadily while the fidelity saturates
for r in run_fidelity_sweep([FidelityConfig("noise", "single_photon", grid=(0.0, 0.1, 0.5, 1.0))]):
    print(f"n_bar_B={r.coords['n_bar_B']:.2f}  F={r.observables['fidelity']:.4f}  SNR={r.observables['snr']:.3g}")

for r in run_fidelity_sweep([FidelityConfig("registry", "coherent")]):
    o = r.observables
    print(f"{r.coords['memory']:24s} eta_e2e={o['eta_e2e']:.3f} mu_1={o['mu_1']:.3g} F={o['fidelity']:.4f}")
