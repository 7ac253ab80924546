"""Spectral entanglement of the emitted photon pair.

After two emitters behind a lossy dielectric slab have decayed, the state is
(conditionally) a two-photon wavepacket. Its joint spectral density J(w1, w2)
and the Schmidt spectrum of the one-photon reduced density matrix quantify
how entangled the two photons are in frequency: K_eff = 1 means a product of
two independent single-photon packets, larger K_eff means the slab's
resonances have written correlations into the pair.

Run:  python3 demos/photon_pair_entanglement.py     (~1 min)
"""

import numpy as np

from qed2x.model import config_from_dict
from qed2x.runner import run_simulation


def main():
    cfg = config_from_dict({
        "schema_version": 1,
        "emitters": [{"position": 0.75, "omega": 10.0, "d_eff": 0.224},
                     {"position": 3.0, "omega": 10.0, "d_eff": 0.224}],
        "environment": {"kind": "mirrored-waveguide", "slabs": [
            {"x1": 1.5, "x2": 2.5, "eps_real": 16.0, "eps_imag": 0.05}]},
        "grid": {"omega_min": 5.0, "omega_max": 15.0, "q": 128,
                 "rule": "gauss-legendre"},
        "initial_state": {"kind": "pair-excited", "pair": [1, 2]},
        "time": {"t_end": 40.0, "dt": 0.01},
        "outputs": {"observables": ["populations", "jsd"], "samples": 200},
    })
    result = run_simulation(cfg)
    j = result.jsd

    print("two emitters around a lossy slab (eps = 16 + 0.05i)\n")
    print(f"emission completeness  P_gg        = {j['p_gg']:.4f}")
    print(f"residual one-photon population     = {j['residual_p_b']:.2e}")
    print(f"one-photon purity Tr(rho^2)        = {j['purity']:.4f}")
    print(f"effective Schmidt number K_eff     = {j['k_eff']:.4f}")
    print(f"entanglement entropy               = {j['entropy_nats']:.4f} nats "
          f"({j['entropy_bits']:.3f} bits)")

    w = j["schmidt_weights"]
    print(f"\nleading Schmidt weights: "
          + ", ".join(f"{v:.3f}" for v in w[:6]))

    grid = result.config.grid
    integral = float(np.sum(np.outer(grid.weights, grid.weights) * j["jsd"]))
    print(f"JSD normalization check: integral = {integral:.12f}")
    if j["emission_incomplete"]:
        print("\n(note: a slow mirror-slab quasi-bound mode is still "
              "emitting, so the\n two-photon diagnostics are conditional "
              "on the already-emitted pair)")
    print("\nK_eff of ~4 means the slab resonances split the pair amplitude "
          "across\nseveral correlated spectral modes - the photons are "
          "frequency-entangled.")


if __name__ == "__main__":
    main()
