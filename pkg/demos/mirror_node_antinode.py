"""Node vs antinode placement in front of a mirror.

A mirror at x = 0 imposes a standing-wave mode structure. Two doubly-excited
emitters placed at field *nodes* (x = 0.5, 1.0 wavelengths) interfere
destructively with their mirror images: part of the excitation never decays,
and the surviving coherence is locked into the antisymmetric Bell state.
Moved to *antinodes* (x = 0.74, 0.76), both photons leave and the pair relaxes
to the ground state, passing transiently through the symmetric Bell state.

This is the full two-excitation hierarchy (both photons tracked), run at a
reduced frequency resolution so it finishes quickly.

Run:  python3 demos/mirror_node_antinode.py      (~1 min)
"""

from qed2x.model import config_from_dict
from qed2x.runner import run_simulation


def scenario(positions):
    return config_from_dict({
        "schema_version": 1,
        "emitters": [{"position": p, "omega": 10.0, "d_eff": 0.224}
                     for p in positions],
        "environment": {"kind": "mirrored-waveguide", "slabs": []},
        "grid": {"omega_min": 5.0, "omega_max": 15.0, "q": 96,
                 "rule": "gauss-legendre"},
        "initial_state": {"kind": "pair-excited", "pair": [1, 2]},
        "time": {"t_end": 30.0, "dt": 0.01},
        "outputs": {"observables": ["populations", "density_matrix"],
                    "samples": 300},
    })


def report(label, result):
    dm = result.series["density_matrix"]
    rec = result.records
    excited = rec["p_c"][-1] + rec["p_b"][-1]
    print(f"{label}:")
    print(f"  residual excited population  {excited:.4f}")
    print(f"  ground-state probability     {dm['P_gg'][-1]:.4f}")
    print(f"  Bell fidelities at the end   F+ = {dm['F_plus'][-1]:.4f}, "
          f"F- = {dm['F_minus'][-1]:.4f}")
    print(f"  peak symmetric-Bell fidelity {dm['F_plus'].max():.4f}")


def main():
    print("two excited emitters in front of a mirror (x in wavelengths)\n")
    report("nodes x = {0.5, 1.0}", run_simulation(scenario([0.5, 1.0])))
    print()
    report("antinodes x = {0.74, 0.76}", run_simulation(scenario([0.74, 0.76])))
    print("\nNode placement traps excitation and distills the antisymmetric "
          "Bell state;\nantinode placement radiates everything away.")


if __name__ == "__main__":
    main()
