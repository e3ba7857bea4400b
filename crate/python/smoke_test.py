"""Smoke test for the pyaqae extension.

Build and install first:
    maturin build --release -m crates/py/Cargo.toml && pip install target/wheels/pyaqae-*.whl
"""

import math
import tempfile

import pyaqae


def main():
    h = pyaqae.scalar_hamiltonian(1.0, 0.0, 5.0, 16)
    values, _ = pyaqae.eigh(h)
    assert abs(values[0] - 0.5) < 1e-6, values[0]

    params = pyaqae.SolveParams(bits=3, eta=values[0] + 0.01, reads=200, runs=2, seed=7)
    trace = pyaqae.solve_state(h, params)
    assert abs(trace.best_energy() - values[0]) < 1e-4, trace.best_energy()
    again = pyaqae.SolveTrace.from_csv(trace.to_csv())
    assert again.final_energies() == trace.final_energies()

    q = pyaqae.build_eigen_qubo([[1.0, 0.2], [0.2, -0.5]], 2, 0, [0.0, 0.0])
    bits, e_min = q.brute_force()
    assert q.sample(50, 1)[0][1] == e_min
    assert pyaqae.QuboInstance.from_text(q.to_text(), q.n_vars).energy(bits) == e_min

    hp, _ = pyaqae.su3_plaquette(1.0)
    vacuum = [1, 0, 0, 0]
    exact = pyaqae.exact_states(hp, vacuum, [0.2])[0]
    _, slices = pyaqae.evolve(hp, 0.2, 2, vacuum, pyaqae.SolveParams(bits=2, reads=200, runs=1))
    p = pyaqae.persistence(slices[0][1], vacuum)
    assert abs(p - pyaqae.persistence(exact, vacuum)) < 1e-4, p

    hn = pyaqae.neutrino_hamiltonian(4, 0.195, 0.9, 1.0)
    psi = pyaqae.exact_states(hn, [1 if k == 0b0011 else 0 for k in range(16)], [1.1])[0]
    p0 = pyaqae.flavor_probability(psi, 0, "e")
    assert math.isclose(p0, pyaqae.flavor_probability(psi, 3, "mu"), abs_tol=1e-10)
    assert 0.0 <= pyaqae.entanglement_entropy(psi, 0) <= 1.0
    assert pyaqae.log_negativity(psi, 0, 1) >= 0.0

    with tempfile.TemporaryDirectory() as d:
        files = pyaqae.run_command("spectrum", '{"mode": "oracle"}', d)
        assert any(f.endswith("spectrum_summary.csv") for f in files)

    print("pyaqae smoke test passed")


if __name__ == "__main__":
    main()
