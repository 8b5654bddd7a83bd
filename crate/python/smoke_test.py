"""Smoke test for the twistorkit extension module."""

import json
import pathlib

import twistorkit as tk

DATA = pathlib.Path(__file__).resolve().parent.parent / "data"


def main():
    e = tk.Bundle.line_sum([1, 1])
    assert (e.h0(), e.h1()) == (4, 0)
    assert e.splitting() == [1, 1]
    assert tk.Bundle.line_sum([-1]).cohomology()["h0"] == 0
    assert e.twist(-3).h1() == 2
    assert tk.Bundle.from_json(e.to_json()).splitting() == [1, 1]

    q = tk.QuaternionicStructure.flat(1)
    x = [1 + 2j, -0.5j]
    jj = q.j(q.j(x))
    assert all(abs(u + v) < 1e-12 for u, v in zip(jj, x))
    a = [1 + 0j, 1j]
    b = [-(1j * a[1].conjugate()), 1j * a[0].conjugate()]
    assert q.is_real_section(a, b)
    try:
        tk.QuaternionicStructure([[1, 0], [0, 1]])
        raise AssertionError("identity accepted as quaternionic")
    except tk.TwistorkitError as err:
        assert "NotQuaternionic" in str(err)

    d = tk.TwistorData.flat(1)
    assert abs(d.mu - 1j) < 1e-12
    gram = d.metric_gram()
    assert all(abs(gram[i][k] - (2.0 if i == k else 0.0)) < 1e-12 for i in range(4) for k in range(4))
    u, v = [0.3 - 1j, 2 + 0.5j], [1j, -1 + 0j]
    for w in "IJK":
        assert abs(d.kahler(w, u, v) - d.kahler_via_psi(w, u, v)) < 1e-10
    assert d.verify(samples=20, seed=3)["passed"]

    rt = tk.roundtrip(n=1, seed=7, samples=10)
    assert rt["passed"] and rt["metric_gram_is_2re"]

    doc = json.loads(tk.twistor_build(1))
    assert doc["schema"] == tk.SCHEMA and "Omega_raw" in doc
    assert all(r == 0.0 for _, r in tk.twistor_invariants(1))

    fam = (DATA / "jump_family.json").read_text()
    rep = tk.deform_scan(fam, ["0"], [["1"], ["i"], ["1/2"]], twist=-1)
    assert rep["special"]["h0"] == 1 and all(s["h0"] == 0 for s in rep["samples"])
    assert rep["semicontinuous"]

    print("twistorkit python smoke test: ok")


if __name__ == "__main__":
    main()
