"""Compare the compiled kernels with the numpy fallback.

Run with ``python benchmarks/bench_kernels.py``. Each kernel is timed on
realistic inputs (a q=3, L=6 Floquet build with a dense gate and with a
sparse core gate, a 200-step q=6 channel series and the spacing ratios of
4096 phases) and the outputs of both backends are
checked against each other before timing.
"""

import argparse
import timeit

import numpy as np

from dualunitary.kernels import available_backends


def _cases(rng):
    q, L = 3, 6
    gate = np.linalg.qr(rng.standard_normal((q * q, q * q)) + 1j * rng.standard_normal((q * q, q * q)))[0]
    eye = np.eye(q**L, dtype=np.complex128)

    J = rng.uniform(0, 2 * np.pi, (q, q))
    core = np.zeros((q * q, q * q), dtype=np.complex128)
    a, b = np.divmod(np.arange(q * q), q)
    core[a * q + b, b * q + a] = np.exp(1j * J[a, b])

    def floquet(impl, U=gate):
        X = eye
        for i in range(L):
            X = impl.apply_two_site(X, U, q, L, i, (i + 1) % L)
        return X

    M = rng.standard_normal((36, 36)) + 1j * rng.standard_normal((36, 36))
    M /= np.linalg.norm(M, 2)
    v0 = rng.standard_normal(36) + 0j
    s = rng.standard_normal(36) + 0j
    phases = np.sort(rng.uniform(-np.pi, np.pi, 4096))
    return {
        "apply_two_site dense (q=3, L=6)": floquet,
        "apply_two_site core V[J] (q=3, L=6)": lambda impl: floquet(impl, core),
        "channel_series (q=6, 200 steps)": lambda impl: impl.channel_series(M, v0, s, 200),
        "spacing_ratios (4096 phases)": lambda impl: impl.spacing_ratios(phases, 1e-12)[0],
    }


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)

    backends = available_backends()
    if "cython" not in backends:
        print("compiled extension not built; only the numpy fallback is available")
    cases = _cases(np.random.default_rng(0))
    print(f"{'kernel':36s}" + "".join(f"{name:>12s}" for name in backends) + "     speedup")
    for label, fn in cases.items():
        outs = {name: fn(impl) for name, impl in backends.items()}
        ref = outs["python"]
        for name, out in outs.items():
            if not np.allclose(out, ref, atol=1e-10):
                raise SystemExit(f"{label}: backend {name} disagrees with the fallback")
        times = {}
        for name, impl in backends.items():
            number = max(1, int(0.2 / max(timeit.timeit(lambda: fn(impl), number=1), 1e-6)))
            times[name] = min(timeit.repeat(lambda: fn(impl), number=number, repeat=args.repeat)) / number
        row = f"{label:36s}" + "".join(f"{times[n] * 1e3:10.3f}ms" for n in backends)
        if "cython" in times:
            row += f"   {times['python'] / times['cython']:7.2f}x"
        print(row)


if __name__ == "__main__":
    main()
