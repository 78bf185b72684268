"""Aaronson-Gottesman stabilizer tableau simulator.

Rows ``0..n-1`` are destabilizers, rows ``n..2n-1`` stabilizers.  Each row
is a Pauli stored as boolean ``x``/``z`` vectors plus a sign bit ``r``.
"""

from __future__ import annotations

import numpy as np

from .pauli import PauliOperator


def _g_sum(x1, z1, x2, z2) -> int:
    """Sum over qubits of the i-exponent picked up by multiplying row 1 into row 2."""
    x1 = x1.astype(np.int8)
    z1 = z1.astype(np.int8)
    x2 = x2.astype(np.int8)
    z2 = z2.astype(np.int8)
    g = np.where(
        (x1 == 1) & (z1 == 1),
        z2 - x2,
        np.where((x1 == 1) & (z1 == 0), z2 * (2 * x2 - 1), np.where((x1 == 0) & (z1 == 1), x2 * (1 - 2 * z2), 0)),
    )
    return int(g.sum())


class Tableau:
    def __init__(self, n: int):
        self.n = n
        self.x = np.zeros((2 * n, n), dtype=bool)
        self.z = np.zeros((2 * n, n), dtype=bool)
        self.r = np.zeros(2 * n, dtype=bool)
        idx = np.arange(n)
        self.x[idx, idx] = True
        self.z[n + idx, idx] = True

    def copy(self) -> "Tableau":
        t = Tableau.__new__(Tableau)
        t.n = self.n
        t.x = self.x.copy()
        t.z = self.z.copy()
        t.r = self.r.copy()
        return t

    # -- gates ----------------------------------------------------------
    def h(self, q: int) -> None:
        self.r ^= self.x[:, q] & self.z[:, q]
        self.x[:, q], self.z[:, q] = self.z[:, q].copy(), self.x[:, q].copy()

    def s(self, q: int) -> None:
        self.r ^= self.x[:, q] & self.z[:, q]
        self.z[:, q] ^= self.x[:, q]

    def cnot(self, c: int, t: int) -> None:
        self.r ^= self.x[:, c] & self.z[:, t] & ~(self.x[:, t] ^ self.z[:, c])
        self.x[:, t] ^= self.x[:, c]
        self.z[:, c] ^= self.z[:, t]

    def permute(self, qubits, perm) -> None:
        """Move the state at ``qubits[j]`` to ``qubits[perm[j]]``."""
        src = list(qubits)
        dst = [qubits[p] for p in perm]
        xs = self.x[:, src].copy()
        zs = self.z[:, src].copy()
        self.x[:, dst] = xs
        self.z[:, dst] = zs

    def apply_pauli(self, p: PauliOperator) -> None:
        """Conjugate the state by ``p``: rows anticommuting with ``p`` flip sign."""
        px = np.array(p.x_bits, dtype=bool)
        pz = np.array(p.z_bits, dtype=bool)
        anti = (np.count_nonzero(self.x & pz, axis=1) + np.count_nonzero(self.z & px, axis=1)) & 1
        self.r ^= anti.astype(bool)

    # -- measurement ----------------------------------------------------
    def _rowsum(self, h: int, i: int) -> None:
        s = 2 * int(self.r[h]) + 2 * int(self.r[i]) + _g_sum(self.x[i], self.z[i], self.x[h], self.z[h])
        self.r[h] = (s % 4) == 2
        self.x[h] ^= self.x[i]
        self.z[h] ^= self.z[i]

    def is_deterministic_z(self, q: int) -> bool:
        return not self.x[self.n :, q].any()

    def measure_z(self, q: int, rng: np.random.Generator | None = None, forced: int | None = None) -> int:
        """Measure Z on ``q``.  Random outcomes come from ``forced``, else ``rng``, else 0."""
        n = self.n
        hits = np.flatnonzero(self.x[n:, q])
        if hits.size:
            p = n + int(hits[0])
            for i in range(2 * n):
                if i != p and self.x[i, q]:
                    self._rowsum(i, p)
            self.x[p - n] = self.x[p]
            self.z[p - n] = self.z[p]
            self.r[p - n] = self.r[p]
            self.x[p] = False
            self.z[p] = False
            self.z[p, q] = True
            if forced is not None:
                out = int(forced)
            elif rng is not None:
                out = int(rng.integers(2))
            else:
                out = 0
            self.r[p] = bool(out)
            return out
        return self._peek_z(q)

    def _peek_z(self, q: int) -> int:
        n = self.n
        sx = np.zeros(n, dtype=bool)
        sz = np.zeros(n, dtype=bool)
        sr = 0
        for i in np.flatnonzero(self.x[:n, q]):
            row = n + int(i)
            s = 2 * sr + 2 * int(self.r[row]) + _g_sum(self.x[row], self.z[row], sx, sz)
            sr = 1 if (s % 4) == 2 else 0
            sx ^= self.x[row]
            sz ^= self.z[row]
        return sr

    def measure_x(self, q: int, rng=None, forced=None) -> int:
        self.h(q)
        out = self.measure_z(q, rng, forced)
        self.h(q)
        return out

    def reset_z(self, q: int) -> None:
        if self.measure_z(q):
            self.x_flip(q)

    def x_flip(self, q: int) -> None:
        self.r ^= self.z[:, q]

    def reset_x(self, q: int) -> None:
        self.reset_z(q)
        self.h(q)

    # -- observables ----------------------------------------------------
    def expectation(self, p: PauliOperator) -> int:
        """+1 or -1 if ``p`` (up to its sign) is a stabilizer, else 0."""
        n = self.n
        px = np.array(p.x_bits, dtype=bool)
        pz = np.array(p.z_bits, dtype=bool)

        def anti(rows_x, rows_z):
            return ((np.count_nonzero(rows_x & pz, axis=1) + np.count_nonzero(rows_z & px, axis=1)) & 1).astype(bool)

        if anti(self.x[n:], self.z[n:]).any():
            return 0
        # p is generated by the stabilizers whose destabilizer anticommutes with it
        sel = np.flatnonzero(anti(self.x[:n], self.z[:n]))
        sx = np.zeros(n, dtype=bool)
        sz = np.zeros(n, dtype=bool)
        sr = 0
        for i in sel:
            row = n + int(i)
            s = 2 * sr + 2 * int(self.r[row]) + _g_sum(self.x[row], self.z[row], sx, sz)
            sr = 1 if (s % 4) == 2 else 0
            sx ^= self.x[row]
            sz ^= self.z[row]
        sign = -1 if sr else 1
        return sign * p.sign

    def stabilizers(self) -> list[PauliOperator]:
        n = self.n
        out = []
        for i in range(n, 2 * n):
            xm = int(sum(1 << q for q in np.flatnonzero(self.x[i])))
            zm = int(sum(1 << q for q in np.flatnonzero(self.z[i])))
            out.append(PauliOperator(n, xm, zm, -1 if self.r[i] else 1))
        return out
