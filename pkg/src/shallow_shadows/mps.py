"""Periodic (trace-closed) matrix product encodings of real vectors.

Site ``j`` is an array of shape ``(p_j, chi_j, chi_{j+1})`` with the last bond
wrapping back to the first, and the encoded vector is
``m(x) = tr(A^0[x_0] A^1[x_1] ... A^{N-1}[x_{N-1}])``.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np


def _ring_trace(transfers) -> float:
    acc = transfers[0]
    for t in transfers[1:]:
        acc = acc @ t
    return float(np.trace(acc))


class PeriodicMPS:
    def __init__(self, sites):
        sites = [np.asarray(s, dtype=float) for s in sites]
        if not sites:
            raise ValueError("an MPS needs at least one site")
        for j, s in enumerate(sites):
            if s.ndim != 3:
                raise ValueError(f"site {j} must have shape (p, chi_l, chi_r), got {s.shape}")
            nxt = sites[(j + 1) % len(sites)]
            if s.shape[2] != nxt.shape[1]:
                raise ValueError(
                    f"bond mismatch between site {j} ({s.shape}) and site {(j + 1) % len(sites)} ({nxt.shape})"
                )
        self.sites = sites

    @classmethod
    def constant(cls, n_sites: int, phys: int, value: float = 1.0) -> "PeriodicMPS":
        sites = [np.ones((phys, 1, 1)) for _ in range(n_sites)]
        sites[0] = sites[0] * value
        return cls(sites)

    @classmethod
    def product(cls, vectors) -> "PeriodicMPS":
        """Bond-1 MPS of the product vector (x) v_j."""
        return cls([np.asarray(v, dtype=float)[:, None, None] for v in vectors])

    @classmethod
    def from_dense(cls, values, phys_dims, rtol: float = 1e-14) -> "PeriodicMPS":
        """Exact MPS of a dense vector by sequential SVD (ring bond 1).

        Only numerically zero singular values (below ``rtol`` times the
        largest) are dropped.  Site 0 is the most significant digit.
        """
        phys_dims = [int(p) for p in phys_dims]
        rest = np.asarray(values, dtype=float).reshape(1, -1)
        if rest.size != int(np.prod(phys_dims)):
            raise ValueError("vector length does not match the physical dims")
        sites = []
        for p in phys_dims[:-1]:
            chi = rest.shape[0]
            u, s, vt = np.linalg.svd(rest.reshape(chi * p, -1), full_matrices=False)
            keep = max(1, int(np.sum(s > rtol * max(s[0], 1e-300))))
            sites.append(u[:, :keep].reshape(chi, p, keep).transpose(1, 0, 2))
            rest = s[:keep, None] * vt[:keep]
        sites.append(rest.reshape(rest.shape[0], phys_dims[-1], 1).transpose(1, 0, 2))
        return cls(sites)

    @classmethod
    def random(cls, n_sites: int, phys: int, bond: int, rng: np.random.Generator) -> "PeriodicMPS":
        return cls([rng.standard_normal((phys, bond, bond)) for _ in range(n_sites)])

    @property
    def n_sites(self) -> int:
        return len(self.sites)

    def __len__(self) -> int:
        return len(self.sites)

    @property
    def phys_dims(self) -> list[int]:
        return [s.shape[0] for s in self.sites]

    @property
    def bond_dims(self) -> list[int]:
        """chi_j = left bond of site j (chi_0 closes the ring)."""
        return [s.shape[1] for s in self.sites]

    @property
    def max_bond(self) -> int:
        return max(self.bond_dims)

    def copy(self) -> "PeriodicMPS":
        return PeriodicMPS([s.copy() for s in self.sites])

    def scaled(self, c: float) -> "PeriodicMPS":
        sites = [s.copy() for s in self.sites]
        sites[0] *= c
        return PeriodicMPS(sites)

    def _check_index(self, idx) -> np.ndarray:
        idx = np.asarray(idx, dtype=np.int64)
        if idx.shape[-1] != self.n_sites:
            raise ValueError(f"index string of length {idx.shape[-1]} for {self.n_sites} sites")
        dims = np.array(self.phys_dims)
        if np.any(idx < 0) or np.any(idx >= dims):
            raise ValueError("index digit outside physical dimension")
        return idx

    def evaluate(self, idx) -> float:
        idx = self._check_index(idx)
        if idx.ndim != 1:
            raise ValueError("evaluate takes one index string; use evaluate_many")
        return _ring_trace([s[v] for s, v in zip(self.sites, idx)])

    def evaluate_many(self, idx) -> np.ndarray:
        idx = self._check_index(np.atleast_2d(idx))
        acc = self.sites[0][idx[:, 0]]
        for j in range(1, self.n_sites):
            acc = np.matmul(acc, self.sites[j][idx[:, j]])
        return np.trace(acc, axis1=1, axis2=2)

    def sum_all(self) -> float:
        return _ring_trace([s.sum(axis=0) for s in self.sites])

    def frobenius_sq(self) -> float:
        return dot(self, self)

    def to_dense(self) -> np.ndarray:
        """Full vector, site 0 the most significant digit (small N only)."""
        acc = self.sites[0]  # (P, chi0, chi1)
        for s in self.sites[1:]:
            acc = np.einsum("pab,qbc->pqac", acc, s).reshape(-1, acc.shape[1], s.shape[2])
        return np.trace(acc, axis1=1, axis2=2)

    def to_dict(self) -> dict:
        return {
            "format": "periodic-mps",
            "version": 1,
            "N": self.n_sites,
            "phys_dims": self.phys_dims,
            "bond_dims": self.bond_dims,
            "tensors": [s.ravel().tolist() for s in self.sites],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PeriodicMPS":
        if data.get("format") != "periodic-mps":
            raise ValueError("not a periodic-mps record")
        n = data["N"]
        p, chi = data["phys_dims"], data["bond_dims"]
        sites = [
            np.asarray(data["tensors"][j], dtype=float).reshape(p[j], chi[j], chi[(j + 1) % n])
            for j in range(n)
        ]
        return cls(sites)

    def save(self, path) -> None:
        """JSON for ``.json`` paths, otherwise a compressed ``.npz`` container."""
        path = Path(path)
        if path.suffix == ".json":
            path.write_text(json.dumps(self.to_dict()))
        else:
            np.savez_compressed(path, n_sites=self.n_sites, **{f"site{j}": s for j, s in enumerate(self.sites)})

    @classmethod
    def load(cls, path) -> "PeriodicMPS":
        path = Path(path)
        if path.suffix == ".json":
            return cls.from_dict(json.loads(path.read_text()))
        with np.load(path) as data:
            return cls([data[f"site{j}"] for j in range(int(data["n_sites"]))])

    def __repr__(self) -> str:
        return f"PeriodicMPS(N={self.n_sites}, phys={self.phys_dims}, bonds={self.bond_dims})"


def _check_compatible(a: PeriodicMPS, b: PeriodicMPS) -> None:
    if a.phys_dims != b.phys_dims:
        raise ValueError(f"physical dims differ: {a.phys_dims} vs {b.phys_dims}")


def hadamard(a: PeriodicMPS, b: PeriodicMPS) -> PeriodicMPS:
    """Pointwise product; bond dimensions multiply."""
    _check_compatible(a, b)
    sites = []
    for sa, sb in zip(a.sites, b.sites):
        p, al, ar = sa.shape
        _, bl, br = sb.shape
        sites.append(np.einsum("pij,pkl->pikjl", sa, sb).reshape(p, al * bl, ar * br))
    return PeriodicMPS(sites)


def dot(a: PeriodicMPS, b: PeriodicMPS) -> float:
    """sum_x a(x) b(x) without forming the product MPS explicitly.

    The environment keeps the two ring-closing bonds open, so memory is
    chi_0^2 chi_j^2 rather than the full transfer matrix.
    """
    _check_compatible(a, b)
    env = np.einsum("pij,pkl->ikjl", a.sites[0], b.sites[0])
    for sa, sb in zip(a.sites[1:], b.sites[1:]):
        env = np.tensordot(env, sa, axes=([2], [1]))  # (i, k, l, p, m)
        env = np.tensordot(env, sb, axes=([2, 3], [1, 0]))  # (i, k, m, n)
    return float(np.einsum("ikik->", env))


def dot_env_size(a: PeriodicMPS, b: PeriodicMPS) -> int:
    """Largest environment held by ``dot``."""
    c0 = a.bond_dims[0] * b.bond_dims[0]
    return max(c0 * x * y for x, y in zip(a.bond_dims, b.bond_dims))


def add(a: PeriodicMPS, b: PeriodicMPS) -> PeriodicMPS:
    """Pointwise sum via block-diagonal site tensors."""
    _check_compatible(a, b)
    sites = []
    for sa, sb in zip(a.sites, b.sites):
        p, al, ar = sa.shape
        _, bl, br = sb.shape
        s = np.zeros((p, al + bl, ar + br))
        s[:, :al, :ar] = sa
        s[:, al:, ar:] = sb
        sites.append(s)
    return PeriodicMPS(sites)
