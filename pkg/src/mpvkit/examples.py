"""Built-in example tensors.

Pure families (MpvTensor):
  ghz            A^0 = diag(1,0), A^1 = diag(0,1); GHZ state on the ring.
  product        d=2, D=1, A^i = 1/sqrt(2); product of |+> states.
  xx             A^0 = sigma^+, A^1 = sigma^-; nonzero only for even rings
                 (2-periodic transfer spectrum {1, -1}).
  two-blocks     direct sum of a product state and a |+>-machine block
                 (two one-dimensional blocks that are not locally orthogonal).
  aklt           spin-1 AKLT chain.
  bell-chain     d=4, D=2: one maximally entangled pair across every cut.
  fibonacci      d=8 (three qubits), D=2 vacuum tensor of the Fibonacci
                 string-net boundary; A^{ijk} = delta_{i a} delta_{k b} N_ijk.

Mixed families (MpdoTensor):
  max-mixed      D=1, M^{ij} = delta_ij; the maximally mixed state.
  toric          d=D=2 boundary tensor of the toric code,
                 rho_N = 1^{(x)N} + sigmaz^{(x)N}.
  zcl-no-sal     entangled pairs between neighbouring sites pushed through a
                 local flip channel of strength p (two qubits per site).
  sal-no-zcl     classical two-label nearest-neighbour Gibbs family whose
                 pair weights are w = [[1, 1/2], [1/2, 1]].
"""

from __future__ import annotations

import numpy as np

from .tensors import MpdoTensor, MpvTensor

SX = np.array([[0.0, 1.0], [1.0, 0.0]])
SZ = np.array([[1.0, 0.0], [0.0, -1.0]])
SP = np.array([[0.0, 1.0], [0.0, 0.0]])
SM = SP.T.copy()


def ghz() -> MpvTensor:
    a = np.zeros((2, 2, 2))
    a[0, 0, 0] = 1.0
    a[1, 1, 1] = 1.0
    return MpvTensor(a)


def product_plus() -> MpvTensor:
    return MpvTensor(np.full((2, 1, 1), 1.0 / np.sqrt(2.0)))


def xx_periodic() -> MpvTensor:
    return MpvTensor(np.array([SP, SM]))


def two_blocks() -> MpvTensor:
    """Example with two 1-dim blocks that share physical weight on |0>."""
    a = np.zeros((2, 2, 2))
    a[0] = np.diag([1.0, 1.0 / np.sqrt(2.0)])
    a[1, 1, 1] = 1.0 / np.sqrt(2.0)
    return MpvTensor(a)


def aklt() -> MpvTensor:
    a = np.stack(
        [
            -np.sqrt(2.0 / 3.0) * SM,
            -np.sqrt(1.0 / 3.0) * SZ,
            np.sqrt(2.0 / 3.0) * SP,
        ]
    )
    return MpvTensor(a)


def bell_chain() -> MpvTensor:
    a = np.zeros((4, 2, 2))
    for m in range(2):
        for n in range(2):
            a[2 * m + n, m, n] = 1.0 / np.sqrt(2.0)
    return MpvTensor(a)


def fibonacci_vacuum() -> MpvTensor:
    a = np.zeros((8, 2, 2))
    for i in range(2):
        for j in range(2):
            for k in range(2):
                if (i, j, k).count(0) == 2:
                    continue
                a[4 * i + 2 * j + k, i, k] = 1.0
    return MpvTensor(a)


def max_mixed(d: int = 2) -> MpdoTensor:
    m = np.zeros((d, d, 1, 1))
    for i in range(d):
        m[i, i, 0, 0] = 1.0
    return MpdoTensor(m)


def toric_boundary() -> MpdoTensor:
    m = np.zeros((2, 2, 2, 2))
    m[0, 0] = np.eye(2)
    m[1, 1] = SZ
    return MpdoTensor(m)


def zcl_no_sal(p: float = 0.25) -> MpdoTensor:
    """Entangled-pair chain with a sigma_x (x) sigma_x flip channel per site.

    Site = two qubits (l, r); the r qubit of site n is maximally entangled
    with the l qubit of site n+1.  The channel X -> p U X U^dag + (1-p) X
    with U = sigma_x (x) sigma_x acts on every site.
    """
    pair = bell_chain().entries  # A[i, a, b], i = (l, r)
    m0 = np.einsum("iab,jcd->ijacbd", pair, np.conj(pair)).reshape(4, 4, 4, 4)
    u = np.kron(SX, SX)
    rot = np.einsum("ik,klab,jl->ijab", u, m0, u)
    m = p * rot + (1.0 - p) * m0
    return MpdoTensor(m)


def sal_no_zcl() -> MpdoTensor:
    """Classical two-label family: eta_kk = |kk><kk|, eta_kh = |kh><kh| / 2."""
    w = np.array([[1.0, 0.5], [0.5, 1.0]])
    m = np.zeros((4, 4, 2, 2))
    for k in range(2):
        i = 2 * k + k  # both qubits of the site carry the label
        for h in range(2):
            m[i, i, k, h] = w[k, h]
    return MpdoTensor(m)


_PURE = {
    "ghz": ghz,
    "product": product_plus,
    "xx-periodic": xx_periodic,
    "two-blocks": two_blocks,
    "aklt": aklt,
    "bell-chain": bell_chain,
    "fibonacci-vacuum": fibonacci_vacuum,
}

_MIXED = {
    "max-mixed": max_mixed,
    "toric-boundary": toric_boundary,
    "zcl-no-sal": zcl_no_sal,
    "sal-no-zcl": sal_no_zcl,
}

_ALIASES = {
    "toric": "toric-boundary",
    "product-plus": "product",
    "xx": "xx-periodic",
    "fibonacci": "fibonacci-vacuum",
    "zcl-example-3-6": "two-blocks",
}


def example_names() -> list[str]:
    return sorted(_PURE) + sorted(_MIXED)


def example(name: str, p: float | None = None):
    """Look up a built-in tensor by name.

    The parameter ``p`` is honoured by the examples that take one
    (currently zcl-no-sal); it is rejected otherwise.
    """
    key = name.strip().lower().replace("_", "-")
    key = _ALIASES.get(key, key)
    if key in _PURE:
        if p is not None:
            raise ValueError(f"example {name!r} takes no parameter")
        return _PURE[key]()
    if key in _MIXED:
        if key == "zcl-no-sal":
            return zcl_no_sal(0.25 if p is None else p)
        if p is not None:
            raise ValueError(f"example {name!r} takes no parameter")
        return _MIXED[key]()
    raise KeyError(f"unknown example {name!r}; known: {', '.join(example_names())}")
