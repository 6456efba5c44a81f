"""Test-matrix generators and Matrix Market input/output."""

from __future__ import annotations

import math
from pathlib import Path
from typing import Optional, Union

import numpy as np
import scipy.linalg
import scipy.sparse

from .errors import BisectionFailure, ParseError, UnsupportedField
from .linalg import CsrMatrix


def gen_spd(n: int = 100, kappa: float = 1e2, seed: int = 0) -> np.ndarray:
    """Q D Q^T with Q orthogonal (QR of a seeded Gaussian matrix) and D geometric
    from kappa^(-1/2) to kappa^(1/2)."""
    rng = np.random.default_rng(seed)
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    d = np.geomspace(kappa**-0.5, kappa**0.5, n)
    A = (Q * d) @ Q.T
    return 0.5 * (A + A.T)


def _cond2(A):
    s = np.linalg.svd(A, compute_uv=False)
    return s[0] / s[-1], s


def gen_nonsymmetric(n: int = 100, target_kappa: float = 1e2, seed: int = 0,
                     rtol: float = 0.02, return_c: bool = False, max_iter: int = 200):
    """Balanced exp(cR) for a seeded uniform [0, 1) matrix R, with c bisected so that the
    2-norm condition number is within ``rtol`` of ``target_kappa``.

    The result is divided by sqrt(sigma_max*sigma_min) so the extreme
    singular values multiply to one.
    """
    if target_kappa < 1:
        raise ValueError("target condition number must be >= 1")
    rng = np.random.default_rng(seed)
    R = rng.random((n, n))
    log_target = math.log(target_kappa)

    def logk(c):
        k, _ = _cond2(scipy.linalg.expm(c * R))
        return math.log(k)

    lo, hi = 0.0, 0.05
    while logk(hi) < log_target:
        lo, hi = hi, 2 * hi
        if hi > 1e3:
            raise BisectionFailure("could not bracket the target condition number")
    for _ in range(max_iter):
        c = 0.5 * (lo + hi)
        lk = logk(c)
        if abs(lk - log_target) <= math.log1p(rtol):
            break
        if lk < log_target:
            lo = c
        else:
            hi = c
        if hi - lo <= 1e-15 * hi:
            raise BisectionFailure("condition number is not monotone in c near the target")
    else:
        raise BisectionFailure(f"bisection did not reach the target in {max_iter} steps")
    E = scipy.linalg.expm(c * R)
    _, s = _cond2(E)
    A = E / math.sqrt(s[0] * s[-1])
    return (A, c) if return_c else A


def laplacian_1d(n: int) -> CsrMatrix:
    """tridiag(-1, 2, -1) of order n in CSR form."""
    main = 2.0 * np.ones(n)
    off = -np.ones(n - 1)
    return CsrMatrix.from_scipy(scipy.sparse.diags([off, main, off], [-1, 0, 1], format="csr"))


def poisson_2d(k: int) -> CsrMatrix:
    """L kron I + I kron L with L = tridiag(-1, 2, -1) of order k."""
    L = laplacian_1d(k).to_scipy()
    I = scipy.sparse.identity(k, format="csr")
    return CsrMatrix.from_scipy(scipy.sparse.kron(L, I) + scipy.sparse.kron(I, L))


_FIELDS_OK = ("real", "integer", "double")
_SYMMETRIES = ("general", "symmetric", "skew-symmetric")


def _data_lines(lines, start):
    for no, raw in enumerate(lines[start:], start=start + 1):
        s = raw.strip()
        if not s or s.startswith("%"):
            continue
        yield no, s.split()


def read_matrix_market(path: Union[str, Path], dense: Optional[bool] = None):
    """Read a real Matrix Market file (coordinate or array format).

    Coordinate files give a :class:`CsrMatrix` and array files a dense array
    unless ``dense`` says otherwise.  Symmetric storage is mirrored,
    indices are converted from 1-based and duplicate entries are summed.
    """
    text = Path(path).read_text()
    lines = text.splitlines()
    if not lines:
        raise ParseError("empty file", 1)
    head = lines[0].split()
    if len(head) != 5 or head[0].lower() != "%%matrixmarket" or head[1].lower() != "matrix":
        raise ParseError("missing '%%MatrixMarket matrix' header", 1)
    fmt, fld, sym = (h.lower() for h in head[2:])
    if fld not in _FIELDS_OK:
        raise UnsupportedField(f"unsupported field {fld!r} (only real/integer)")
    if sym not in _SYMMETRIES:
        raise UnsupportedField(f"unsupported symmetry {sym!r}")
    if fmt not in ("coordinate", "array"):
        raise ParseError(f"unknown format {fmt!r}", 1)

    it = _data_lines(lines, 1)
    try:
        no, size = next(it)
    except StopIteration:
        raise ParseError("missing size line", len(lines)) from None
    try:
        dims = [int(t) for t in size]
    except ValueError:
        raise ParseError("malformed size line", no) from None
    if len(dims) != (3 if fmt == "coordinate" else 2):
        raise ParseError("malformed size line", no)
    nr, nc = dims[0], dims[1]
    if nr != nc:
        raise ParseError(f"matrix is not square ({nr} x {nc})", no)
    n = nr

    if fmt == "coordinate":
        nnz = dims[2]
        rows, cols, vals = [], [], []
        count = 0
        for no, tok in it:
            if len(tok) != 3:
                raise ParseError("expected 'row col value'", no)
            try:
                i, j, v = int(tok[0]) - 1, int(tok[1]) - 1, float(tok[2])
            except ValueError:
                raise ParseError("malformed entry", no) from None
            if not (0 <= i < n and 0 <= j < n):
                raise ParseError(f"index ({i + 1}, {j + 1}) out of range", no)
            count += 1
            rows.append(i)
            cols.append(j)
            vals.append(v)
            if sym != "general" and i != j:
                rows.append(j)
                cols.append(i)
                vals.append(-v if sym == "skew-symmetric" else v)
        if count != nnz:
            raise ParseError(f"expected {nnz} entries, found {count}", len(lines))
        M = scipy.sparse.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
        csr = CsrMatrix.from_scipy(M)
        return csr.toarray() if dense else csr

    vals = []
    for no, tok in it:
        if len(tok) != 1:
            raise ParseError("expected one value per line", no)
        try:
            vals.append(float(tok[0]))
        except ValueError:
            raise ParseError("malformed value", no) from None
    A = np.zeros((n, n))
    if sym == "general":
        if len(vals) != n * n:
            raise ParseError(f"expected {n * n} values, found {len(vals)}", len(lines))
        A[:] = np.array(vals).reshape((n, n), order="F")
    else:
        ok = n * (n + 1) // 2 if sym == "symmetric" else n * (n - 1) // 2
        if len(vals) != ok:
            raise ParseError(f"expected {ok} values, found {len(vals)}", len(lines))
        k = 0
        for j in range(n):
            for i in range(j if sym == "symmetric" else j + 1, n):
                A[i, j] = vals[k]
                A[j, i] = vals[k] if sym == "symmetric" else -vals[k]
                k += 1
    if dense is False:
        return CsrMatrix.from_dense(A)
    return A


def write_matrix_market(path: Union[str, Path], A, comment: Optional[str] = None) -> None:
    """Write a dense array (array format) or a CsrMatrix (coordinate format)."""
    out = []
    if isinstance(A, CsrMatrix):
        out.append("%%MatrixMarket matrix coordinate real general")
        if comment:
            out.append(f"% {comment}")
        coo = A.to_scipy().tocoo()
        out.append(f"{A.n} {A.n} {coo.nnz}")
        for i, j, v in zip(coo.row, coo.col, coo.data):
            out.append(f"{i + 1} {j + 1} {float(v)!r}")
    else:
        A = np.asarray(A, dtype=float)
        if A.ndim == 1:
            A = A[:, None]
        out.append("%%MatrixMarket matrix array real general")
        if comment:
            out.append(f"% {comment}")
        out.append(f"{A.shape[0]} {A.shape[1]}")
        out.extend(repr(float(v)) for v in A.ravel(order="F"))
    Path(path).write_text("\n".join(out) + "\n")


def read_vector(path: Union[str, Path]) -> np.ndarray:
    """Read an n x 1 Matrix Market array file as a vector."""
    text = Path(path).read_text().splitlines()
    it = _data_lines(text, 1)
    no, size = next(it)
    n, k = int(size[0]), int(size[1])
    if k != 1:
        raise ParseError("vector file must have one column", no)
    v = np.array([float(t[0]) for _, t in it])
    if v.size != n:
        raise ParseError(f"expected {n} values, found {v.size}", len(text))
    return v
