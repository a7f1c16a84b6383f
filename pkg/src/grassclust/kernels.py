"""Reproducing kernels and their parser.

A kernel spec is an immutable :class:`KernelSpec`; mixtures are one level deep
convex combinations of base kernels. Everything here works on flat real vectors.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist

from .errors import ConfigError, InputError

BASE_KINDS = ("linear", "gaussian", "laplacian", "polynomial")
_WEIGHT_TOL = 1e-12


@dataclass(frozen=True)
class KernelSpec:
    kind: str
    sigma: float | None = None
    degree: int | None = None
    components: tuple[tuple[float, "KernelSpec"], ...] = field(default=())

    def __post_init__(self):
        validate(self)

    def __str__(self):
        if self.kind == "linear":
            return "linear"
        if self.kind in ("gaussian", "laplacian"):
            return f"{self.kind}({self.sigma!r})"
        if self.kind == "polynomial":
            return f"polynomial({self.degree})"
        return "+".join(f"{w!r}*{c}" for w, c in self.components)


def linear():
    return KernelSpec("linear")


def gaussian(sigma):
    return KernelSpec("gaussian", sigma=float(sigma))


def laplacian(sigma):
    return KernelSpec("laplacian", sigma=float(sigma))


def polynomial(degree):
    return KernelSpec("polynomial", degree=degree)


def mixture(*weighted):
    """Convex combination, e.g. ``mixture((0.6, gaussian(0.8)), (0.4, laplacian(1)))``."""
    return KernelSpec("mixture", components=tuple((float(w), k) for w, k in weighted))


def validate(spec: KernelSpec) -> None:
    if spec.kind in ("gaussian", "laplacian"):
        if spec.sigma is None or not math.isfinite(spec.sigma) or spec.sigma <= 0:
            raise ConfigError(f"{spec.kind} kernel needs sigma > 0, got {spec.sigma}")
    elif spec.kind == "polynomial":
        if not isinstance(spec.degree, (int, np.integer)) or isinstance(spec.degree, bool) or spec.degree < 1:
            raise ConfigError(f"polynomial kernel needs integer degree >= 1, got {spec.degree}")
    elif spec.kind == "mixture":
        if not spec.components:
            raise ConfigError("mixture kernel needs at least one component")
        weights = [w for w, _ in spec.components]
        if any(not math.isfinite(w) or w < 0 for w in weights):
            raise ConfigError(f"mixture weights must be nonnegative, got {weights}")
        if abs(math.fsum(weights) - 1.0) > _WEIGHT_TOL:
            raise ConfigError(f"mixture weights must sum to 1, got sum {math.fsum(weights)!r}")
        for _, comp in spec.components:
            if comp.kind == "mixture":
                raise ConfigError("nested mixtures are not supported")
    elif spec.kind != "linear":
        raise ConfigError(f"unknown kernel kind {spec.kind!r}")


def _as_matrix(vectors, name):
    arr = np.asarray(vectors, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None] if name == "series" else arr[None, :]
    if arr.ndim != 2:
        raise InputError(f"{name} must be a list of equal-length vectors")
    return arr


def _base_gram(spec, X, Y):
    if spec.kind == "linear":
        return X @ Y.T
    if spec.kind == "polynomial":
        return (X @ Y.T + 1.0) ** spec.degree
    if spec.kind == "gaussian":
        sq = cdist(X, Y, "sqeuclidean")
        return np.exp(-sq / (2.0 * spec.sigma**2))
    # laplacian: l1 distance
    return np.exp(-cdist(X, Y, "cityblock") / spec.sigma)


def gram_matrix(spec: KernelSpec, rows, cols) -> np.ndarray:
    """Matrix of kernel values ``K[i, j] = k(rows[i], cols[j])``."""
    X = _as_matrix(rows, "rows")
    Y = _as_matrix(cols, "cols")
    if X.shape[1] != Y.shape[1]:
        raise InputError(f"dimension mismatch: {X.shape[1]} vs {Y.shape[1]}")
    if spec.kind == "mixture":
        out = np.zeros((X.shape[0], Y.shape[0]))
        for w, comp in spec.components:
            out += w * _base_gram(comp, X, Y)
        return out
    return _base_gram(spec, X, Y)


def eval_kernel(spec: KernelSpec, y1, y2) -> float:
    a = np.atleast_1d(np.asarray(y1, dtype=float))
    b = np.atleast_1d(np.asarray(y2, dtype=float))
    if a.ndim != 1 or b.ndim != 1 or a.shape != b.shape or a.size == 0:
        raise InputError(f"kernel arguments must be vectors of equal length, got {a.shape} and {b.shape}")
    if spec.kind == "mixture":
        return math.fsum(w * eval_kernel(c, a, b) for w, c in spec.components)
    if spec.kind == "linear":
        return float(a @ b)
    if spec.kind == "polynomial":
        return float((a @ b + 1.0) ** spec.degree)
    d = a - b
    if spec.kind == "gaussian":
        return math.exp(-float(d @ d) / (2.0 * spec.sigma**2))
    return math.exp(-float(np.abs(d).sum()) / spec.sigma)


_TERM = re.compile(
    r"^(?:(?P<w>[0-9.eE+-]+)\s*\*\s*)?(?P<kind>[a-z]+)\s*(?:\(\s*(?P<arg>[^()]*)\s*\))?$"
)


def _split_terms(text):
    # split on '+' that are not inside parentheses or part of an exponent
    terms, depth, start = [], 0, 0
    for i, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == "+" and depth == 0 and i > 0 and text[i - 1] not in "eE":
            terms.append(text[start:i])
            start = i + 1
    terms.append(text[start:])
    return [t.strip() for t in terms]


def _parse_base(kind, arg, text):
    try:
        if kind == "linear":
            if arg:
                raise ValueError
            return linear()
        if kind in ("gaussian", "laplacian"):
            return KernelSpec(kind, sigma=float(arg))
        if kind in ("polynomial", "poly"):
            return polynomial(int(arg))
    except (TypeError, ValueError):
        raise ConfigError(f"bad kernel argument in {text!r}") from None
    raise ConfigError(f"unknown kernel kind {kind!r} in {text!r}")


def parse_kernel(text: str) -> KernelSpec:
    """Parse strings like ``"gaussian(0.8)"`` or ``"0.6*gaussian(0.8)+0.4*laplacian(1.0)"``."""
    text = text.strip().lower().replace(" ", "")
    terms = _split_terms(text)
    parsed = []
    for term in terms:
        m = _TERM.match(term)
        if m is None:
            raise ConfigError(f"cannot parse kernel term {term!r}")
        base = _parse_base(m["kind"], m["arg"], term)
        parsed.append((m["w"], base))
    if len(parsed) == 1 and parsed[0][0] is None:
        return parsed[0][1]
    if any(w is None for w, _ in parsed):
        raise ConfigError(f"every mixture term needs an explicit weight: {text!r}")
    try:
        return mixture(*((float(w), k) for w, k in parsed))
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"bad mixture weight in {text!r}") from None
