"""Binary soft-margin SVM trained with SMO.

Works either on design-matrix rows (linear kernel) or on a precomputed
Gram matrix.  The working pair is the maximum KKT violator paired with the
sample maximizing |E_i - E_j|; ties are broken by a seeded RNG, so a fixed
seed gives byte-identical serialized models.
"""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass, field

import numpy as np

from .features import DesignMatrix
from .kernels import KernelMatrix


class SvmError(ValueError):
    pass


@dataclass(frozen=True)
class SvmParams:
    C: float = 1.0
    kkt_tol: float = 1e-3
    max_passes: int = 100
    kernel: str = "linear"  # or "precomputed"
    seed: int = 0

    def __post_init__(self) -> None:
        if self.C <= 0:
            raise SvmError("C must be positive")
        if self.kkt_tol <= 0:
            raise SvmError("kkt_tol must be positive")
        if self.kernel not in ("linear", "precomputed"):
            raise SvmError(f"unknown kernel {self.kernel!r}")


@dataclass(frozen=True)
class SvmModel:
    kernel: str
    coef: tuple[float, ...]            # alpha_i * y_i per support sample
    support: tuple[int, ...]           # training-set indices
    bias: float
    n_train: int
    support_vectors: np.ndarray | None = field(repr=False, default=None)
    params_hash: str = ""

    def to_json(self) -> str:
        payload = {
            "kernel": self.kernel,
            "coef": list(self.coef),
            "support": list(self.support),
            "bias": self.bias,
            "n_train": self.n_train,
            "support_vectors": (None if self.support_vectors is None
                                else [list(map(float, row))
                                      for row in self.support_vectors]),
            "params_hash": self.params_hash,
        }
        return json.dumps(payload, sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str) -> "SvmModel":
        payload = json.loads(text)
        vectors = payload["support_vectors"]
        return cls(
            kernel=payload["kernel"],
            coef=tuple(payload["coef"]),
            support=tuple(payload["support"]),
            bias=payload["bias"],
            n_train=payload["n_train"],
            support_vectors=None if vectors is None else np.asarray(vectors),
            params_hash=payload["params_hash"],
        )


def params_hash(params: SvmParams, context: dict | None = None) -> str:
    """Stable fingerprint of the training configuration; prediction refuses
    inputs whose featurization context does not match the model's."""
    payload = {
        "C": params.C,
        "kkt_tol": params.kkt_tol,
        "max_passes": params.max_passes,
        "kernel": params.kernel,
        "seed": params.seed,
        "context": context or {},
    }
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _as_gram_and_vectors(data, params: SvmParams):
    if isinstance(data, DesignMatrix):
        x = np.asarray(data.rows, dtype=float)
        return x @ x.T, x
    if isinstance(data, KernelMatrix):
        if params.kernel != "precomputed":
            raise SvmError("a KernelMatrix requires kernel='precomputed'")
        return np.asarray(data.values, dtype=float), None
    x = np.asarray(data, dtype=float)
    if params.kernel == "precomputed":
        if x.shape[0] != x.shape[1]:
            raise SvmError("precomputed kernel needs a square matrix")
        return x, None
    return x @ x.T, x


def _kkt_violations(alpha: np.ndarray, yf: np.ndarray, C: float,
                    tol: float) -> np.ndarray:
    """Per-sample violation magnitude of the KKT case analysis; entries at
    or below tol are zeroed."""
    viol = np.zeros(len(alpha))
    at_lower = alpha <= 1e-12
    at_upper = alpha >= C - 1e-12
    interior = ~(at_lower | at_upper)
    viol[at_lower] = np.maximum(0.0, 1.0 - yf[at_lower])
    viol[at_upper] = np.maximum(0.0, yf[at_upper] - 1.0)
    viol[interior] = np.abs(yf[interior] - 1.0)
    return np.where(viol > tol, viol, 0.0)


def kkt_report(data, labels, model: SvmModel, params: SvmParams) -> float:
    """Maximum raw KKT violation of a trained model on its training set."""
    gram, _ = _as_gram_and_vectors(data, params)
    y = np.asarray(labels, dtype=float)
    alpha = np.zeros(len(y))
    for idx, c in zip(model.support, model.coef):
        alpha[idx] = c * y[idx]
    f = gram @ (alpha * y) + model.bias
    viol = _kkt_violations(alpha, y * f, params.C, 0.0)
    return float(viol.max(initial=0.0))


def _seeded_order(rng: random.Random, scores: np.ndarray,
                  exclude: int | None = None) -> list[int]:
    """Indices by descending score; exact ties at the top are shuffled with
    the seeded RNG, the remainder stays in stable order."""
    order = [int(t) for t in np.argsort(-scores, kind="stable")
             if exclude is None or int(t) != exclude]
    if not order:
        return order
    top = scores[order[0]]
    head = [t for t in order if scores[t] >= top - 1e-12]
    tail = [t for t in order if scores[t] < top - 1e-12]
    rng.shuffle(head)
    return head + tail


def _update_pair(gram, y, alpha, i: int, j: int, C: float, e, b: float) -> float | None:
    """One SMO step on (i, j); mutates alpha and returns the new bias, or
    None if the pair cannot make progress."""
    ai, aj = alpha[i], alpha[j]
    if y[i] != y[j]:
        low, high = max(0.0, aj - ai), min(C, C + aj - ai)
    else:
        low, high = max(0.0, ai + aj - C), min(C, ai + aj)
    if high - low < 1e-12:
        return None
    eta = gram[i, i] + gram[j, j] - 2.0 * gram[i, j]
    if eta <= 1e-12:
        return None
    aj_new = aj + y[j] * (e[i] - e[j]) / eta
    aj_new = min(high, max(low, aj_new))
    if abs(aj_new - aj) < 1e-10:
        return None
    ai_new = ai + y[i] * y[j] * (aj - aj_new)
    alpha[i], alpha[j] = ai_new, aj_new

    b1 = b - e[i] - y[i] * (ai_new - ai) * gram[i, i] - y[j] * (aj_new - aj) * gram[i, j]
    b2 = b - e[j] - y[i] * (ai_new - ai) * gram[i, j] - y[j] * (aj_new - aj) * gram[j, j]
    if 1e-12 < ai_new < C - 1e-12:
        return float(b1)
    if 1e-12 < aj_new < C - 1e-12:
        return float(b2)
    return float((b1 + b2) / 2.0)


def train_svm(data, labels, params: SvmParams = SvmParams()) -> SvmModel:
    """Train a binary SVM; labels are +1/-1 and both classes must appear.

    Terminates when no sample violates the KKT conditions beyond
    ``kkt_tol`` or after ``max_passes`` sweeps of pair updates.
    """
    gram, vectors = _as_gram_and_vectors(data, params)
    y = np.asarray(labels, dtype=float)
    n = len(y)
    if gram.shape[0] != n:
        raise SvmError(f"label count {n} does not match {gram.shape[0]} samples")
    classes = set(np.unique(y))
    if not classes <= {-1.0, 1.0}:
        raise SvmError(f"labels must be +1/-1, got {sorted(classes)}")
    if len(classes) < 2:
        raise SvmError("training data contains a single class")

    rng = random.Random(params.seed)
    C = float(params.C)
    tol = params.kkt_tol
    alpha = np.zeros(n)
    b = 0.0

    done = False
    for _ in range(params.max_passes):
        progressed = False
        for _ in range(n):
            e = gram @ (alpha * y) + b - y
            viol = _kkt_violations(alpha, y * (e + y), C, tol)
            if viol.max(initial=0.0) <= 0.0:
                done = True
                break
            updated = False
            for i in _seeded_order(rng, viol):
                if viol[i] <= 0.0:
                    break
                gaps = np.abs(e[i] - e)
                for j in _seeded_order(rng, gaps, exclude=i):
                    new_b = _update_pair(gram, y, alpha, i, j, C, e, b)
                    if new_b is not None:
                        b = new_b
                        updated = True
                        break
                if updated:
                    break
            if not updated:
                done = True  # no pair can move; fixed point reached
                break
            progressed = True
        if done or not progressed:
            break

    coef = []
    support = []
    for idx in range(n):
        if alpha[idx] > 1e-12:
            support.append(idx)
            coef.append(float(alpha[idx] * y[idx]))
    sv = vectors[support] if vectors is not None else None
    return SvmModel(
        kernel=params.kernel,
        coef=tuple(coef),
        support=tuple(support),
        bias=float(b),
        n_train=n,
        support_vectors=sv,
        params_hash=params_hash(params),
    )


def decision_value(model: SvmModel, sample) -> float:
    """f(x) = sum_i alpha_i y_i k(x_i, x) + b.

    For linear models ``sample`` is a feature row; for precomputed-kernel
    models it is the kernel column k(x_i, x) over the full training set.
    """
    sample = np.asarray(sample, dtype=float)
    coef = np.asarray(model.coef)
    if model.kernel == "linear":
        if model.support_vectors is None:
            raise SvmError("linear model is missing its support vectors")
        vectors = np.asarray(model.support_vectors)
        if len(coef) == 0:
            return float(model.bias)
        if sample.shape != (vectors.shape[1],):
            raise SvmError(
                f"sample has dimension {sample.shape}, expected "
                f"({vectors.shape[1]},)")
        return float(coef @ (vectors @ sample) + model.bias)
    if len(coef) == 0:
        return float(model.bias)
    if sample.shape != (model.n_train,):
        raise SvmError(
            f"kernel column has length {sample.shape}, expected ({model.n_train},)")
    return float(coef @ sample[list(model.support)] + model.bias)


def predict(model: SvmModel, sample) -> int:
    """Sign of the decision value, with sign(0) = +1."""
    return 1 if decision_value(model, sample) >= 0.0 else -1
