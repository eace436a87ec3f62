"""Bayesian ridge regression with evidence-maximization hyperparameters.

The posterior over monomial weights is Gaussian with mean
m = beta_n A^-1 Phi^T y_c and covariance A^-1, A = lambda_w I + beta_n
Phi^T Phi, where y_c is the target centered on its training mean and Phi
is the column-centered design (centering both sides is the standard
unpenalized-intercept treatment; the intercept is recovered from the two
means). The precisions are re-estimated from the effective degrees of
freedom until the weights stop moving. A single eigendecomposition of
Phi^T Phi makes every iteration O(p^2).
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import SingularDesign
from .features import (FEATURE_NAMES, MONOMIAL_TABLE, N_MONOMIALS,
                       ScalerStats, design_matrix, expand, fit_scaler)

HYPERPRIOR_A = 1e-6
HYPERPRIOR_B = 1e-6
MAX_ITER = 300
WEIGHT_TOL = 1e-4
BETA_CAP = 1e12

MODEL_SCHEMA = "margin-probe/bayes-ridge-v1"


@dataclass
class FitResult:
    weights: np.ndarray          # posterior mean, (p,)
    covariance: np.ndarray       # posterior covariance, (p, p)
    weight_precision: float      # lambda_w
    noise_precision: float       # beta_n
    target_offset: float         # training-target mean
    design_center: np.ndarray    # column means of the design matrix, (p,)
    log_evidence: tuple[float, ...]
    n_iter: int
    converged: bool

    @property
    def intercept(self) -> float:
        return float(self.target_offset - self.design_center @ self.weights)


def _log_evidence(n, p, lam, beta, rss, m_sq, dvals, yty):
    return 0.5 * (p * np.log(lam) + n * np.log(beta) - beta * rss
                  - lam * m_sq - np.sum(np.log(dvals)) - n * np.log(2 * np.pi))


def fit(design: np.ndarray, targets: np.ndarray, max_iter: int = MAX_ITER,
        tol: float = WEIGHT_TOL, fixed_hyperparams: tuple[float, float] | None = None,
        ) -> FitResult:
    """Evidence-maximization fit on a prebuilt design matrix.

    fixed_hyperparams=(lambda_w, beta_n) freezes the precisions, giving the
    closed-form ridge solution with ridge parameter lambda_w / beta_n.
    """
    phi = np.asarray(design, dtype=float)
    y = np.asarray(targets, dtype=float)
    n, p = phi.shape
    offset = float(y.mean())
    yc = y - offset
    col_mu = phi.mean(axis=0)
    phi = phi - col_mu

    gram = phi.T @ phi
    if not np.all(np.isfinite(gram)):
        raise SingularDesign("non-finite entries in the normal matrix")
    s, v = np.linalg.eigh(gram)
    s = np.clip(s, 0.0, None)
    q = v.T @ (phi.T @ yc)
    ycyc = float(yc @ yc)

    if fixed_hyperparams is not None:
        lam, beta = fixed_hyperparams
    else:
        lam = 1.0
        var_y = float(yc.var())
        beta = 1.0 / var_y if var_y > 0 else 1.0

    def solve(lam, beta):
        d = lam + beta * s
        if not np.all(d > 0) or not np.all(np.isfinite(d)):
            raise SingularDesign("normal matrix numerically singular")
        m_eig = beta * q / d
        m = v @ m_eig
        rss = ycyc - 2.0 * float(m_eig @ q) + float(s @ (m_eig * m_eig))
        return d, m_eig, m, max(rss, 0.0)

    d, m_eig, m, rss = solve(lam, beta)
    evidence = [_log_evidence(n, p, lam, beta, rss, float(m @ m), d, ycyc)]
    n_iter = 0
    converged = fixed_hyperparams is not None

    if fixed_hyperparams is None:
        for n_iter in range(1, max_iter + 1):
            gamma_eff = float(np.sum(beta * s / (lam + beta * s)))
            lam = (gamma_eff + 2 * HYPERPRIOR_A) / (float(m @ m) + 2 * HYPERPRIOR_B)
            beta = min((n - gamma_eff + 2 * HYPERPRIOR_A) / (rss + 2 * HYPERPRIOR_B),
                       BETA_CAP)
            m_prev = m
            d, m_eig, m, rss = solve(lam, beta)
            evidence.append(_log_evidence(n, p, lam, beta, rss, float(m @ m), d, ycyc))
            if float(np.max(np.abs(m - m_prev))) < tol:
                converged = True
                break

    cov = (v / d) @ v.T
    return FitResult(m, cov, float(lam), float(beta), offset, col_mu,
                     tuple(float(e) for e in evidence), n_iter, converged)


@dataclass
class BayesRidgeModel:
    """Fitted margin regressor: scaler, monomial table, posterior, metadata."""

    scaler: ScalerStats
    exponents: np.ndarray
    weights: np.ndarray
    covariance: np.ndarray
    weight_precision: float
    noise_precision: float
    target_offset: float
    design_center: np.ndarray
    log_evidence: tuple[float, ...]
    metadata: dict

    @classmethod
    def train(cls, raw_features: np.ndarray, targets: np.ndarray,
              metadata: dict | None = None) -> "BayesRidgeModel":
        """Fit scaler and posterior on raw (n, 5) features."""
        scaler = fit_scaler(raw_features)
        phi = design_matrix(raw_features, scaler)
        result = fit(phi, targets)
        meta = dict(metadata or {})
        meta.update(n_rows=len(targets), n_iterations=result.n_iter,
                    converged=result.converged)
        return cls(scaler, MONOMIAL_TABLE.copy(), result.weights,
                   result.covariance, result.weight_precision,
                   result.noise_precision, result.target_offset,
                   result.design_center, result.log_evidence, meta)

    def predict(self, raw_features: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Predictive mean and standard deviation for raw 5-feature rows.

        Accepts one 5-vector or an (n, 5) matrix; returns matching shapes.
        """
        raw = np.asarray(raw_features, dtype=float)
        single = raw.ndim == 1
        phi = np.atleast_2d(expand(self.scaler.transform(raw))) - self.design_center
        mean = phi @ self.weights + self.target_offset
        var = 1.0 / self.noise_precision + np.einsum(
            "ij,jk,ik->i", phi, self.covariance, phi)
        std = np.sqrt(np.clip(var, 0.0, None))
        if single:
            return float(mean[0]), float(std[0])
        return mean, std

    def rmse(self, raw_features: np.ndarray, labels: np.ndarray) -> float:
        """Root-mean-square prediction error in dB."""
        labels = np.asarray(labels, dtype=float)
        if len(labels) == 0:
            raise ValueError("rmse needs at least one row")
        mean, _ = self.predict(np.atleast_2d(np.asarray(raw_features, float)))
        return float(np.sqrt(np.mean((mean - labels) ** 2)))

    def save(self, path) -> None:
        doc = {
            "schema": MODEL_SCHEMA,
            "feature_names": list(FEATURE_NAMES),
            "scaler": {"mean": list(self.scaler.mean),
                       "std": list(self.scaler.std)},
            "monomials": self.exponents.tolist(),
            "weights": self.weights.tolist(),
            "covariance": self.covariance.tolist(),
            "weight_precision": self.weight_precision,
            "noise_precision": self.noise_precision,
            "target_offset": self.target_offset,
            "design_center": self.design_center.tolist(),
            "log_evidence": list(self.log_evidence),
            "metadata": self.metadata,
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "BayesRidgeModel":
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
        if doc.get("schema") != MODEL_SCHEMA:
            raise ValueError(f"unsupported model schema {doc.get('schema')!r}")
        scaler = ScalerStats(tuple(doc["scaler"]["mean"]),
                             tuple(doc["scaler"]["std"]))
        return cls(scaler, np.array(doc["monomials"], dtype=np.int64),
                   np.array(doc["weights"]), np.array(doc["covariance"]),
                   doc["weight_precision"], doc["noise_precision"],
                   doc["target_offset"], np.array(doc["design_center"]),
                   tuple(doc["log_evidence"]), doc["metadata"])
