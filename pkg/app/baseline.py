'''
Baseline: fingerprint de Morgan + regressão logística com L2

Perda: média da log-verossimilhança logística negativa + (l2 / 2) * ||w||^2
(o viés não é regularizado). Minimização determinística em lote completo
(BFGS do scipy) a partir do modelo nulo, até norma-2 do gradiente < gtol
ou limite de iterações.
'''

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
from scipy.optimize import minimize
from scipy.special import expit

from app.chemistry.fingerprint import DEFAULT_RADIUS, DEFAULT_WIDTH, morgan_fingerprint
from app.chemistry.molgraph import parse_smiles
from app.errors import EmptySplit, MetricError, TaskFormatError
from app.metrics import prc_auc, roc_auc
from app.utils.artifacts import atomic_write_json

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BaselineHyper:
    l2: float = 1e-2
    max_iter: int = 1000
    gtol: float = 1e-6
    workers: int = 1

    @classmethod
    def from_settings(cls, settings):
        return cls(
            l2=float(settings['BASELINE_L2']),
            max_iter=int(settings['BASELINE_MAX_ITER']),
            gtol=float(settings['BASELINE_GTOL']),
            workers=int(settings['WORKERS']),
        )


@dataclass
class LinearModel:
    weights: np.ndarray
    bias: float
    l2: float
    radius: int = DEFAULT_RADIUS
    width: int = DEFAULT_WIDTH

    def decision_function(self, features):
        return np.asarray(features, dtype=np.float64) @ self.weights + self.bias

    def predict_proba(self, features):
        return expit(self.decision_function(features))

    def predict_smiles(self, smiles, workers=1):
        return self.predict_proba(fingerprint_matrix(smiles, self.radius, self.width, workers))

    def to_dict(self):
        return {
            'weights': self.weights.tolist(),
            'bias': float(self.bias),
            'l2': float(self.l2),
            'radius': self.radius,
            'width': self.width,
        }

    @classmethod
    def from_dict(cls, doc):
        try:
            weights = np.asarray(doc['weights'], dtype=np.float64)
            if weights.shape != (int(doc['width']),):
                raise TaskFormatError(f'Pesos com forma {weights.shape}, largura {doc["width"]}')
            return cls(weights, float(doc['bias']), float(doc['l2']), int(doc['radius']), int(doc['width']))
        except (KeyError, TypeError, ValueError) as e:
            raise TaskFormatError(f'Modelo linear malformado: {e}') from e

    def save(self, path):
        atomic_write_json(path, self.to_dict())

    @classmethod
    def load(cls, path):
        return cls.from_dict(json.loads(Path(path).read_text(encoding='utf-8')))


@dataclass
class BaselineReport:
    test_roc_auc: Optional[float]
    test_prc_auc: Optional[float]
    final_loss: float
    zero_loss: float
    n_iter: int
    converged: bool
    gradient_norm: float
    sizes: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            'test_roc_auc': self.test_roc_auc,
            'test_prc_auc': self.test_prc_auc,
            'final_loss': self.final_loss,
            'zero_loss': self.zero_loss,
            'n_iter': self.n_iter,
            'converged': self.converged,
            'gradient_norm': self.gradient_norm,
            'sizes': self.sizes,
        }


def _fingerprint_row(smiles, radius, width):
    return morgan_fingerprint(parse_smiles(smiles), radius=radius, width=width).to_numpy()


def fingerprint_matrix(smiles, radius=DEFAULT_RADIUS, width=DEFAULT_WIDTH, workers=1):
    '''Matriz (n, width) de fingerprints; ordem preservada com workers > 1'''
    smiles = list(smiles)
    if not smiles:
        return np.zeros((0, width), dtype=np.float64)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda s: _fingerprint_row(s, radius, width), smiles))
    else:
        rows = [_fingerprint_row(s, radius, width) for s in smiles]
    return np.vstack(rows)


def logistic_loss_and_grad(theta, features, labels, l2):
    '''
    Perda logística regularizada e gradiente

    Args:
        theta: vetor [w..., b]
        features: (n, d)
        labels: (n,) em {0, 1}
        l2: força da regularização

    Returns:
        (perda, gradiente com a mesma forma de theta)
    '''
    weights, bias = theta[:-1], theta[-1]
    z = features @ weights + bias
    loss = float(np.mean(np.logaddexp(0.0, z) - labels * z) + 0.5 * l2 * weights @ weights)
    residual = (expit(z) - labels) / labels.shape[0]
    grad = np.empty_like(theta)
    grad[:-1] = features.T @ residual + l2 * weights
    grad[-1] = residual.sum()
    return loss, grad


def fit_logistic(features, labels, hyper):
    '''Ajustar LinearModel por BFGS a partir de zeros'''
    features = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.float64)
    theta0 = np.zeros(features.shape[1] + 1)
    zero_loss, _ = logistic_loss_and_grad(theta0, features, labels, hyper.l2)

    result = minimize(
        logistic_loss_and_grad,
        theta0,
        args=(features, labels, hyper.l2),
        jac=True,
        method='BFGS',
        options={'gtol': hyper.gtol, 'norm': 2, 'maxiter': hyper.max_iter},
    )
    final_loss, grad = logistic_loss_and_grad(result.x, features, labels, hyper.l2)
    grad_norm = float(np.linalg.norm(grad))
    logger.info('[BASELINE] %d iterações, perda %.6f (modelo nulo %.6f), |grad|=%.2e',
                result.nit, final_loss, zero_loss, grad_norm)
    return result.x, final_loss, zero_loss, int(result.nit), grad_norm


def format_metric(value):
    return '-' if value is None else f'{value:.4f}'


def _test_metric(metric, scores, labels):
    try:
        return metric(scores, labels)
    except MetricError as e:
        logger.warning('[BASELINE] %s indefinida no teste: %s', metric.__name__, e)
        return None


def train_baseline(task, split, radius=DEFAULT_RADIUS, width=DEFAULT_WIDTH, hyper=None):
    '''
    Treinar o baseline no treino e avaliar no teste

    Args:
        task: TaskDataset
        split: SplitIndices
        radius, width: parâmetros do fingerprint
        hyper: BaselineHyper

    Returns:
        (LinearModel, BaselineReport)
    '''
    hyper = hyper or BaselineHyper()
    if not split.train or not split.test:
        raise EmptySplit('Treino e teste precisam ser não vazios para o baseline')

    features = fingerprint_matrix(task.smiles, radius, width, hyper.workers)
    labels = np.asarray(task.labels, dtype=np.float64)
    train_idx = np.asarray(split.train, dtype=np.int64)
    test_idx = np.asarray(split.test, dtype=np.int64)

    theta, final_loss, zero_loss, n_iter, grad_norm = fit_logistic(features[train_idx], labels[train_idx], hyper)
    model = LinearModel(weights=theta[:-1].copy(), bias=float(theta[-1]), l2=hyper.l2, radius=radius, width=width)

    scores = model.predict_proba(features[test_idx])
    report = BaselineReport(
        test_roc_auc=_test_metric(roc_auc, scores, labels[test_idx]),
        test_prc_auc=_test_metric(prc_auc, scores, labels[test_idx]),
        final_loss=final_loss,
        zero_loss=zero_loss,
        n_iter=n_iter,
        converged=grad_norm < hyper.gtol,
        gradient_norm=grad_norm,
        sizes=split.sizes(),
    )
    logger.info('[BASELINE] %s: ROC-AUC=%s PRC-AUC=%s', task.task_name,
                format_metric(report.test_roc_auc), format_metric(report.test_prc_auc))
    return model, report
