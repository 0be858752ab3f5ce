'''
Métricas de classificação binária: ROC-AUC e PRC-AUC

ROC-AUC: estatística U de Mann-Whitney normalizada (postos médios em empates),
    P(score_pos > score_neg) + 0.5 * P(empate).
PRC-AUC: área em degraus (estilo average precision), sem interpolação;
    empates de score são processados como um único limiar.
'''

from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from app.errors import DegenerateLabels, MetricError, NoPositives


def _as_arrays(scores, labels):
    scores = np.asarray(scores, dtype=np.float64).ravel()
    labels = np.asarray(labels).ravel()
    if scores.shape != labels.shape:
        raise MetricError(f'Scores ({scores.size}) e rótulos ({labels.size}) com tamanhos diferentes')
    if not np.all(np.isfinite(scores)):
        raise MetricError('Scores não finitos')
    if not np.all(np.isin(labels, (0, 1))):
        raise MetricError('Rótulos devem ser 0 ou 1')
    return scores, labels.astype(np.int64)


def roc_auc(scores, labels):
    '''
    Área sob a curva ROC

    Raises:
        DegenerateLabels: apenas uma classe presente
    '''
    scores, labels = _as_arrays(scores, labels)
    n_pos = int(labels.sum())
    n_neg = int(labels.size - n_pos)
    if n_pos == 0 or n_neg == 0:
        raise DegenerateLabels(f'ROC-AUC indefinida: {n_pos} positivos e {n_neg} negativos')
    ranks = rankdata(scores, method='average')
    u = ranks[labels == 1].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def prc_auc(scores, labels):
    '''
    Área sob a curva precisão-revocação (soma de precisão x incremento de revocação)

    Raises:
        NoPositives: nenhum positivo
    '''
    scores, labels = _as_arrays(scores, labels)
    n_pos = int(labels.sum())
    if n_pos == 0:
        raise NoPositives('PRC-AUC indefinida sem positivos')

    order = np.argsort(-scores, kind='mergesort')
    sorted_scores = scores[order]
    sorted_labels = labels[order]
    # fim de cada grupo de empate
    boundaries = np.r_[np.flatnonzero(np.diff(sorted_scores)), sorted_scores.size - 1]

    tp = np.cumsum(sorted_labels)[boundaries]
    seen = boundaries + 1
    precision = tp / seen
    recall_step = np.diff(np.r_[0, tp]) / n_pos
    return float(np.sum(precision * recall_step))


def roc_auc_bruteforce(scores, labels):
    '''Comparação O(n^2) de todos os pares positivo-negativo'''
    scores, labels = _as_arrays(scores, labels)
    pos = scores[labels == 1]
    neg = scores[labels == 0]
    if pos.size == 0 or neg.size == 0:
        raise DegenerateLabels('ROC-AUC indefinida com uma só classe')
    wins = 0.0
    for p in pos:
        for q in neg:
            wins += 1.0 if p > q else 0.5 if p == q else 0.0
    return wins / (pos.size * neg.size)


@dataclass(frozen=True)
class Band:
    mean: float
    std: float
    n: int

    @property
    def low(self):
        return self.mean - self.std

    @property
    def high(self):
        return self.mean + self.std

    def to_dict(self):
        return {'mean': self.mean, 'std': self.std, 'low': self.low, 'high': self.high, 'n': self.n}


def mean_std_band(values):
    '''Média +- 1 desvio padrão amostral (ddof=1; zero com um único valor)'''
    values = np.asarray(list(values), dtype=np.float64)
    if values.size == 0:
        raise MetricError('Faixa indefinida sem valores')
    std = float(values.std(ddof=1)) if values.size > 1 else 0.0
    return Band(mean=float(values.mean()), std=std, n=int(values.size))
