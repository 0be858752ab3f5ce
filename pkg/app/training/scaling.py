'''
Experimento de escala: para cada subconjunto aninhado do corpus,
pré-treino -> ajuste fino em cada tarefa -> ROC/PRC de teste, com deltas
relativos ao menor subconjunto.
'''

import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional

import pandas as pd

from app.errors import InvalidSubsetSizes, MetricError
from app.metrics import mean_std_band
from app.training.finetune import finetune
from app.training.pretrain import pretrain

logger = logging.getLogger(__name__)

# deltas observados entre o menor e o maior subconjunto em escala completa;
# registrados como contexto no relatório, nunca verificados
REFERENCE_DELTAS = {'roc_auc': 0.110, 'prc_auc': 0.059}

BAND_DEFINITION = 'média ± 1 desvio padrão amostral (ddof=1) entre tarefas'


@dataclass(frozen=True)
class ScalingRow:
    subset_size: int
    task: str
    test_roc_auc: Optional[float]
    test_prc_auc: Optional[float]
    delta_roc_auc: Optional[float] = None
    delta_prc_auc: Optional[float] = None
    best_epoch: Optional[int] = None
    pretrain_loss: Optional[float] = None


@dataclass
class ScalingReport:
    rows: list = field(default_factory=list)
    seed: int = 0
    reference: dict = field(default_factory=lambda: dict(REFERENCE_DELTAS))

    @property
    def subset_sizes(self):
        return sorted({row.subset_size for row in self.rows})

    @property
    def tasks(self):
        return list(dict.fromkeys(row.task for row in self.rows))

    def to_frame(self):
        return pd.DataFrame([asdict(row) for row in self.rows])

    def to_jsonl(self):
        '''Cabeçalho, uma linha por (subconjunto, tarefa) e as faixas por subconjunto'''
        lines = [json.dumps({
            'type': 'header',
            'seed': self.seed,
            'subset_sizes': self.subset_sizes,
            'tasks': self.tasks,
            'band': BAND_DEFINITION,
            'reference_deltas': self.reference,
        }, ensure_ascii=False)]
        lines.extend(json.dumps({'type': 'row', **asdict(row)}, ensure_ascii=False) for row in self.rows)
        for size, bands in summarize_scaling(self).items():
            lines.append(json.dumps({
                'type': 'band',
                'subset_size': size,
                **{name: None if band is None else band.to_dict() for name, band in bands.items()},
            }, ensure_ascii=False))
        return '\n'.join(lines) + '\n'

    @classmethod
    def from_jsonl(cls, text):
        report = cls()
        for line in text.splitlines():
            if not line.strip():
                continue
            doc = json.loads(line)
            kind = doc.pop('type')
            if kind == 'header':
                report.seed = doc.get('seed', 0)
                report.reference = doc.get('reference_deltas', report.reference)
            elif kind == 'row':
                report.rows.append(ScalingRow(**doc))
        return report


def check_nested(subsets):
    '''Subconjuntos ordenados por tamanho, cada um prefixo do seguinte'''
    if len(subsets) < 2:
        raise InvalidSubsetSizes('O experimento de escala exige pelo menos 2 subconjuntos')
    ordered = sorted(subsets, key=len)
    for small, large in zip(ordered, ordered[1:]):
        if list(large)[:len(small)] != list(small):
            raise InvalidSubsetSizes(f'Subconjunto de {len(small)} linhas não é prefixo do de {len(large)}')
    return ordered


def _run_subset(job):
    '''Pipeline completo de um subconjunto; função de módulo para o pool de processos'''
    subset, tasks, tokenizer, model_config, pretrain_config, finetune_config = job
    result = pretrain(subset, tokenizer, pretrain_config, model_config)
    final_loss = result.log.summary.get('final_train_loss')
    outcomes = []
    for task, split in tasks:
        tuned = finetune(result.checkpoint, task, split, finetune_config)
        outcomes.append((task.task_name, tuned.test_roc_auc, tuned.test_prc_auc, tuned.log.best_epoch))
    return len(subset), final_loss, outcomes


def _delta(value, base):
    if value is None or base is None:
        return None
    return value - base


def scaling_experiment(subsets, tasks, tokenizer, model_config, pretrain_config, finetune_config, workers=1):
    '''
    Executar a escada de escala

    Args:
        subsets: lista de Corpus aninhados (>= 2)
        tasks: lista de (TaskDataset, SplitIndices)
        tokenizer: Tokenizer compartilhado
        model_config: ModelConfig
        pretrain_config, finetune_config: TrainRunConfig de cada etapa
        workers: processos paralelos (1 = sequencial)

    Returns:
        ScalingReport
    '''
    ordered = check_nested(subsets)
    jobs = [(subset, tasks, tokenizer, model_config, pretrain_config, finetune_config) for subset in ordered]
    logger.info('[ESCALA] %d subconjuntos %s, %d tarefas, %d processo(s)',
                len(ordered), [len(s) for s in ordered], len(tasks), workers)

    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outputs = list(pool.map(_run_subset, jobs))
    else:
        outputs = [_run_subset(job) for job in jobs]

    base = {name: (roc, prc) for name, roc, prc, _ in outputs[0][2]}
    report = ScalingReport(seed=pretrain_config.seed)
    for size, final_loss, outcomes in outputs:
        for name, roc, prc, best_epoch in outcomes:
            report.rows.append(ScalingRow(
                subset_size=size,
                task=name,
                test_roc_auc=roc,
                test_prc_auc=prc,
                delta_roc_auc=_delta(roc, base[name][0]),
                delta_prc_auc=_delta(prc, base[name][1]),
                best_epoch=best_epoch,
                pretrain_loss=final_loss,
            ))
            logger.info('[ESCALA] %d linhas, %s: ROC-AUC=%s PRC-AUC=%s', size, name, roc, prc)
    return report


def summarize_scaling(report):
    '''
    Faixa média ± desvio padrão amostral dos deltas entre tarefas, por subconjunto

    Returns:
        {subset_size: {"delta_roc_auc": Band | None, "delta_prc_auc": Band | None}}
    '''
    summary = {}
    for size in report.subset_sizes:
        rows = [row for row in report.rows if row.subset_size == size]
        bands = {}
        for name in ('delta_roc_auc', 'delta_prc_auc'):
            values = [getattr(row, name) for row in rows if getattr(row, name) is not None]
            try:
                bands[name] = mean_std_band(values)
            except MetricError:
                bands[name] = None
        summary[size] = bands
    return summary
