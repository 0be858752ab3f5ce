'''
Ingestão de tarefas rotuladas (CSV com coluna "smiles" e uma coluna de rótulo)
'''

import logging
from dataclasses import dataclass, field

import pandas as pd

from app.chemistry.molgraph import parse_smiles
from app.errors import CorpusIOError, EmptyDataset, SmilesParseError, TaskFormatError

logger = logging.getLogger(__name__)

SMILES_COLUMN = 'smiles'


@dataclass(frozen=True)
class TaskDataset:
    records: tuple  # (smiles, rótulo 0/1)
    task_name: str = 'task'

    def __len__(self):
        return len(self.records)

    @property
    def smiles(self):
        return [s for s, _ in self.records]

    @property
    def labels(self):
        return [y for _, y in self.records]

    def take(self, indices):
        return [self.records[i] for i in indices]


@dataclass
class DropReport:
    '''Linhas descartadas na leitura (número da linha no CSV, motivo)'''
    kept: int = 0
    dropped: list = field(default_factory=list)

    def counts(self):
        totals = {}
        for _, reason in self.dropped:
            totals[reason] = totals.get(reason, 0) + 1
        return totals

    def to_dict(self):
        return {
            'kept': self.kept,
            'dropped': len(self.dropped),
            'reasons': self.counts(),
        }


def _binary_label(value):
    if pd.isna(value):
        return None, 'rótulo ausente'
    try:
        number = float(value)
    except (TypeError, ValueError):
        return None, 'rótulo não binário'
    if number not in (0.0, 1.0):
        return None, 'rótulo não binário'
    return int(number), None


def task_from_frame(frame, label_column, task_name=None):
    '''
    Construir TaskDataset a partir de um DataFrame

    Returns:
        (TaskDataset, DropReport)
    '''
    columns = {str(c).strip().lower(): c for c in frame.columns}
    if SMILES_COLUMN not in columns:
        raise TaskFormatError(f'Coluna "{SMILES_COLUMN}" ausente; colunas: {list(frame.columns)}')
    if label_column not in frame.columns:
        raise TaskFormatError(f'Coluna de rótulo {label_column!r} ausente; colunas: {list(frame.columns)}')

    report = DropReport()
    records = []
    smiles_col = columns[SMILES_COLUMN]
    # linha 1 é o cabeçalho
    for row_no, (smiles, raw_label) in enumerate(zip(frame[smiles_col], frame[label_column]), start=2):
        label, reason = _binary_label(raw_label)
        if reason is None:
            smiles = '' if pd.isna(smiles) else str(smiles).strip()
            try:
                parse_smiles(smiles)
            except SmilesParseError:
                reason = 'SMILES inválido'
        if reason is not None:
            report.dropped.append((row_no, reason))
            continue
        records.append((smiles, label))

    report.kept = len(records)
    if report.dropped:
        logger.info('[TAREFA] %s: %d mantidas, %d descartadas %s',
                    task_name or label_column, report.kept, len(report.dropped), report.counts())
    return TaskDataset(records=tuple(records), task_name=task_name or label_column), report


def load_task_csv(path, label_column, task_name=None):
    '''
    Ler CSV de tarefa (cabeçalho, coluna "smiles" e coluna de rótulo)

    Raises:
        CorpusIOError: falha de leitura
        TaskFormatError: colunas ausentes
        EmptyDataset: nenhuma linha válida
    '''
    try:
        frame = pd.read_csv(path)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise CorpusIOError(f'Falha ao ler CSV {path}: {e}') from e
    dataset, report = task_from_frame(frame, label_column, task_name)
    if not len(dataset):
        raise EmptyDataset(f'Nenhuma linha válida em {path}')
    return dataset, report
