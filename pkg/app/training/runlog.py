'''
Registro de épocas (JSONL) e parada antecipada
'''

import json
import math
from dataclasses import asdict, dataclass, field, fields
from typing import Optional

from app.errors import TrainingError


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    train_loss: Optional[float] = None
    valid_loss: Optional[float] = None
    valid_roc_auc: Optional[float] = None
    valid_prc_auc: Optional[float] = None
    wall_time: float = 0.0


@dataclass
class RunLog:
    '''
    Épocas em ordem estritamente crescente, marcador da melhor época e
    resumo final (métricas de teste, parada antecipada)
    '''
    mode: str = 'pretrain'
    records: list = field(default_factory=list)
    best_epoch: Optional[int] = None
    summary: dict = field(default_factory=dict)

    def append(self, record):
        if self.records and record.epoch <= self.records[-1].epoch:
            raise TrainingError(f'Época {record.epoch} não é posterior a {self.records[-1].epoch}')
        self.records.append(record)

    def __len__(self):
        return len(self.records)

    def record_for(self, epoch):
        for record in self.records:
            if record.epoch == epoch:
                return record
        return None

    @property
    def best_record(self):
        return None if self.best_epoch is None else self.record_for(self.best_epoch)

    def metrics_only(self):
        '''Visão sem tempo de parede (comparações de determinismo)'''
        epochs = [{k: v for k, v in asdict(r).items() if k != 'wall_time'} for r in self.records]
        return {'mode': self.mode, 'epochs': epochs, 'best_epoch': self.best_epoch, 'summary': self.summary}

    # ------------------------------------------------------------------
    def to_jsonl(self, include_timing=True):
        '''Sem tempos de parede (include_timing=False) o arquivo é reprodutível byte a byte'''
        lines = []
        for record in self.records:
            values = asdict(record)
            if not include_timing:
                del values['wall_time']
            lines.append(json.dumps({'type': 'epoch', **values}, ensure_ascii=False))
        lines.append(json.dumps({
            'type': 'summary', 'mode': self.mode, 'best_epoch': self.best_epoch, **self.summary,
        }, ensure_ascii=False))
        return '\n'.join(lines) + '\n'

    @classmethod
    def from_jsonl(cls, text):
        log = cls()
        names = {f.name for f in fields(EpochRecord)}
        for line_no, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            try:
                doc = json.loads(line)
            except json.JSONDecodeError as e:
                raise TrainingError(f'Linha {line_no} do registro ilegível: {e}') from e
            kind = doc.pop('type', None)
            if kind == 'epoch':
                log.append(EpochRecord(**{k: v for k, v in doc.items() if k in names}))
            elif kind == 'summary':
                log.mode = doc.pop('mode', log.mode)
                log.best_epoch = doc.pop('best_epoch', None)
                log.summary = doc
            else:
                raise TrainingError(f'Linha {line_no}: tipo de registro desconhecido {kind!r}')
        return log


class EarlyStopping:
    '''
    Parada por paciência sobre uma métrica a maximizar

    Só melhora estrita conta: em empate a época anterior continua a melhor.
    '''

    def __init__(self, patience):
        if patience < 1:
            raise TrainingError('patience deve ser >= 1')
        self.patience = patience
        self.best_value = None
        self.best_epoch = None
        self.epochs_without_improvement = 0

    def update(self, epoch, value):
        '''Registrar a métrica da época; retorna True se for a nova melhor'''
        if value is None or (isinstance(value, float) and math.isnan(value)):
            improved = False
        else:
            improved = self.best_value is None or value > self.best_value
        if improved:
            self.best_value = value
            self.best_epoch = epoch
            self.epochs_without_improvement = 0
        else:
            self.epochs_without_improvement += 1
        return improved

    @property
    def should_stop(self):
        return self.epochs_without_improvement >= self.patience
