'''
Configuração de uma execução de treino
'''

from dataclasses import asdict, dataclass, field, replace

from app.errors import TrainingError
from app.transformer.optimizer import AdamHyper

MODES = ('pretrain', 'finetune')
PRETRAIN_EPOCHS = 10
FINETUNE_EPOCH_CAP = 25


@dataclass(frozen=True)
class TrainRunConfig:
    mode: str = 'pretrain'
    epochs: int = PRETRAIN_EPOCHS
    patience: int = 3
    seed: int = 0
    batch_size: int = 16
    adam: AdamHyper = field(default_factory=AdamHyper)
    mask_rate: float = 0.15
    max_len: int = 128
    valid_fraction: float = 0.0
    epoch_overrides: dict = field(default_factory=dict)  # tamanho do subconjunto -> épocas
    epoch_cap: int = FINETUNE_EPOCH_CAP
    show_progress: bool = False

    def __post_init__(self):
        if self.mode not in MODES:
            raise TrainingError(f'Modo de treino desconhecido {self.mode!r}')
        if self.epochs < 1:
            raise TrainingError('epochs deve ser >= 1')
        if self.mode == 'finetune' and self.epochs > self.epoch_cap:
            raise TrainingError(f'Ajuste fino limitado a {self.epoch_cap} épocas (recebido {self.epochs})')
        if self.patience < 1:
            raise TrainingError('patience deve ser >= 1')
        if self.batch_size < 1:
            raise TrainingError('batch_size deve ser >= 1')
        if not 0.0 <= self.valid_fraction < 1.0:
            raise TrainingError('valid_fraction deve estar em [0, 1)')

    @property
    def early_stop_metric(self):
        return 'valid_roc_auc' if self.mode == 'finetune' else None

    def epochs_for(self, corpus_size):
        '''Épocas de pré-treino, com exceção por tamanho de subconjunto'''
        return int(self.epoch_overrides.get(corpus_size, self.epochs))

    def with_seed(self, seed):
        return replace(self, seed=seed)

    def to_dict(self):
        values = asdict(self)
        values['epoch_overrides'] = {str(k): v for k, v in self.epoch_overrides.items()}
        return values

    @classmethod
    def from_settings(cls, settings, mode, seed):
        '''Construir a partir do dicionário de configuração'''
        if mode == 'pretrain':
            epochs = int(settings['PRETRAIN_EPOCHS'])
            batch_size = int(settings['PRETRAIN_BATCH_SIZE'])
        else:
            epochs = int(settings['FINETUNE_EPOCHS'])
            batch_size = int(settings['FINETUNE_BATCH_SIZE'])
        overrides = {int(k): int(v) for k, v in (settings.get('EPOCH_OVERRIDES') or {}).items()}
        return cls(
            mode=mode,
            epochs=epochs,
            patience=int(settings['PATIENCE']),
            seed=int(seed),
            batch_size=batch_size,
            adam=AdamHyper.from_settings(settings),
            mask_rate=float(settings['MASK_RATE']),
            max_len=int(settings['MAX_SEQUENCE_LENGTH']),
            valid_fraction=float(settings['PRETRAIN_VALID_FRACTION']),
            epoch_overrides=overrides,
            epoch_cap=int(settings['FINETUNE_EPOCH_CAP']),
            show_progress=bool(settings['SHOW_PROGRESS']),
        )
