'''
Hiperparâmetros do encoder transformer
'''

from dataclasses import asdict, dataclass, fields

import numpy as np

from app.errors import InvalidModelConfig

MAX_POSITIONS_LIMIT = 512
SUPPORTED_DTYPES = ('float32', 'float64')

# campos que definem a forma dos tensores (comparados ao carregar checkpoints)
STRUCTURAL_FIELDS = ('n_layers', 'n_heads', 'd_model', 'd_ff', 'vocab_size', 'max_positions')


@dataclass(frozen=True)
class ModelConfig:
    n_layers: int = 2
    n_heads: int = 2
    d_model: int = 64
    d_ff: int = 256
    vocab_size: int = 1000
    max_positions: int = 128
    dropout_rate: float = 0.1
    layer_norm_eps: float = 1e-5
    initializer_range: float = 0.02
    dtype: str = 'float32'

    def __post_init__(self):
        for name in ('n_layers', 'n_heads', 'd_model', 'd_ff', 'vocab_size', 'max_positions'):
            if int(getattr(self, name)) < 1:
                raise InvalidModelConfig(f'{name} deve ser positivo (recebido {getattr(self, name)})')
        if self.d_model % self.n_heads:
            raise InvalidModelConfig(f'd_model={self.d_model} não é divisível por n_heads={self.n_heads}')
        if self.max_positions > MAX_POSITIONS_LIMIT:
            raise InvalidModelConfig(f'max_positions={self.max_positions} excede {MAX_POSITIONS_LIMIT}')
        if not 0.0 <= self.dropout_rate < 1.0:
            raise InvalidModelConfig(f'dropout_rate={self.dropout_rate} fora de [0, 1)')
        if self.dtype not in SUPPORTED_DTYPES:
            raise InvalidModelConfig(f'dtype {self.dtype!r} não suportado {SUPPORTED_DTYPES}')

    @property
    def head_dim(self):
        return self.d_model // self.n_heads

    @property
    def n_mechanisms(self):
        '''Número de mecanismos de atenção (camadas x cabeças)'''
        return self.n_layers * self.n_heads

    @property
    def np_dtype(self):
        return np.dtype(self.dtype)

    # ------------------------------------------------------------------
    @classmethod
    def full_scale(cls, vocab_size=52_000, **overrides):
        '''6 camadas, 12 cabeças, proporções RoBERTa-base'''
        values = dict(n_layers=6, n_heads=12, d_model=768, d_ff=3072,
                      vocab_size=vocab_size, max_positions=512)
        values.update(overrides)
        return cls(**values)

    @classmethod
    def desk(cls, vocab_size=1000, **overrides):
        values = dict(n_layers=2, n_heads=2, d_model=64, d_ff=256,
                      vocab_size=vocab_size, max_positions=128)
        values.update(overrides)
        return cls(**values)

    @classmethod
    def from_settings(cls, settings, vocab_size):
        '''Construir a partir do dicionário de configuração (chaves MODEL_*)'''
        return cls(
            n_layers=int(settings['MODEL_N_LAYERS']),
            n_heads=int(settings['MODEL_N_HEADS']),
            d_model=int(settings['MODEL_D_MODEL']),
            d_ff=int(settings['MODEL_D_FF']),
            vocab_size=int(vocab_size),
            max_positions=int(settings['MAX_SEQUENCE_LENGTH']),
            dropout_rate=float(settings['DROPOUT_RATE']),
            layer_norm_eps=float(settings['LAYER_NORM_EPS']),
            initializer_range=float(settings['INITIALIZER_RANGE']),
            dtype=str(settings['MODEL_DTYPE']),
        )

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, values):
        known = {f.name for f in fields(cls)}
        unknown = set(values) - known
        if unknown:
            raise InvalidModelConfig(f'Campos de configuração desconhecidos: {sorted(unknown)}')
        return cls(**values)

    def structural_differences(self, other):
        return {
            name: (getattr(self, name), getattr(other, name))
            for name in STRUCTURAL_FIELDS
            if getattr(self, name) != getattr(other, name)
        }

    def parameter_shapes(self):
        '''Nome -> forma de cada tensor, na ordem canônica'''
        d, f = self.d_model, self.d_ff
        shapes = {
            'embeddings.token': (self.vocab_size, d),
            'embeddings.position': (self.max_positions, d),
        }
        for layer in range(self.n_layers):
            prefix = f'layers.{layer}'
            for proj in ('query', 'key', 'value', 'output'):
                shapes[f'{prefix}.attention.{proj}.weight'] = (d, d)
                shapes[f'{prefix}.attention.{proj}.bias'] = (d,)
            shapes[f'{prefix}.attention.norm.gamma'] = (d,)
            shapes[f'{prefix}.attention.norm.beta'] = (d,)
            shapes[f'{prefix}.ffn.inner.weight'] = (d, f)
            shapes[f'{prefix}.ffn.inner.bias'] = (f,)
            shapes[f'{prefix}.ffn.outer.weight'] = (f, d)
            shapes[f'{prefix}.ffn.outer.bias'] = (d,)
            shapes[f'{prefix}.ffn.norm.gamma'] = (d,)
            shapes[f'{prefix}.ffn.norm.beta'] = (d,)
        shapes['mlm_head.weight'] = (d, self.vocab_size)
        shapes['mlm_head.bias'] = (self.vocab_size,)
        shapes['classifier.weight'] = (d, 2)
        shapes['classifier.bias'] = (2,)
        return shapes

    def parameter_count(self):
        return int(sum(np.prod(shape) for shape in self.parameter_shapes().values()))
