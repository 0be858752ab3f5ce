'''
Perfis de configuração da plataforma

Cada perfil é uma classe com atributos em MAIÚSCULAS. load_settings achata o
perfil num dicionário e aplica, opcionalmente, um arquivo JSON de ajustes
(chaves sem distinção de maiúsculas). Variáveis de ambiente não são lidas.
'''

import json
from pathlib import Path

from app.errors import ConfigurationError


class Config:
    '''Configuração base'''

    # Tokenizador
    TOKENIZER_KIND = 'bpe'
    VOCAB_SIZE = 1000
    MAX_SEQUENCE_LENGTH = 128

    # Curadoria e divisão
    DEDUP_MODE = 'canonical'
    SPLIT_FRACS = (0.8, 0.1, 0.1)

    # Modelo
    MODEL_N_LAYERS = 2
    MODEL_N_HEADS = 2
    MODEL_D_MODEL = 64
    MODEL_D_FF = 256
    DROPOUT_RATE = 0.1
    LAYER_NORM_EPS = 1e-5
    INITIALIZER_RANGE = 0.02
    MODEL_DTYPE = 'float32'

    # Otimizador (Adam)
    LEARNING_RATE = 1e-3
    ADAM_BETA1 = 0.9
    ADAM_BETA2 = 0.999
    ADAM_EPS = 1e-8
    WEIGHT_DECAY = 0.0

    # Pré-treino
    PRETRAIN_EPOCHS = 10
    PRETRAIN_BATCH_SIZE = 16
    PRETRAIN_VALID_FRACTION = 0.05
    MASK_RATE = 0.15
    EPOCH_OVERRIDES = {}

    # Ajuste fino
    FINETUNE_EPOCHS = 25
    FINETUNE_EPOCH_CAP = 25
    FINETUNE_BATCH_SIZE = 16
    PATIENCE = 3

    # Baseline
    FINGERPRINT_RADIUS = 2
    FINGERPRINT_WIDTH = 2048
    BASELINE_L2 = 1e-2
    BASELINE_MAX_ITER = 1000
    BASELINE_GTOL = 1e-6

    # Experimento de escala
    SCALING_SUBSETS = (1_000, 2_500, 10_000, 100_000)

    # Execução
    WORKERS = 1
    SHOW_PROGRESS = False
    HEATMAP_FORMAT = 'svg'


class DeskConfig(Config):
    '''Escala de bancada: um núcleo de CPU, minutos por execução'''


class FullScaleConfig(Config):
    '''Dimensões completas: 6 camadas, 12 cabeças, vocabulário de 52 mil tokens'''
    VOCAB_SIZE = 52_000
    MAX_SEQUENCE_LENGTH = 512
    MODEL_N_LAYERS = 6
    MODEL_N_HEADS = 12
    MODEL_D_MODEL = 768
    MODEL_D_FF = 3072
    LEARNING_RATE = 5e-5
    SCALING_SUBSETS = (100_000, 250_000, 1_000_000, 10_000_000)
    # o maior subconjunto sobreajusta com 10 épocas
    EPOCH_OVERRIDES = {10_000_000: 3}


class TestingConfig(Config):
    '''Tamanhos mínimos para a suíte de testes'''
    TESTING = True
    VOCAB_SIZE = 60
    MAX_SEQUENCE_LENGTH = 32
    MODEL_D_MODEL = 16
    MODEL_D_FF = 32
    DROPOUT_RATE = 0.0
    PRETRAIN_EPOCHS = 2
    PRETRAIN_BATCH_SIZE = 8
    PRETRAIN_VALID_FRACTION = 0.0
    FINETUNE_EPOCHS = 3
    FINETUNE_BATCH_SIZE = 8
    PATIENCE = 2
    FINGERPRINT_WIDTH = 256
    SCALING_SUBSETS = (10, 20)


# Dicionário de configurações
config = {
    'desk': DeskConfig,
    'full': FullScaleConfig,
    'testing': TestingConfig,
    'default': DeskConfig,
}


def profile_settings(profile='default'):
    '''Achatar um perfil (com herança) num dicionário'''
    try:
        cls = config[profile]
    except KeyError:
        raise ConfigurationError(f'Perfil desconhecido {profile!r} (opções: {sorted(config)})') from None
    settings = {}
    for klass in reversed(cls.__mro__):
        settings.update({k: v for k, v in vars(klass).items() if k.isupper()})
    return settings


def load_settings(profile='default', overrides_path=None):
    '''
    Carregar configuração efetiva

    Args:
        profile: nome do perfil em `config`
        overrides_path: arquivo JSON opcional com chaves a substituir

    Returns:
        dicionário CHAVE -> valor

    Raises:
        ConfigurationError: perfil, arquivo ou chave inválidos
    '''
    settings = profile_settings(profile)
    if overrides_path is None:
        return settings
    try:
        overrides = json.loads(Path(overrides_path).read_text(encoding='utf-8'))
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigurationError(f'Não foi possível ler {overrides_path}: {e}') from e
    if not isinstance(overrides, dict):
        raise ConfigurationError(f'{overrides_path} deve conter um objeto JSON')

    for key, value in overrides.items():
        name = str(key).upper()
        if name not in settings:
            raise ConfigurationError(f'Chave de configuração desconhecida {key!r}')
        if isinstance(settings[name], tuple) and isinstance(value, list):
            value = tuple(value)
        settings[name] = value
    return settings
