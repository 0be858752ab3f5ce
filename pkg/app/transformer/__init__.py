'''
Encoder transformer em numpy: camadas, modelo, Adam e checkpoints
'''

from app.transformer.checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from app.transformer.encoder import AttentionRecord, MolecularTransformer, init_parameters, numerical_gradient
from app.transformer.model_config import ModelConfig
from app.transformer.optimizer import AdamHyper, AdamState, adam_step

__all__ = [
    'AdamHyper',
    'AdamState',
    'AttentionRecord',
    'Checkpoint',
    'ModelConfig',
    'MolecularTransformer',
    'adam_step',
    'init_parameters',
    'load_checkpoint',
    'numerical_gradient',
    'save_checkpoint',
]
