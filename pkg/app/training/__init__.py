'''
Treino: pré-treino MLM, ajuste fino com parada antecipada e experimento de escala
'''

from app.training.finetune import FinetuneResult, evaluate_classifier, finetune
from app.training.pretrain import PretrainResult, pretrain
from app.training.run_config import TrainRunConfig
from app.training.runlog import EarlyStopping, EpochRecord, RunLog
from app.training.scaling import ScalingReport, ScalingRow, scaling_experiment, summarize_scaling

__all__ = [
    'EarlyStopping',
    'EpochRecord',
    'FinetuneResult',
    'PretrainResult',
    'RunLog',
    'ScalingReport',
    'ScalingRow',
    'TrainRunConfig',
    'evaluate_classifier',
    'finetune',
    'pretrain',
    'scaling_experiment',
    'summarize_scaling',
]
