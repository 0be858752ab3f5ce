'''
Ajuste fino para classificação binária com parada antecipada por ROC-AUC
de validação. O teste só é avaliado uma vez, com os pesos da melhor época.
'''

import logging
import time
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import log_softmax
from tqdm import tqdm

from app.errors import ConfigMismatch, EmptySplit, MetricError
from app.metrics import prc_auc, roc_auc
from app.tokenizers.encoding import collate
from app.training.runlog import EarlyStopping, EpochRecord, RunLog
from app.transformer.checkpoint import Checkpoint
from app.transformer.encoder import MolecularTransformer, reset_classifier
from app.transformer.optimizer import AdamState, adam_step

logger = logging.getLogger(__name__)


@dataclass
class Evaluation:
    loss: float
    roc_auc: Optional[float]
    prc_auc: Optional[float]
    scores: np.ndarray


@dataclass
class FinetuneResult:
    checkpoint: Checkpoint
    log: RunLog
    test_roc_auc: Optional[float]
    test_prc_auc: Optional[float]

    def __iter__(self):
        return iter((self.checkpoint, self.log))


def _metric_or_none(metric, scores, labels, partition):
    try:
        return metric(scores, labels)
    except MetricError as e:
        logger.warning('[AJUSTE] %s indefinida em %s: %s', metric.__name__, partition, e)
        return None


def evaluate_classifier(model, sequences, labels, batch_size=64, partition='valid'):
    '''
    Perda média, ROC-AUC e PRC-AUC sem dropout

    Métricas indefinidas (uma só classe) voltam como None.
    '''
    labels = np.asarray(labels, dtype=np.int64)
    scores = np.empty(labels.shape[0], dtype=np.float64)
    total = 0.0
    for start in range(0, len(sequences), batch_size):
        batch = collate(sequences[start:start + batch_size])
        logits = model.forward_classify(batch).astype(np.float64)
        logp = log_softmax(logits, axis=-1)
        rows = labels[start:start + batch_size]
        total -= float(logp[np.arange(rows.shape[0]), rows].sum())
        scores[start:start + rows.shape[0]] = np.exp(logp[:, 1])
    return Evaluation(
        loss=total / max(1, labels.shape[0]),
        roc_auc=_metric_or_none(roc_auc, scores, labels, partition),
        prc_auc=_metric_or_none(prc_auc, scores, labels, partition),
        scores=scores,
    )


def finetune(checkpoint, task, split, config):
    '''
    Ajustar um checkpoint pré-treinado numa tarefa rotulada

    Args:
        checkpoint: Checkpoint com tokenizador
        task: TaskDataset
        split: SplitIndices sobre a tarefa
        config: TrainRunConfig (mode="finetune")

    Returns:
        FinetuneResult(checkpoint com os pesos da melhor época, log, ROC/PRC de teste)

    Raises:
        EmptySplit: alguma partição vazia
        ConfigMismatch: checkpoint sem tokenizador ou vocabulário incompatível
    '''
    tokenizer = checkpoint.tokenizer
    if tokenizer is None:
        raise ConfigMismatch('Checkpoint sem tokenizador embutido')
    if len(tokenizer.vocab) != checkpoint.config.vocab_size:
        raise ConfigMismatch(
            f'Vocabulário do tokenizador ({len(tokenizer.vocab)}) difere do modelo ({checkpoint.config.vocab_size})'
        )
    for name, indices in split.to_dict().items():
        if not indices:
            raise EmptySplit(f'Partição {name!r} vazia: parada antecipada indefinida')
    split.validate(len(task))

    model_config = checkpoint.config
    max_len = min(config.max_len, model_config.max_positions)
    sequences = [tokenizer.encode(s, max_len) for s in task.smiles]
    labels = np.asarray(task.labels, dtype=np.int64)

    def partition(name):
        idx = list(split.partition(name))
        return [sequences[i] for i in idx], labels[idx]

    train_seqs, train_labels = partition('train')
    valid_seqs, valid_labels = partition('valid')
    test_seqs, test_labels = partition('test')

    params = reset_classifier(checkpoint.params, model_config, seed=(config.seed, 3))
    model = MolecularTransformer(model_config, params={k: v.copy() for k, v in params.items()})
    state = AdamState.zeros_like(model.params)
    stopper = EarlyStopping(config.patience)
    log = RunLog(mode='finetune')
    best_params = None
    use_dropout = model_config.dropout_rate > 0

    logger.info('[AJUSTE] %s: treino=%d validação=%d teste=%d, até %d épocas (paciência %d)',
                task.task_name, len(train_seqs), len(valid_seqs), len(test_seqs),
                config.epochs, config.patience)

    for epoch in tqdm(range(1, config.epochs + 1), disable=not config.show_progress, desc='Ajuste fino'):
        started = time.perf_counter()
        order = np.random.default_rng((config.seed, epoch, 1)).permutation(len(train_seqs))
        dropout_rng = np.random.default_rng((config.seed, epoch, 2)) if use_dropout else None

        total = 0.0
        for start in range(0, len(order), config.batch_size):
            chosen = order[start:start + config.batch_size]
            batch = collate([train_seqs[i] for i in chosen])
            loss, grads = model.loss_and_grads(batch, train_labels[chosen], mode='classify', rng=dropout_rng)
            model.params, state = adam_step(model.params, grads, state, config.adam)
            total += loss * len(chosen)

        valid = evaluate_classifier(model, valid_seqs, valid_labels, config.batch_size)
        log.append(EpochRecord(
            epoch=epoch,
            train_loss=total / len(train_seqs),
            valid_loss=valid.loss,
            valid_roc_auc=valid.roc_auc,
            valid_prc_auc=valid.prc_auc,
            wall_time=time.perf_counter() - started,
        ))
        if stopper.update(epoch, valid.roc_auc):
            best_params = model.copy_parameters()
            log.best_epoch = epoch
        elif best_params is None:
            # sem ROC-AUC definida até aqui: a primeira época treinada é a melhor provisória
            best_params = model.copy_parameters()
        logger.info('[AJUSTE] Época %d/%d: perda=%.4f validação=%.4f ROC-AUC=%s', epoch, config.epochs,
                    total / len(train_seqs), valid.loss, '-' if valid.roc_auc is None else f'{valid.roc_auc:.4f}')
        if stopper.should_stop:
            logger.info('[AJUSTE] Parada antecipada após %d épocas sem melhora', config.patience)
            break

    if log.best_epoch is None:
        # ROC-AUC de validação nunca definida: ficam os pesos da primeira época
        log.best_epoch = 1
        logger.warning('[AJUSTE] ROC-AUC de validação indefinida em todas as épocas')

    model.params = best_params
    test = evaluate_classifier(model, test_seqs, test_labels, config.batch_size, partition='test')
    log.summary = {
        'task': task.task_name,
        'epochs_run': len(log),
        'stopped_early': stopper.should_stop and len(log) < config.epochs,
        'best_valid_roc_auc': log.best_record.valid_roc_auc,
        'test_roc_auc': test.roc_auc,
        'test_prc_auc': test.prc_auc,
    }
    logger.info('[AJUSTE] %s: melhor época %d, teste ROC-AUC=%s PRC-AUC=%s', task.task_name, log.best_epoch,
                test.roc_auc, test.prc_auc)

    result_checkpoint = Checkpoint(
        config=model_config,
        params=best_params,
        step=checkpoint.step + state.step,
        tokenizer=tokenizer,
        metadata={
            'stage': 'finetune',
            'task': task.task_name,
            'seed': config.seed,
            'best_epoch': log.best_epoch,
            'pretrain': checkpoint.metadata,
        },
    )
    return FinetuneResult(result_checkpoint, log, test.roc_auc, test.prc_auc)
