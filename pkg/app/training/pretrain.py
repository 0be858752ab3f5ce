'''
Pré-treino MLM com mascaramento dinâmico

Cada época reembaralha o corpus com (seed, época, 1), remascara com
(seed, época) e sorteia o dropout com (seed, época, 2): a execução é uma
função pura de (corpus, tokenizador, configuração, semente).
'''

import logging
import math
import time
from dataclasses import dataclass

import numpy as np
from tqdm import tqdm

from app.datapipe.masking import collate_mlm, make_mlm_examples
from app.errors import ConfigMismatch, EmptyCorpus, TokenizationGap
from app.training.runlog import EpochRecord, RunLog
from app.transformer.checkpoint import Checkpoint
from app.transformer.encoder import MolecularTransformer
from app.transformer.optimizer import AdamState, adam_step

logger = logging.getLogger(__name__)

# fluxo fixo para as máscaras de validação (épocas de treino começam em 1)
VALID_MASK_EPOCH = 0


@dataclass
class PretrainResult:
    checkpoint: Checkpoint
    last: Checkpoint
    log: RunLog

    def __iter__(self):
        return iter((self.checkpoint, self.log))


def encode_corpus(lines, tokenizer, max_len):
    '''Codificar linhas; linhas não tokenizáveis são ignoradas com aviso'''
    sequences = []
    for line in lines:
        try:
            sequences.append(tokenizer.encode(line, max_len))
        except TokenizationGap as e:
            logger.warning('[PRETREINO] Linha ignorada %r: %s', line, e)
    return sequences


def _batches(items, size):
    for start in range(0, len(items), size):
        yield items[start:start + size]


def mlm_epoch_loss(model, sequences, vocab, config, epoch, rng=None, optimizer_state=None):
    '''
    Percorrer sequências em lotes; com optimizer_state treina, sem ele só avalia

    Returns:
        (perda média ponderada por posições mascaradas ou None, estado do otimizador)
    '''
    examples = list(make_mlm_examples(sequences, vocab, config.mask_rate, config.seed, epoch))
    total_loss = 0.0
    total_selected = 0
    for batch in _batches(examples, config.batch_size):
        ids, mask, labels = collate_mlm(batch)
        n_selected = sum(example.n_selected for example in batch)
        if n_selected == 0:
            continue
        loss, grads = model.loss_and_grads((ids, mask), labels, mode='mlm', rng=rng)
        if optimizer_state is not None:
            model.params, optimizer_state = adam_step(model.params, grads, optimizer_state, config.adam)
        total_loss += loss * n_selected
        total_selected += n_selected
        logger.debug('[PRETREINO] Lote: perda=%.4f (%d posições)', loss, n_selected)
    mean = total_loss / total_selected if total_selected else None
    return mean, optimizer_state


def pretrain(corpus, tokenizer, config, model_config, initial=None):
    '''
    Pré-treinar o encoder por MLM

    Args:
        corpus: Corpus (ou iterável de strings)
        tokenizer: Tokenizer treinado
        config: TrainRunConfig (mode="pretrain")
        model_config: ModelConfig (vocab_size igual ao do tokenizador)
        initial: Checkpoint opcional para continuar o treino

    Returns:
        PretrainResult(checkpoint=melhor, last=última época, log)
    '''
    if model_config.vocab_size != len(tokenizer.vocab):
        raise ConfigMismatch(
            f'vocab_size do modelo ({model_config.vocab_size}) difere do tokenizador ({len(tokenizer.vocab)})'
        )
    lines = [line for line in corpus]
    if not lines:
        raise EmptyCorpus('Corpus de pré-treino vazio')

    max_len = min(config.max_len, model_config.max_positions)
    n_valid = math.ceil(config.valid_fraction * len(lines)) if config.valid_fraction > 0 else 0
    if n_valid >= len(lines):
        n_valid = 0
    train_seqs = encode_corpus(lines[:len(lines) - n_valid], tokenizer, max_len)
    valid_seqs = encode_corpus(lines[len(lines) - n_valid:], tokenizer, max_len) if n_valid else []
    if not train_seqs:
        raise EmptyCorpus('Nenhuma linha tokenizável no corpus de pré-treino')

    if initial is not None:
        model = MolecularTransformer(model_config, params={k: v.copy() for k, v in initial.params.items()})
        state = initial.optimizer or AdamState.zeros_like(model.params)
        # o estado do Adam já conta os passos anteriores
        step_offset = initial.step - state.step
        # máscaras e embaralhamento seguem a numeração de épocas do checkpoint
        previous = initial.metadata or {}
        first_epoch = int(previous.get('epoch') or 0) + 1 if previous.get('stage') == 'pretrain' else 1
    else:
        model = MolecularTransformer(model_config, seed=config.seed)
        state = AdamState.zeros_like(model.params)
        step_offset = 0
        first_epoch = 1

    epochs = config.epochs_for(len(lines))
    last_epoch = first_epoch + epochs - 1
    log = RunLog(mode='pretrain')
    best_value = None
    best_params = model.copy_parameters()
    best_step = step_offset + state.step
    use_dropout = model_config.dropout_rate > 0

    logger.info('[PRETREINO] %d sequências de treino, %d de validação, %d épocas, %d parâmetros',
                len(train_seqs), len(valid_seqs), epochs, model.parameter_count())

    for epoch in tqdm(range(first_epoch, last_epoch + 1), disable=not config.show_progress, desc='Pré-treino'):
        started = time.perf_counter()
        order = np.random.default_rng((config.seed, epoch, 1)).permutation(len(train_seqs))
        dropout_rng = np.random.default_rng((config.seed, epoch, 2)) if use_dropout else None

        train_loss, state = mlm_epoch_loss(
            model, [train_seqs[i] for i in order], tokenizer.vocab, config, epoch,
            rng=dropout_rng, optimizer_state=state,
        )
        valid_loss = None
        if valid_seqs:
            valid_loss, _ = mlm_epoch_loss(model, valid_seqs, tokenizer.vocab, config, VALID_MASK_EPOCH)

        log.append(EpochRecord(
            epoch=epoch,
            train_loss=train_loss,
            valid_loss=valid_loss,
            wall_time=time.perf_counter() - started,
        ))

        monitored = valid_loss if valid_seqs else train_loss
        if monitored is not None and (best_value is None or monitored < best_value):
            best_value = monitored
            best_params = model.copy_parameters()
            best_step = step_offset + state.step
            log.best_epoch = epoch

        logger.info('[PRETREINO] Época %d/%d: perda=%s validação=%s', epoch, last_epoch,
                    _fmt(train_loss), _fmt(valid_loss))

    log.summary = {
        'final_train_loss': log.records[-1].train_loss,
        'best_monitored_loss': best_value,
        'monitor': 'valid_loss' if valid_seqs else 'train_loss',
    }
    metadata = {'stage': 'pretrain', 'seed': config.seed, 'corpus_size': len(lines)}
    best = Checkpoint(
        config=model_config, params=best_params, step=best_step, tokenizer=tokenizer,
        metadata={**metadata, 'epoch': log.best_epoch},
    )
    last = Checkpoint(
        config=model_config, params=model.copy_parameters(), step=step_offset + state.step,
        optimizer=state, tokenizer=tokenizer, metadata={**metadata, 'epoch': last_epoch},
    )
    return PretrainResult(checkpoint=best, last=last, log=log)


def _fmt(value):
    return '-' if value is None else f'{value:.4f}'
