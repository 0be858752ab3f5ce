'''
Caminhos de fixtures e construtores compartilhados pelos testes
'''

import os
import unittest
from pathlib import Path

FIXTURES = Path(__file__).parent / 'fixtures'
CORPUS_PATH = FIXTURES / 'corpus.smi'
NITROGEN_TASK_PATH = FIXTURES / 'nitrogen_task.csv'
SINGLETON_TASK_PATH = FIXTURES / 'singleton_scaffolds.csv'

slow_test = unittest.skipUnless(os.environ.get('RUN_SLOW_TESTS') == '1', 'defina RUN_SLOW_TESTS=1')


def fixture_corpus():
    from app.datapipe.corpus import read_corpus
    return read_corpus(CORPUS_PATH)


def nitrogen_task():
    from app.datapipe.tasks import load_task_csv
    dataset, _ = load_task_csv(NITROGEN_TASK_PATH, 'contains_n')
    return dataset


def regex_tokenizer(lines=None):
    from app.tokenizers.encoding import Tokenizer
    lines = list(lines) if lines is not None else list(fixture_corpus())
    return Tokenizer.train('regex', lines, 100)


def tiny_model_config(vocab_size, **overrides):
    from app.transformer.model_config import ModelConfig
    values = dict(n_layers=1, n_heads=2, d_model=16, d_ff=32, vocab_size=vocab_size,
                  max_positions=32, dropout_rate=0.0)
    values.update(overrides)
    return ModelConfig(**values)


def singleton_task():
    from app.datapipe.tasks import load_task_csv
    dataset, _ = load_task_csv(SINGLETON_TASK_PATH, 'active')
    return dataset
