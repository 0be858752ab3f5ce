'''
Preparação de dados: corpus, tarefas rotuladas, divisão por scaffold e MLM
'''

from app.datapipe.corpus import Corpus, curate, read_corpus, subset, write_corpus
from app.datapipe.masking import MlmExample, collate_mlm, make_mlm_examples
from app.datapipe.splitters import SplitIndices, scaffold_split, split_report
from app.datapipe.tasks import DropReport, TaskDataset, load_task_csv

__all__ = [
    'Corpus',
    'DropReport',
    'MlmExample',
    'SplitIndices',
    'TaskDataset',
    'collate_mlm',
    'curate',
    'load_task_csv',
    'make_mlm_examples',
    'read_corpus',
    'scaffold_split',
    'split_report',
    'subset',
    'write_corpus',
]
