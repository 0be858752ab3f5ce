'''
Divisão por scaffold (80/10/10)

Moléculas são agrupadas pela chave do scaffold de Murcko; grupos ordenados
por tamanho decrescente (empate pela chave) enchem o treino até >= 80% do
total, depois a validação até >= 90%; o restante vai para o teste.
Um scaffold nunca aparece em duas partições.
'''

import json
import logging
from dataclasses import dataclass
from typing import Optional

from app.chemistry.scaffold import smiles_scaffold_key
from app.errors import EmptyDataset, TaskFormatError

logger = logging.getLogger(__name__)

DEFAULT_FRACS = (0.8, 0.1, 0.1)
PARTITIONS = ('train', 'valid', 'test')
_EPS = 1e-9


@dataclass(frozen=True)
class SplitIndices:
    train: tuple
    valid: tuple
    test: tuple
    seed: Optional[int] = None

    def partition(self, name):
        return getattr(self, name)

    def sizes(self):
        return {name: len(self.partition(name)) for name in PARTITIONS}

    def validate(self, n_records):
        '''Partições disjuntas cobrindo exatamente 0..n-1'''
        seen = set()
        for name in PARTITIONS:
            for idx in self.partition(name):
                if idx in seen or not 0 <= idx < n_records:
                    raise TaskFormatError(f'Índice {idx} repetido ou fora do intervalo em {name!r}')
                seen.add(idx)
        if len(seen) != n_records:
            raise TaskFormatError(f'Divisão cobre {len(seen)} de {n_records} registros')

    def to_dict(self):
        return {name: list(self.partition(name)) for name in PARTITIONS}

    def to_json(self):
        return json.dumps(self.to_dict()) + '\n'

    @classmethod
    def from_json(cls, text):
        try:
            doc = json.loads(text)
            return cls(*(tuple(int(i) for i in doc[name]) for name in PARTITIONS))
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
            raise TaskFormatError(f'Manifesto de divisão inválido: {e}') from e


def scaffold_groups(smiles_list):
    '''Mapa chave de scaffold -> índices, na ordem de processamento da divisão'''
    groups = {}
    for idx, smiles in enumerate(smiles_list):
        groups.setdefault(smiles_scaffold_key(smiles), []).append(idx)
    return sorted(groups.items(), key=lambda item: (-len(item[1]), item[0]))


def scaffold_split(dataset, fracs=DEFAULT_FRACS, seed=None):
    '''
    Divisão determinística por scaffold

    Args:
        dataset: TaskDataset
        fracs: frações (treino, validação, teste), soma 1
        seed: registrada no resultado; a divisão não usa aleatoriedade

    Raises:
        EmptyDataset
    '''
    n = len(dataset)
    if n == 0:
        raise EmptyDataset('Conjunto de dados vazio para divisão')
    fracs = tuple(float(f) for f in fracs)
    if len(fracs) != 3 or any(f < 0 for f in fracs) or abs(sum(fracs) - 1.0) > 1e-6:
        raise ValueError(f'Frações inválidas {fracs}: três valores não negativos com soma 1')

    train_cut = fracs[0] * n - _EPS
    valid_cut = (fracs[0] + fracs[1]) * n - _EPS
    train, valid, test = [], [], []
    for _, members in scaffold_groups(dataset.smiles):
        if len(train) < train_cut:
            train.extend(members)
        elif len(train) + len(valid) < valid_cut:
            valid.extend(members)
        else:
            test.extend(members)

    split = SplitIndices(tuple(sorted(train)), tuple(sorted(valid)), tuple(sorted(test)), seed=seed)
    logger.info('[DIVISÃO] %s: treino=%d validação=%d teste=%d', dataset.task_name, len(train), len(valid), len(test))
    return split


def split_report(dataset, split):
    '''Tamanhos, número de scaffolds e positivos por partição'''
    keys = [smiles_scaffold_key(s) for s in dataset.smiles]
    report = {}
    for name in PARTITIONS:
        indices = split.partition(name)
        report[name] = {
            'size': len(indices),
            'scaffolds': len({keys[i] for i in indices}),
            'positives': int(sum(dataset.records[i][1] for i in indices)),
        }
    return report
