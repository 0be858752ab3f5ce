'''
Curadoria de corpus e subconjuntos aninhados

Corpus em disco: UTF-8, uma molécula por linha, terminações LF.
'''

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from app.chemistry.molgraph import parse_smiles
from app.chemistry.scaffold import canonical_key
from app.errors import CorpusIOError, InvalidSubsetSizes, SizeExceedsCorpus, SmilesParseError
from app.utils.artifacts import atomic_write_text

logger = logging.getLogger(__name__)

DEDUP_MODES = ('exact', 'canonical')


@dataclass(frozen=True)
class Corpus:
    lines: tuple
    path: Optional[str] = None

    @property
    def count(self):
        return len(self.lines)

    def __len__(self):
        return len(self.lines)

    def __iter__(self):
        return iter(self.lines)


def read_corpus(path):
    '''Ler corpus (linhas vazias descartadas, espaços aparados)'''
    try:
        with open(path, encoding='utf-8') as f:
            lines = tuple(line.strip() for line in f if line.strip())
    except OSError as e:
        raise CorpusIOError(f'Falha ao ler corpus {path}: {e}') from e
    return Corpus(lines=lines, path=str(path))


def read_lines(path):
    '''Ler todas as linhas do arquivo, vazias inclusive (numeração igual à do arquivo)'''
    try:
        with open(path, encoding='utf-8') as f:
            return [line.rstrip('\r\n') for line in f]
    except OSError as e:
        raise CorpusIOError(f'Falha ao ler corpus {path}: {e}') from e


def corpus_text(lines):
    return ''.join(f'{line}\n' for line in lines)


def write_corpus(corpus, path):
    try:
        atomic_write_text(path, corpus_text(corpus.lines))
    except OSError as e:
        raise CorpusIOError(f'Falha ao escrever corpus {path}: {e}') from e


def _dedup_key(line, mode):
    if mode == 'exact':
        return ('exact', line)
    try:
        return ('canonical', canonical_key(parse_smiles(line)))
    except SmilesParseError:
        # linhas não interpretáveis deduplicam pela string exata
        return ('exact', line)


def curate(lines, seed, dedup='canonical'):
    '''
    Aparar, descartar vazias, deduplicar e embaralhar globalmente

    Args:
        lines: iterável de strings
        seed: semente inteira de 64 bits
        dedup: "exact" (string idêntica) ou "canonical" (chave canônica do grafo)

    Returns:
        Corpus determinístico para a mesma entrada e semente
    '''
    if dedup not in DEDUP_MODES:
        raise ValueError(f'Modo de deduplicação inválido {dedup!r} (use {DEDUP_MODES})')

    seen = set()
    unique = []
    n_input = 0
    for raw in lines:
        line = raw.strip()
        if not line:
            continue
        n_input += 1
        key = _dedup_key(line, dedup)
        if key in seen:
            continue
        seen.add(key)
        unique.append(line)

    rng = np.random.default_rng(seed)
    order = rng.permutation(len(unique))
    shuffled = tuple(unique[i] for i in order)
    logger.info('[CURADORIA] %d linhas -> %d únicas (modo %s)', n_input, len(shuffled), dedup)
    return Corpus(lines=shuffled)


def subset(corpus, sizes):
    '''
    Prefixos aninhados do corpus embaralhado

    Raises:
        InvalidSubsetSizes: tamanhos vazios, não positivos ou fora de ordem
        SizeExceedsCorpus: maior tamanho acima do total de linhas
    '''
    sizes = [int(s) for s in sizes]
    if not sizes or any(s <= 0 for s in sizes):
        raise InvalidSubsetSizes(f'Tamanhos de subconjunto inválidos: {sizes}')
    if sizes != sorted(sizes):
        raise InvalidSubsetSizes(f'Tamanhos devem ser crescentes: {sizes}')
    if sizes[-1] > corpus.count:
        raise SizeExceedsCorpus(f'Subconjunto de {sizes[-1]} excede o corpus de {corpus.count} linhas')
    return [Corpus(lines=corpus.lines[:size]) for size in sizes]
